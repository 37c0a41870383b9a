#include "hsr/tensor.hpp"

#include "hsr/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace hsr {

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) throw UsageError("mode must be 1, 2 or 3, got " + std::to_string(mode));
}

void check_dims(Dims3 d) {
  if (d.I == 0 || d.J == 0 || d.K == 0) throw UsageError("tensor dimensions must be positive");
}

void check_same_dims(const Tensor3& a, const Tensor3& b) {
  if (!(a.dims() == b.dims())) throw UsageError("tensor dimension mismatch");
}

}  // namespace

Tensor3::Tensor3(Dims3 dims) : dims_(dims) {
  check_dims(dims);
  data_.assign(dims.numel(), 0.0);
}

Tensor3::Tensor3(Dims3 dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  check_dims(dims);
  if (data_.size() != dims.numel()) {
    throw UsageError("tensor data length " + std::to_string(data_.size()) + " does not match dims product " +
                     std::to_string(dims.numel()));
  }
}

Eigen::Map<const Mat> Tensor3::slab(std::size_t k) const {
  return {data_.data() + dims_.I * dims_.J * k, Eigen::Index(dims_.I), Eigen::Index(dims_.J)};
}

Eigen::Map<Mat> Tensor3::slab(std::size_t k) {
  return {data_.data() + dims_.I * dims_.J * k, Eigen::Index(dims_.I), Eigen::Index(dims_.J)};
}

Eigen::Map<const Mat> Tensor3::as_mode3() const {
  return {data_.data(), Eigen::Index(dims_.I * dims_.J), Eigen::Index(dims_.K)};
}

Partition::Partition(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
  offsets_.assign(widths_.size() + 1, 0);
  for (std::size_t r = 0; r < widths_.size(); ++r) {
    if (widths_[r] == 0) throw UsageError("partition block widths must be positive");
    offsets_[r + 1] = offsets_[r] + widths_[r];
  }
}

Partition Partition::uniform(std::size_t blocks, std::size_t width) {
  return Partition(std::vector<std::size_t>(blocks, width));
}

Mat unfold(const Tensor3& t, int mode) {
  check_mode(mode);
  const auto [I, J, K] = t.dims();
  switch (mode) {
    case 1: {
      Mat m(K * J, I);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t i = 0; i < I; ++i) m(k * J + j, i) = t(i, j, k);
      return m;
    }
    case 2: {
      Mat m(K * I, J);
      for (std::size_t k = 0; k < K; ++k) m.middleRows(k * I, I) = t.slab(k);
      return m;
    }
    default:
      return t.as_mode3();
  }
}

Tensor3 fold(const Mat& m, int mode, Dims3 dims) {
  check_mode(mode);
  check_dims(dims);
  const auto [I, J, K] = dims;
  const std::size_t rows = mode == 1 ? K * J : mode == 2 ? K * I : I * J;
  const std::size_t cols = dims[mode];
  if (std::size_t(m.rows()) != rows || std::size_t(m.cols()) != cols) {
    throw UsageError("fold: matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  Tensor3 t(dims);
  switch (mode) {
    case 1:
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t i = 0; i < I; ++i) t(i, j, k) = m(k * J + j, i);
      break;
    case 2:
      for (std::size_t k = 0; k < K; ++k) t.slab(k) = m.middleRows(k * I, I);
      break;
    default:
      Eigen::Map<Mat>(t.data().data(), Eigen::Index(I * J), Eigen::Index(K)) = m;
  }
  return t;
}

Tensor3 mode_product(const Tensor3& t, const Mat& p, int mode) {
  check_mode(mode);
  const auto [I, J, K] = t.dims();
  if (std::size_t(p.cols()) != t.dims()[mode]) {
    throw UsageError("mode-" + std::to_string(mode) + " product: operator has " + std::to_string(p.cols()) +
                     " columns but tensor dimension is " + std::to_string(t.dims()[mode]));
  }
  const std::size_t n = p.rows();
  switch (mode) {
    case 1: {
      // I x (J*K) view: every column is a mode-1 fiber.
      Tensor3 out({n, J, K});
      Eigen::Map<const Mat> in(t.data().data(), Eigen::Index(I), Eigen::Index(J * K));
      Eigen::Map<Mat>(out.data().data(), Eigen::Index(n), Eigen::Index(J * K)).noalias() = p * in;
      return out;
    }
    case 2: {
      Tensor3 out({I, n, K});
      for (std::size_t k = 0; k < K; ++k) out.slab(k).noalias() = t.slab(k) * p.transpose();
      return out;
    }
    default: {
      Tensor3 out({I, J, n});
      Eigen::Map<Mat>(out.data().data(), Eigen::Index(I * J), Eigen::Index(n)).noalias() =
          t.as_mode3() * p.transpose();
      return out;
    }
  }
}

Mat kronecker(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat khatri_rao(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) {
    throw UsageError("khatri_rao: column counts differ (" + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.cols()) + ")");
  }
  Mat out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index f = 0; f < a.cols(); ++f)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out.col(f).segment(i * b.rows(), b.rows()) = a(i, f) * b.col(f);
  return out;
}

Mat pw_khatri_rao(const Mat& c, const Mat& a, const Partition& part) {
  if (std::size_t(c.cols()) != part.blocks()) {
    throw UsageError("pw_khatri_rao: c has " + std::to_string(c.cols()) + " columns but partition has " +
                     std::to_string(part.blocks()) + " blocks");
  }
  if (std::size_t(a.cols()) != part.total()) {
    throw UsageError("pw_khatri_rao: a has " + std::to_string(a.cols()) + " columns but partition covers " +
                     std::to_string(part.total()));
  }
  const Eigen::Index rows = a.rows();
  Mat out(c.rows() * rows, a.cols());
  for (std::size_t r = 0; r < part.blocks(); ++r) {
    const Eigen::Index off = part.offset(r);
    const Eigen::Index w = part.width(r);
    for (Eigen::Index i = 0; i < c.rows(); ++i)
      out.block(i * rows, off, rows, w) = c(i, Eigen::Index(r)) * a.middleCols(off, w);
  }
  return out;
}

double frob_norm_sq(const Tensor3& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return s;
}

double frob_norm(const Tensor3& t) { return std::sqrt(frob_norm_sq(t)); }

Tensor3 operator-(const Tensor3& a, const Tensor3& b) {
  check_same_dims(a, b);
  Tensor3 out(a.dims());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t n = 0; n < o.size(); ++n) o[n] = x[n] - y[n];
  return out;
}

Tensor3 operator+(const Tensor3& a, const Tensor3& b) {
  check_same_dims(a, b);
  Tensor3 out(a.dims());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t n = 0; n < o.size(); ++n) o[n] = x[n] + y[n];
  return out;
}

Tensor3 operator*(double s, const Tensor3& t) {
  Tensor3 out(t.dims());
  auto o = out.data();
  auto x = t.data();
  for (std::size_t n = 0; n < o.size(); ++n) o[n] = s * x[n];
  return out;
}

}  // namespace hsr
