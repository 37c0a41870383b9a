#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace hsr {

/// Dense column-major real matrix. Every matrix symbol of the model
/// (factors, degradation operators, unfoldings) is one of these.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Dims3 {
  std::size_t I = 1;
  std::size_t J = 1;
  std::size_t K = 1;

  std::size_t operator[](int mode) const { return mode == 1 ? I : mode == 2 ? J : K; }
  std::size_t numel() const { return I * J * K; }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

/// Dense third-order tensor. Element (i,j,k) (0-based) lives at
/// i + I*j + I*J*k, so a frontal slab is a column-major I x J matrix and the
/// whole buffer is the column-major mode-3 unfolding.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims3 dims);
  Tensor3(Dims3 dims, std::vector<double> data);

  const Dims3& dims() const { return dims_; }
  std::size_t numel() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[i + dims_.I * (j + dims_.J * k)];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[i + dims_.I * (j + dims_.J * k)];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Frontal slab k viewed as an I x J matrix.
  Eigen::Map<const Mat> slab(std::size_t k) const;
  Eigen::Map<Mat> slab(std::size_t k);

  /// (I*J) x K view; identical to unfold(t, 3) without the copy.
  Eigen::Map<const Mat> as_mode3() const;

  friend bool operator==(const Tensor3& a, const Tensor3& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

 private:
  Dims3 dims_{};
  std::vector<double> data_ = std::vector<double>(1, 0.0);
};

/// Block widths (L_1, ..., L_R) of a column-partitioned matrix.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<std::size_t> widths);

  std::size_t blocks() const { return widths_.size(); }
  std::size_t width(std::size_t r) const { return widths_[r]; }
  std::size_t offset(std::size_t r) const { return offsets_[r]; }
  std::size_t total() const { return offsets_.empty() ? 0 : offsets_.back(); }
  const std::vector<std::size_t>& widths() const { return widths_; }

  static Partition uniform(std::size_t blocks, std::size_t width);

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;  // blocks()+1 prefix sums
};

// Unfoldings (0-based):
//   mode 1: (K*J) x I,  row k*J + j, column i
//   mode 2: (K*I) x J,  row k*I + i, column j
//   mode 3: (I*J) x K,  row j*I + i, column k
Mat unfold(const Tensor3& t, int mode);
Tensor3 fold(const Mat& m, int mode, Dims3 dims);

/// t x_mode p: every mode-`mode` fiber is multiplied by p.
Tensor3 mode_product(const Tensor3& t, const Mat& p, int mode);

Mat kronecker(const Mat& a, const Mat& b);

/// Column f is a(:,f) kron b(:,f).
Mat khatri_rao(const Mat& a, const Mat& b);

/// [c_1 kron A_1, ..., c_R kron A_R] where A_r are the column blocks of a.
Mat pw_khatri_rao(const Mat& c, const Mat& a, const Partition& part);

double frob_norm(const Tensor3& t);
double frob_norm_sq(const Tensor3& t);

Tensor3 operator-(const Tensor3& a, const Tensor3& b);
Tensor3 operator+(const Tensor3& a, const Tensor3& b);
Tensor3 operator*(double s, const Tensor3& t);

}  // namespace hsr
