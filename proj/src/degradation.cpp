#include "hsr/degradation.hpp"

#include "hsr/error.hpp"
#include "hsr/random.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace hsr {

DegradationOps DegradationOps::identity(Dims3 sri) {
  DegradationOps ops;
  ops.P1 = Mat::Identity(sri.I, sri.I);
  ops.P2 = Mat::Identity(sri.J, sri.J);
  ops.P3 = Mat::Identity(sri.K, sri.K);
  ops.params.kernel_size = 1;
  ops.params.sigma = 1.0;
  ops.params.ratio = 1;
  ops.params.offset = 0;
  return ops;
}

void DegradationOps::check_conforms(Dims3 sri) const {
  if (std::size_t(P1.cols()) != sri.I || std::size_t(P2.cols()) != sri.J || std::size_t(P3.cols()) != sri.K) {
    std::ostringstream os;
    os << "degradation operators (P1 " << P1.rows() << "x" << P1.cols() << ", P2 " << P2.rows() << "x" << P2.cols()
       << ", P3 " << P3.rows() << "x" << P3.cols() << ") do not conform to SRI dims " << sri.I << "x" << sri.J << "x"
       << sri.K;
    throw UsageError(os.str());
  }
}

Mat gaussian_blur_matrix(std::size_t n, std::size_t kernel_size, double sigma) {
  if (n == 0) throw UsageError("blur size must be positive");
  if (kernel_size % 2 == 0) throw UsageError("blur kernel size must be odd, got " + std::to_string(kernel_size));
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("blur sigma must be positive and finite");
  if (kernel_size > 2 * n - 1) {
    throw UsageError("blur kernel size " + std::to_string(kernel_size) + " exceeds 2n-1 for n=" + std::to_string(n));
  }
  const auto half = std::ptrdiff_t(kernel_size / 2);
  Mat P = Mat::Zero(n, n);
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
    double sum = 0.0;
    for (std::ptrdiff_t o = -half; o <= half; ++o) {
      const std::ptrdiff_t j = i + o;
      if (j < 0 || j >= std::ptrdiff_t(n)) continue;
      const double w = std::exp(-double(o * o) / (2.0 * sigma * sigma));
      P(i, j) = w;
      sum += w;
    }
    P.row(i) /= sum;
  }
  return P;
}

Mat downsample_matrix(std::size_t n, std::size_t d, std::size_t offset) {
  if (d == 0 || d > n) throw UsageError("downsampling ratio must satisfy 1 <= d <= n");
  if (offset >= d) throw UsageError("downsampling offset must be smaller than the ratio");
  const std::size_t rows = (n - offset + d - 1) / d;
  Mat P = Mat::Zero(rows, n);
  for (std::size_t r = 0; r < rows; ++r) P(r, offset + r * d) = 1.0;
  return P;
}

SpatialOps build_spatial_ops(std::size_t I_M, std::size_t J_M, std::size_t kernel_size, double sigma, std::size_t d,
                             std::size_t offset) {
  return {downsample_matrix(I_M, d, offset) * gaussian_blur_matrix(I_M, kernel_size, sigma),
          downsample_matrix(J_M, d, offset) * gaussian_blur_matrix(J_M, kernel_size, sigma)};
}

Mat uniform_srf(std::size_t K_H, std::size_t K_M) {
  if (K_M == 0) throw UsageError("MSI band count must be positive");
  if (K_M > K_H) {
    throw UsageError("MSI band count " + std::to_string(K_M) + " exceeds HSI band count " + std::to_string(K_H));
  }
  Mat P = Mat::Zero(K_M, K_H);
  const std::size_t base = K_H / K_M;
  const std::size_t extra = K_H % K_M;
  std::size_t start = 0;
  for (std::size_t m = 0; m < K_M; ++m) {
    const std::size_t size = base + (m < extra ? 1 : 0);
    P.row(m).segment(start, size).setConstant(1.0 / double(size));
    start += size;
  }
  return P;
}

Mat load_srf_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open SRF file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw UsageError("SRF file " + path.string() + ": cannot parse value '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw UsageError("SRF file " + path.string() + ": rows have different lengths");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw UsageError("SRF file " + path.string() + " is empty");
  Mat P(rows.size(), rows.front().size());
  for (std::size_t m = 0; m < rows.size(); ++m)
    for (std::size_t k = 0; k < rows[m].size(); ++k) P(m, k) = rows[m][k];
  return P;
}

DegradationOps build_degradation(Dims3 sri, const DegradationParams& params, std::size_t K_M,
                                 const std::filesystem::path& srf_csv) {
  DegradationOps ops;
  auto spatial = build_spatial_ops(sri.I, sri.J, params.kernel_size, params.sigma, params.ratio, params.offset);
  ops.P1 = std::move(spatial.P1);
  ops.P2 = std::move(spatial.P2);
  ops.params = params;
  if (srf_csv.empty()) {
    ops.P3 = uniform_srf(sri.K, K_M);
    ops.params.srf_source = "uniform";
  } else {
    ops.P3 = load_srf_csv(srf_csv);
    if (std::size_t(ops.P3.cols()) != sri.K) {
      throw UsageError("SRF file has " + std::to_string(ops.P3.cols()) + " columns but the SRI has " +
                       std::to_string(sri.K) + " bands");
    }
    ops.params.srf_source = srf_csv.string();
  }
  return ops;
}

DegradedPair apply_degradation(const Tensor3& sri, const DegradationOps& ops) {
  ops.check_conforms(sri.dims());
  return {mode_product(mode_product(sri, ops.P1, 1), ops.P2, 2), mode_product(sri, ops.P3, 3)};
}

Tensor3 add_noise(const Tensor3& t, const NoiseSpec& spec) {
  if (std::isnan(spec.snr_db) || spec.snr_db == -std::numeric_limits<double>::infinity()) {
    throw UsageError("SNR must be finite or +inf");
  }
  if (spec.snr_db == std::numeric_limits<double>::infinity()) return t;
  const double energy = frob_norm_sq(t);
  if (energy == 0.0) throw UsageError("cannot add noise at a target SNR to an all-zero tensor");
  const double sigma = std::sqrt(energy / (double(t.numel()) * std::pow(10.0, spec.snr_db / 10.0)));
  GaussianStream noise(spec.seed);
  Tensor3 out = t;
  for (double& v : out.data()) v += sigma * noise.next();
  return out;
}

}  // namespace hsr
