#pragma once

#include "hsr/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>

namespace hsr {

/// How the operators were built. Recorded for manifests and summaries.
struct DegradationParams {
  std::size_t kernel_size = 9;
  double sigma = 2.5;  // Gaussian blur std-dev in pixels
  std::size_t ratio = 5;
  std::size_t offset = 0;
  std::string srf_source = "uniform";  // "uniform" or the SRF CSV path
};

/// Linear operators mapping an SRI to its HSI (x_1 P1 x_2 P2) and MSI
/// (x_3 P3).
struct DegradationOps {
  Mat P1;  // I_H x I_M
  Mat P2;  // J_H x J_M
  Mat P3;  // K_M x K_H
  DegradationParams params;

  static DegradationOps identity(Dims3 sri);

  /// Throws UsageError unless the operators conform to an SRI of `sri` dims.
  void check_conforms(Dims3 sri) const;
  Dims3 hsi_dims(Dims3 sri) const { return {std::size_t(P1.rows()), std::size_t(P2.rows()), sri.K}; }
  Dims3 msi_dims(Dims3 sri) const { return {sri.I, sri.J, std::size_t(P3.rows())}; }
};

/// n x n truncated Gaussian blur. Row i holds exp(-o^2/(2 sigma^2)) for
/// |o| <= (kernel_size-1)/2 centred on i, clipped at the borders and
/// renormalised to sum to 1.
Mat gaussian_blur_matrix(std::size_t n, std::size_t kernel_size, double sigma);

/// Keeps samples offset, offset+d, ... (0-based); ceil((n-offset)/d) rows.
Mat downsample_matrix(std::size_t n, std::size_t d, std::size_t offset);

struct SpatialOps {
  Mat P1;
  Mat P2;
};
SpatialOps build_spatial_ops(std::size_t I_M, std::size_t J_M, std::size_t kernel_size, double sigma, std::size_t d,
                             std::size_t offset);

/// Averages K_H bands into K_M contiguous groups; the first K_H mod K_M
/// groups get one extra band.
Mat uniform_srf(std::size_t K_H, std::size_t K_M);

/// SRF CSV: K_M rows of K_H comma-separated values, no header.
Mat load_srf_csv(const std::filesystem::path& path);

/// Full operator set for an SRI of `sri` dims. An empty `srf_csv` selects
/// uniform_srf(sri.K, K_M).
DegradationOps build_degradation(Dims3 sri, const DegradationParams& params, std::size_t K_M,
                                 const std::filesystem::path& srf_csv = {});

struct DegradedPair {
  Tensor3 hsi;
  Tensor3 msi;
};
DegradedPair apply_degradation(const Tensor3& sri, const DegradationOps& ops);

struct NoiseSpec {
  double snr_db = std::numeric_limits<double>::infinity();  // +inf disables noise
  std::uint64_t seed = 0;
};

/// t + N with N i.i.d. zero-mean Gaussian, variance
/// ||t||_F^2 / (numel * 10^(snr_db/10)).
///
/// The noise stream is std::mt19937_64 seeded with `seed`; uniforms use the
/// top 53 bits of each draw and normals come from the Box-Muller transform
/// (both outputs used in order). This is fully specified, so streams are
/// identical across platforms and standard libraries.
Tensor3 add_noise(const Tensor3& t, const NoiseSpec& spec);

}  // namespace hsr
