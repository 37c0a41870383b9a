#pragma once

#include "hsr/model.hpp"
#include "hsr/tensor.hpp"

#include <string>
#include <vector>

namespace hsr {

/// R-SNR returned when the estimate is exact.
inline constexpr double kRsnrCapDb = 300.0;

struct MetricsReport {
  double r_snr_db = 0.0;
  double cc = 0.0;
  double sam_rad = 0.0;
  double ergas = 0.0;
  double down_ratio = 1.0;

  /// Flat JSON object with keys r_snr_db, cc, sam_rad, ergas, down_ratio.
  std::string to_json() const;
};

/// 10 log10(||ref||^2 / ||ref - est||^2), capped at kRsnrCapDb.
double r_snr(const Tensor3& ref, const Tensor3& est);

/// Mean spectral angle in radians over pixels where both fibres are
/// nonzero.
double sam(const Tensor3& ref, const Tensor3& est);

/// Band-averaged Pearson correlation; a constant estimate band scores 0.
double cc(const Tensor3& ref, const Tensor3& est);

/// 100/d * sqrt(mean_k RMSE_k^2 / mu_k^2).
double ergas(const Tensor3& ref, const Tensor3& est, double d);

MetricsReport evaluate(const Tensor3& ref, const Tensor3& est, double d);

/// Resolution of the block permutation/scaling ambiguity between two BTDs.
/// Estimated block r corresponds to truth block permutation[r] scaled by
/// scales[r]: S_hat_r ~ scales[r] * S_{permutation[r]}.
struct MatchResult {
  std::vector<std::size_t> permutation;
  std::vector<double> scales;
  double matched_error = 0.0;  // min sum_r ||scales[r] S_perm[r] - S_hat_r||^2 / ||S||^2
};

MatchResult match_blocks(const BtdFactors& truth, const BtdFactors& est);

}  // namespace hsr
