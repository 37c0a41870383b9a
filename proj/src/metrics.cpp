#include "hsr/metrics.hpp"

#include "hsr/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace hsr {

namespace {

void check_same(const Tensor3& ref, const Tensor3& est) {
  if (!(ref.dims() == est.dims())) throw UsageError("reference and estimate dimensions differ");
}

}  // namespace

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["r_snr_db"] = r_snr_db;
  j["cc"] = cc;
  j["sam_rad"] = sam_rad;
  j["ergas"] = ergas;
  j["down_ratio"] = down_ratio;
  return j.dump();
}

double r_snr(const Tensor3& ref, const Tensor3& est) {
  check_same(ref, est);
  const double signal = frob_norm_sq(ref);
  if (signal == 0.0) throw UsageError("R-SNR is undefined for an all-zero reference");
  const double err = frob_norm_sq(ref - est);
  if (err == 0.0) return kRsnrCapDb;
  return std::min(kRsnrCapDb, 10.0 * std::log10(signal / err));
}

double sam(const Tensor3& ref, const Tensor3& est) {
  check_same(ref, est);
  const auto [I, J, K] = ref.dims();
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t i = 0; i < I; ++i) {
      double dot = 0.0, nr = 0.0, ne = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double a = ref(i, j, k);
        const double b = est(i, j, k);
        dot += a * b;
        nr += a * a;
        ne += b * b;
      }
      if (nr == 0.0 || ne == 0.0) continue;
      sum += std::acos(std::clamp(dot / std::sqrt(nr * ne), -1.0, 1.0));
      ++counted;
    }
  if (counted == 0) throw NumericalError("SAM is undefined: every pixel has a zero spectrum");
  return sum / double(counted);
}

double cc(const Tensor3& ref, const Tensor3& est) {
  check_same(ref, est);
  const std::size_t K = ref.dims().K;
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto a = ref.slab(k).array();
    const auto b = est.slab(k).array();
    const Eigen::ArrayXXd da = a - a.mean();
    const Eigen::ArrayXXd db = b - b.mean();
    const double va = da.square().sum();
    const double vb = db.square().sum();
    if (va == 0.0) throw NumericalError("CC is undefined: reference band " + std::to_string(k) + " is constant");
    if (vb == 0.0) continue;
    total += (da * db).sum() / std::sqrt(va * vb);
  }
  return total / double(K);
}

double ergas(const Tensor3& ref, const Tensor3& est, double d) {
  check_same(ref, est);
  if (!(d > 0.0)) throw UsageError("ERGAS needs a positive downsampling ratio");
  const std::size_t K = ref.dims().K;
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double mu = ref.slab(k).mean();
    if (mu == 0.0) throw NumericalError("ERGAS is undefined: reference band " + std::to_string(k) + " has zero mean");
    const double mse = (ref.slab(k) - est.slab(k)).squaredNorm() / double(ref.dims().I * ref.dims().J);
    acc += mse / (mu * mu);
  }
  return 100.0 / d * std::sqrt(acc / double(K));
}

MetricsReport evaluate(const Tensor3& ref, const Tensor3& est, double d) {
  return {r_snr(ref, est), cc(ref, est), sam(ref, est), ergas(ref, est, d), d};
}

MatchResult match_blocks(const BtdFactors& truth, const BtdFactors& est) {
  if (truth.rank.R() != est.rank.R()) throw UsageError("match_blocks needs the same number of blocks");
  if (truth.A.rows() != est.A.rows() || truth.B.rows() != est.B.rows()) {
    throw UsageError("match_blocks needs the same spatial dimensions");
  }
  const std::size_t R = truth.rank.R();
  if (R > 20) throw UsageError("match_blocks supports at most 20 blocks");
  const Mat S = abundances(truth).S;
  const Mat Sh = abundances(est).S;

  // cost(r, s): residual of the best scalar fit of truth block s to estimate block r.
  Mat cost(R, R);
  Mat scale(R, R);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t s = 0; s < R; ++s) {
      const double ss = S.col(s).squaredNorm();
      const double cross = S.col(s).dot(Sh.col(r));
      const double lambda = ss > 0.0 ? cross / ss : 0.0;
      scale(r, s) = lambda;
      cost(r, s) = (lambda * S.col(s) - Sh.col(r)).squaredNorm();
    }

  // Exact assignment by dynamic programming over subsets of truth blocks.
  const std::size_t full = std::size_t(1) << R;
  std::vector<double> best(full, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> choice(full, 0);
  best[0] = 0.0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (!std::isfinite(best[mask])) continue;
    const auto r = std::size_t(std::popcount(mask));
    if (r == R) continue;
    for (std::size_t s = 0; s < R; ++s) {
      if (mask & (std::size_t(1) << s)) continue;
      const std::size_t next = mask | (std::size_t(1) << s);
      const double c = best[mask] + cost(r, s);
      if (c < best[next]) {
        best[next] = c;
        choice[next] = s;
      }
    }
  }
  MatchResult out;
  out.permutation.assign(R, 0);
  out.scales.assign(R, 0.0);
  std::size_t mask = full - 1;
  for (std::size_t r = R; r-- > 0;) {
    const std::size_t s = choice[mask];
    out.permutation[r] = s;
    out.scales[r] = scale(r, s);
    mask &= ~(std::size_t(1) << s);
  }
  const double norm = S.squaredNorm();
  out.matched_error = norm > 0.0 ? best[full - 1] / norm : best[full - 1];
  return out;
}

}  // namespace hsr
