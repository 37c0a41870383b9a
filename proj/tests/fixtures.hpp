// Shared synthetic instances for the solver tests and the acceptance run.
#pragma once

#include "hsr/degradation.hpp"
#include "hsr/model.hpp"
#include "hsr/solver.hpp"
#include "hsr/synthetic.hpp"
#include "oracles.hpp"

#include <random>

namespace fixture {

using hsr::Mat;

struct Coupled {
  hsr::BtdFactors truth;
  hsr::DegradationOps ops;
  hsr::Tensor3 sri;
  hsr::Tensor3 hsi;
  hsr::Tensor3 msi;
};

inline Coupled coupled(hsr::Dims3 dims, const hsr::RankSpec& rank, const hsr::DegradationParams& params,
                       std::size_t K_M, std::uint64_t seed) {
  Coupled c;
  c.truth = hsr::random_factors(dims, rank, seed);
  c.sri = hsr::btd_reconstruct(c.truth);
  c.ops = hsr::build_degradation(dims, params, K_M);
  auto pair = hsr::apply_degradation(c.sri, c.ops);
  c.hsi = std::move(pair.hsi);
  c.msi = std::move(pair.msi);
  return c;
}

// 27x27x16 SRI, R=3, L=2, 3x3 blur (sigma 1.5), d=3, 4 uniform MSI bands.
inline Coupled recovery_setting() {
  return coupled({27, 27, 16}, hsr::RankSpec::uniform(3, 2), {3, 1.5, 3, 0, "uniform"}, 4, 42);
}

// A well-conditioned block subproblem in the A/B shape (H3 = I):
// H1 = G1 + I, H2 = G2 + I, H4 = G4 + 0.5 I + rho I, H5 from random X.
struct Nnls {
  hsr::AdmmWorkspace w;
  Mat H4_plain;  // H4 without rho
};

inline Nnls nnls(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, bool feasible_minimiser) {
  Nnls n;
  auto& w = n.w;
  w.H1 = oracle::random_psd(rng, rows, rows) + Mat::Identity(rows, rows);
  w.H2 = oracle::random_psd(rng, cols, cols) + Mat::Identity(cols, cols);
  w.H3 = Mat::Identity(rows, rows);
  n.H4_plain = oracle::random_psd(rng, cols, cols) + 0.5 * Mat::Identity(cols, cols);
  const Mat X = feasible_minimiser ? oracle::random_mat(rng, rows, cols, 0.1, 1.0) : oracle::random_mat(rng, rows, cols);
  w.H5_base = w.H1 * X * w.H2 + w.H3 * X * n.H4_plain;
  w.rho = n.H4_plain.trace() / double(cols);
  w.H4 = n.H4_plain + w.rho * Mat::Identity(cols, cols);
  w.Z = Mat::Zero(rows, cols);
  w.U = Mat::Zero(rows, cols);
  w.X = w.Z;
  return n;
}

}  // namespace fixture
