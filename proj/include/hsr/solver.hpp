#pragma once

#include "hsr/degradation.hpp"
#include "hsr/error.hpp"
#include "hsr/model.hpp"
#include "hsr/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hsr {

enum class Method { cnn_btd, cnn_cpd, stereo, two_stage };
enum class InitStrategy { random_uniform, svd_warm, provided };
enum class Block { A, B, C };

std::string_view to_string(Method m);
std::string_view to_string(InitStrategy s);
Method parse_method(std::string_view name);
InitStrategy parse_init(std::string_view name);

struct FusionConfig {
  Method method = Method::cnn_btd;
  RankSpec rank = RankSpec::uniform(10, 20);
  std::size_t outer_iters = 20;
  std::size_t inner_iters = 5;
  std::optional<double> rho;  // empty: per-block automatic scaling
  double tol = 0.0;           // relative objective change per sweep; 0 disables
  std::uint64_t seed = 0;
  InitStrategy init = InitStrategy::random_uniform;
  std::optional<BtdFactors> initial;  // required when init == provided

  /// Rank actually fitted: cnn_cpd forces every L_r to 1.
  RankSpec effective_rank() const;
  void validate() const;
};

/// Matrices of one block subproblem
///   H1 X H2 + H3 X H4 = H5_base + rho (Z + U)
/// plus the ADMM split variable Z and scaled dual U.
/// X is A (I x sumL), B (J x sumL) or C^T (R x K) depending on `block`.
struct AdmmWorkspace {
  Block block = Block::A;
  Mat H1, H2, H3, H4;
  Mat H5_base;
  Mat Z;
  Mat U;
  Mat X;  // last unconstrained iterate
  double rho = 0.0;
  double max_residual = 0.0;  // worst relative Sylvester residual seen
};

/// Prefactored solver for H1 X H2 + H3 X H4 = H5 when H3 or H2 is a
/// multiple of the identity. The symmetric side (H1, resp. H4) is
/// diagonalised, which leaves one small dense system per row (resp. column)
/// of X. Factorisations are reused across right-hand sides.
class SylvesterSolver {
 public:
  SylvesterSolver(const Mat& H1, const Mat& H2, const Mat& H3, const Mat& H4);

  Mat solve(const Mat& H5) const;

  /// ||H1 X H2 + H3 X H4 - H5||_F / ||H5||_F (absolute when H5 == 0).
  double relative_residual(const Mat& X, const Mat& H5) const;

  /// solve() followed by the residual gate; throws NumericalError when the
  /// residual exceeds kResidualTolerance.
  Mat solve_checked(const Mat& H5, double* residual = nullptr) const;

  static constexpr double kResidualTolerance = 1e-8;

 private:
  enum class Form { row_wise, column_wise };

  Mat H1_, H2_, H3_, H4_;
  Form form_;
  double alpha_ = 1.0;
  Mat Q_;
  std::vector<Eigen::PartialPivLU<Mat>> systems_;
};

Mat sylvester_solve(const Mat& H1, const Mat& H2, const Mat& H3, const Mat& H4, const Mat& H5);

/// Solves (H2^T kron H1 + H4^T kron H3) vec(X) = vec(H5) directly. Only
/// sensible for small systems; works for any structure.
Mat sylvester_solve_dense(const Mat& H1, const Mat& H2, const Mat& H3, const Mat& H4, const Mat& H5);

/// J(A,B,C): squared HSI residual plus squared MSI residual.
double objective(const BtdFactors& f, const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops);

/// Builds the block subproblem. An empty rho selects the automatic value
/// (mean diagonal of the Gram matrix that carries rho). Z is set to the
/// current block value and U to zero.
AdmmWorkspace build_subproblem(Block block, const BtdFactors& f, const Tensor3& hsi, const Tensor3& msi,
                               const DegradationOps& ops, std::optional<double> rho);

/// Runs `inner_iters` ADMM steps on `w` starting from its Z and U and
/// returns the nonnegative iterate Z.
Mat admm_nn_block(AdmmWorkspace& w, std::size_t inner_iters);

struct FusionResult {
  BtdFactors factors;
  Tensor3 sri_estimate;
  std::vector<double> objective_trace;
  std::size_t iters_run = 0;
  double wall_time_s = 0.0;
  double max_sylvester_residual = 0.0;
  std::vector<std::string> warnings;
};

/// Raised when the objective stops being finite; carries the trace so far.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::vector<double> trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Cyclic A -> B -> C block updates. cnn_btd / cnn_cpd use ADMM with
/// nonnegativity, stereo solves each block exactly without constraints.
FusionResult bcd_fuse(const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops, const FusionConfig& cfg);

/// Stage 1 fits {A_r, B_r} to the MSI alone (nonnegative BTD with an
/// auxiliary spectral factor); stage 2 solves the HSI mode-3 least squares
/// problem for C with the abundances fixed.
FusionResult two_stage_recover(const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops,
                               const FusionConfig& cfg);

/// Stage 2 alone: least-squares C for fixed abundance matrix S (I_M*J_M x R).
Mat estimate_spectra(const Mat& S, std::size_t I_M, std::size_t J_M, const Tensor3& hsi, const DegradationOps& ops);

/// Dispatches on cfg.method.
FusionResult fuse(const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops, const FusionConfig& cfg);

/// Initial factors for an SRI of `sri` dims.
///  random_uniform: i.i.d. uniform(0,1) entries drawn A, B, C in column-major
///    order from UniformStream(seed); C is then rescaled so the MSI-domain
///    reconstruction ({A_r}, {B_r}, P3 C) has the Frobenius norm of `msi`.
///  svd_warm: A_r, B_r from leading singular pairs (absolute values) of MSI
///    band slabs, C from the HSI mode-3 least squares fit clipped at zero.
BtdFactors init_factors(Dims3 sri, const RankSpec& rank, std::uint64_t seed, InitStrategy strategy,
                        const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops);

}  // namespace hsr
