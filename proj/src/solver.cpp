#include "hsr/solver.hpp"

#include "hsr/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace hsr {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::cnn_btd: return "cnn_btd";
    case Method::cnn_cpd: return "cnn_cpd";
    case Method::stereo: return "stereo";
    case Method::two_stage: return "two_stage";
  }
  return "unknown";
}

std::string_view to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::random_uniform: return "random_uniform";
    case InitStrategy::svd_warm: return "svd_warm";
    case InitStrategy::provided: return "provided";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::cnn_btd, Method::cnn_cpd, Method::stereo, Method::two_stage})
    if (to_string(m) == name) return m;
  throw UsageError("unknown method '" + std::string(name) + "' (expected cnn_btd, cnn_cpd, stereo or two_stage)");
}

InitStrategy parse_init(std::string_view name) {
  for (InitStrategy s : {InitStrategy::random_uniform, InitStrategy::svd_warm, InitStrategy::provided})
    if (to_string(s) == name) return s;
  throw UsageError("unknown init strategy '" + std::string(name) + "'");
}

RankSpec FusionConfig::effective_rank() const {
  return method == Method::cnn_cpd ? RankSpec::uniform(rank.R(), 1) : rank;
}

void FusionConfig::validate() const {
  if (rank.R() == 0) throw UsageError("rank spec is empty");
  if (outer_iters < 1) throw UsageError("outer_iters must be at least 1");
  if (method != Method::stereo && inner_iters < 1) throw UsageError("inner_iters must be at least 1");
  if (rho && !(*rho > 0.0 && std::isfinite(*rho))) throw UsageError("rho must be positive and finite");
  if (!(tol >= 0.0)) throw UsageError("tol must be non-negative");
  if (init == InitStrategy::provided) {
    if (!initial) throw UsageError("init=provided needs initial factors");
    initial->validate();
    if (!(initial->rank == effective_rank())) throw UsageError("initial factors do not match the configured rank");
  }
}

// ---------------------------------------------------------------------------
// Sylvester equations

namespace {

bool scaled_identity(const Mat& M, double* alpha) {
  if (M.rows() != M.cols() || M.rows() == 0) return false;
  const double a = M(0, 0);
  const double scale = std::max(std::abs(a), std::numeric_limits<double>::min());
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      const double expect = i == j ? a : 0.0;
      if (std::abs(M(i, j) - expect) > 1e-14 * scale) return false;
    }
  if (a == 0.0) return false;
  *alpha = a;
  return true;
}

bool symmetric(const Mat& M) {
  if (M.rows() != M.cols()) return false;
  const double scale = std::max(M.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale;
}

Eigen::PartialPivLU<Mat> factor_checked(const Mat& M, const char* what, Eigen::Index index, double eigenvalue) {
  Eigen::PartialPivLU<Mat> lu(M);
  const double rc = lu.rcond();
  if (!(rc > 64 * std::numeric_limits<double>::epsilon())) {
    std::ostringstream os;
    os << "singular Sylvester pencil: " << what << " " << index << " (eigenvalue " << eigenvalue
       << ") has reciprocal condition " << rc;
    throw NumericalError(os.str());
  }
  return lu;
}

}  // namespace

SylvesterSolver::SylvesterSolver(const Mat& H1, const Mat& H2, const Mat& H3, const Mat& H4)
    : H1_(H1), H2_(H2), H3_(H3), H4_(H4) {
  const Eigen::Index m = H1.rows();
  const Eigen::Index n = H2.rows();
  if (H1.cols() != m || H3.rows() != m || H3.cols() != m || H2.cols() != n || H4.rows() != n || H4.cols() != n) {
    throw UsageError("Sylvester coefficients are not conformable square matrices");
  }
  if (scaled_identity(H3, &alpha_) && symmetric(H1)) {
    // H1 = Q D Q^T, Y = Q^T X:  Y(i,:) (d_i H2 + alpha H4) = (Q^T H5)(i,:)
    form_ = Form::row_wise;
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (H1 + H1.transpose()));
    Q_ = eig.eigenvectors();
    systems_.reserve(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double d = eig.eigenvalues()(i);
      systems_.push_back(factor_checked((d * H2 + alpha_ * H4).transpose(), "row system", i, d));
    }
  } else if (scaled_identity(H2, &alpha_) && symmetric(H4)) {
    // H4 = Q D Q^T, Y = X Q:  (alpha H1 + d_j H3) Y(:,j) = (H5 Q)(:,j)
    form_ = Form::column_wise;
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (H4 + H4.transpose()));
    Q_ = eig.eigenvectors();
    systems_.reserve(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = eig.eigenvalues()(j);
      systems_.push_back(factor_checked(alpha_ * H1 + d * H3, "column system", j, d));
    }
  } else {
    throw UsageError(
        "unsupported Sylvester structure: need H3 = aI with symmetric H1, or H2 = aI with symmetric H4; "
        "use sylvester_solve_dense for general coefficients");
  }
}

Mat SylvesterSolver::solve(const Mat& H5) const {
  if (H5.rows() != H1_.rows() || H5.cols() != H2_.rows()) throw UsageError("Sylvester right-hand side has wrong shape");
  if (form_ == Form::row_wise) {
    const Mat F = Q_.transpose() * H5;
    Mat Y(F.rows(), F.cols());
    for (Eigen::Index i = 0; i < F.rows(); ++i) Y.row(i) = systems_[i].solve(F.row(i).transpose()).transpose();
    return Q_ * Y;
  }
  const Mat G = H5 * Q_;
  Mat Y(G.rows(), G.cols());
  for (Eigen::Index j = 0; j < G.cols(); ++j) Y.col(j) = systems_[j].solve(G.col(j));
  return Y * Q_.transpose();
}

double SylvesterSolver::relative_residual(const Mat& X, const Mat& H5) const {
  const double r = (H1_ * X * H2_ + H3_ * X * H4_ - H5).norm();
  const double b = H5.norm();
  return b > 0.0 ? r / b : r;
}

Mat SylvesterSolver::solve_checked(const Mat& H5, double* residual) const {
  Mat X = solve(H5);
  const double res = relative_residual(X, H5);
  if (residual) *residual = res;
  if (!(res <= kResidualTolerance)) {
    std::ostringstream os;
    os << "Sylvester solve rejected: relative residual " << res << " exceeds " << kResidualTolerance;
    throw NumericalError(os.str());
  }
  return X;
}

Mat sylvester_solve(const Mat& H1, const Mat& H2, const Mat& H3, const Mat& H4, const Mat& H5) {
  return SylvesterSolver(H1, H2, H3, H4).solve_checked(H5);
}

Mat sylvester_solve_dense(const Mat& H1, const Mat& H2, const Mat& H3, const Mat& H4, const Mat& H5) {
  const Mat K = kronecker(H2.transpose(), H1) + kronecker(H4.transpose(), H3);
  Eigen::FullPivLU<Mat> lu(K);
  if (!lu.isInvertible()) throw NumericalError("singular Kronecker Sylvester system");
  const Vec x = lu.solve(Eigen::Map<const Vec>(H5.data(), H5.size()));
  return Eigen::Map<const Mat>(x.data(), H5.rows(), H5.cols());
}

// ---------------------------------------------------------------------------
// Coupled least-squares problem and its block subproblems

namespace {

// Either term may be absent: the MSI-only fit of the two-stage method drops
// the HSI term and uses an identity spectral operator.
struct Problem {
  const Tensor3* hsi = nullptr;
  const Mat* P1 = nullptr;
  const Mat* P2 = nullptr;
  const Tensor3* msi = nullptr;
  const Mat* P3 = nullptr;
};

double problem_objective(const BtdFactors& f, const Problem& p) {
  double J = 0.0;
  const AbundanceSet S = abundances(f);
  if (p.hsi) {
    Mat WH(p.P1->rows() * p.P2->rows(), f.rank.R());
    for (std::size_t r = 0; r < f.rank.R(); ++r) {
      Eigen::Map<Mat>(WH.col(r).data(), p.P1->rows(), p.P2->rows()).noalias() =
          (*p.P1) * S.map(r) * p.P2->transpose();
    }
    J += (p.hsi->as_mode3() - WH * f.C.transpose()).squaredNorm();
  }
  if (p.msi) J += (p.msi->as_mode3() - S.S * ((*p.P3) * f.C).transpose()).squaredNorm();
  return J;
}

double mean_diagonal(const Mat& M) { return M.rows() > 0 ? M.trace() / double(M.rows()) : 0.0; }

AdmmWorkspace build_block(Block block, const BtdFactors& f, const Problem& p, std::optional<double> rho) {
  f.validate();
  const Partition& part = f.rank.partition();
  const Eigen::Index n = f.rank.total();
  const Eigen::Index R = f.rank.R();
  AdmmWorkspace w;
  w.block = block;

  if (block == Block::A || block == Block::B) {
    const bool is_A = block == Block::A;
    const Mat& other = is_A ? f.B : f.A;  // the spatial factor held fixed
    const Mat* P_self = is_A ? p.P1 : p.P2;
    const Mat* P_other = is_A ? p.P2 : p.P1;
    const int mode = is_A ? 1 : 2;
    const Eigen::Index rows = is_A ? f.A.rows() : f.B.rows();

    if (p.hsi) {
      const Mat MH = pw_khatri_rao(f.C, (*P_other) * other, part);
      w.H1 = P_self->transpose() * (*P_self);
      w.H2 = MH.transpose() * MH;
      w.H5_base = P_self->transpose() * (unfold(*p.hsi, mode).transpose() * MH);
    } else {
      w.H1 = Mat::Zero(rows, rows);
      w.H2 = Mat::Zero(n, n);
      w.H5_base = Mat::Zero(rows, n);
    }
    w.H3 = Mat::Identity(rows, rows);
    const Mat MM = pw_khatri_rao((*p.P3) * f.C, other, part);
    w.H4 = MM.transpose() * MM;
    w.H5_base += unfold(*p.msi, mode).transpose() * MM;

    w.rho = rho ? *rho : mean_diagonal(w.H4);
    if (!rho && !(w.rho > 0.0)) w.rho = 1.0;
    w.H4.diagonal().array() += w.rho;
    w.Z = is_A ? f.A : f.B;
  } else {
    const Eigen::Index K = f.C.rows();
    const AbundanceSet S = abundances(f);
    const Mat& WM = S.S;
    w.H2 = Mat::Identity(K, K);
    w.H3 = WM.transpose() * WM;
    w.H4 = p.P3->transpose() * (*p.P3);
    w.H5_base = WM.transpose() * p.msi->as_mode3() * (*p.P3);
    Mat gram_h = Mat::Zero(R, R);
    if (p.hsi) {
      Mat WH(p.P1->rows() * p.P2->rows(), R);
      for (Eigen::Index r = 0; r < R; ++r) {
        Eigen::Map<Mat>(WH.col(r).data(), p.P1->rows(), p.P2->rows()).noalias() =
            (*p.P1) * S.map(r) * p.P2->transpose();
      }
      gram_h = WH.transpose() * WH;
      w.H5_base += WH.transpose() * p.hsi->as_mode3();
    }
    if (rho) {
      w.rho = *rho;
    } else {
      w.rho = mean_diagonal(gram_h);
      if (!(w.rho > 0.0)) w.rho = mean_diagonal(w.H3) * mean_diagonal(w.H4);
      if (!(w.rho > 0.0)) w.rho = 1.0;
    }
    w.H1 = gram_h;
    w.H1.diagonal().array() += w.rho;
    w.Z = f.C.transpose();
  }
  w.U = Mat::Zero(w.Z.rows(), w.Z.cols());
  w.X = w.Z;
  return w;
}

void store_block(BtdFactors& f, Block block, const Mat& value) {
  switch (block) {
    case Block::A: f.A = value; break;
    case Block::B: f.B = value; break;
    case Block::C: f.C = value.transpose(); break;
  }
}

// Exact unconstrained block minimiser (rho = 0). A numerically singular
// Gram gets diagonal jitter, escalated until the solve passes the gate.
Mat exact_block_solve(AdmmWorkspace& w, FusionResult& out) {
  Mat& carrier = w.block == Block::C ? w.H1 : w.H4;
  const double base = std::max(mean_diagonal(carrier), std::numeric_limits<double>::min());
  double jitter = 1e-12;
  for (int attempt = 0;; ++attempt) {
    try {
      double res = 0.0;
      Mat X = SylvesterSolver(w.H1, w.H2, w.H3, w.H4).solve_checked(w.H5_base, &res);
      w.max_residual = std::max(w.max_residual, res);
      return X;
    } catch (const NumericalError& e) {
      if (attempt == 3) throw;
      std::ostringstream os;
      os << "block " << "ABC"[int(w.block)] << ": " << e.what() << "; adding diagonal jitter " << jitter
         << " * trace/n";
      out.warnings.push_back(os.str());
      carrier.diagonal().array() += jitter * base;
      jitter *= 100.0;
    }
  }
}

struct DualState {
  Mat Z;
  Mat U;
  double rho = 0.0;
  bool ready = false;
};

void run_sweeps(BtdFactors& f, const Problem& p, const FusionConfig& cfg, bool constrained, FusionResult& out) {
  DualState duals[3];
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t sweep = 0; sweep < cfg.outer_iters; ++sweep) {
    for (Block block : {Block::A, Block::B, Block::C}) {
      if (constrained) {
        AdmmWorkspace w = build_block(block, f, p, cfg.rho);
        DualState& d = duals[int(block)];
        if (d.ready) {
          // U is scaled by 1/rho; keep the unscaled dual fixed when rho moves.
          w.Z = d.Z;
          w.U = d.U * (d.rho / w.rho);
        }
        store_block(f, block, admm_nn_block(w, cfg.inner_iters));
        out.max_sylvester_residual = std::max(out.max_sylvester_residual, w.max_residual);
        d = {std::move(w.Z), std::move(w.U), w.rho, true};
      } else {
        AdmmWorkspace w = build_block(block, f, p, 0.0);
        store_block(f, block, exact_block_solve(w, out));
        out.max_sylvester_residual = std::max(out.max_sylvester_residual, w.max_residual);
      }
      const double J = problem_objective(f, p);
      out.objective_trace.push_back(J);
      if (!std::isfinite(J)) {
        std::ostringstream os;
        os << "objective became non-finite at sweep " << sweep + 1 << ", block " << "ABC"[int(block)];
        throw DivergenceError(os.str(), out.objective_trace);
      }
    }
    ++out.iters_run;
    const double J = out.objective_trace.back();
    if (cfg.tol > 0.0 && std::isfinite(previous) &&
        std::abs(previous - J) <= cfg.tol * std::max(previous, std::numeric_limits<double>::min())) {
      break;
    }
    previous = J;
  }
}

struct Shapes {
  Dims3 sri;
};

Shapes check_inputs(const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops) {
  const Dims3 sri{msi.dims().I, msi.dims().J, hsi.dims().K};
  ops.check_conforms(sri);
  if (!(ops.hsi_dims(sri) == hsi.dims())) {
    std::ostringstream os;
    os << "HSI is " << hsi.dims().I << "x" << hsi.dims().J << "x" << hsi.dims().K << " but the operators produce "
       << ops.P1.rows() << "x" << ops.P2.rows() << "x" << sri.K;
    throw UsageError(os.str());
  }
  if (!(ops.msi_dims(sri) == msi.dims())) {
    std::ostringstream os;
    os << "MSI has " << msi.dims().K << " bands but P3 produces " << ops.P3.rows();
    throw UsageError(os.str());
  }
  return {sri};
}

BtdFactors starting_point(const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops, const FusionConfig& cfg,
                          Dims3 sri) {
  if (cfg.init == InitStrategy::provided) {
    if (!(cfg.initial->dims() == sri)) throw UsageError("initial factors do not match the SRI dimensions");
    return *cfg.initial;
  }
  return init_factors(sri, cfg.effective_rank(), cfg.seed, cfg.init, hsi, msi, ops);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double objective(const BtdFactors& f, const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops) {
  const Dims3 sri = check_inputs(hsi, msi, ops).sri;
  f.validate();
  if (!(f.dims() == sri)) throw UsageError("factor dimensions do not match the SRI implied by HSI/MSI");
  return problem_objective(f, Problem{&hsi, &ops.P1, &ops.P2, &msi, &ops.P3});
}

AdmmWorkspace build_subproblem(Block block, const BtdFactors& f, const Tensor3& hsi, const Tensor3& msi,
                               const DegradationOps& ops, std::optional<double> rho) {
  const Dims3 sri = check_inputs(hsi, msi, ops).sri;
  f.validate();
  if (!(f.dims() == sri)) throw UsageError("factor dimensions do not match the SRI implied by HSI/MSI");
  if (rho && !(*rho >= 0.0)) throw UsageError("rho must be non-negative");
  return build_block(block, f, Problem{&hsi, &ops.P1, &ops.P2, &msi, &ops.P3}, rho);
}

Mat admm_nn_block(AdmmWorkspace& w, std::size_t inner_iters) {
  if (inner_iters < 1) throw UsageError("inner_iters must be at least 1");
  if (!(w.rho > 0.0)) throw UsageError("ADMM needs rho > 0");
  const SylvesterSolver solver(w.H1, w.H2, w.H3, w.H4);
  for (std::size_t it = 0; it < inner_iters; ++it) {
    const Mat H5 = w.H5_base + w.rho * (w.Z + w.U);
    double res = 0.0;
    w.X = solver.solve_checked(H5, &res);
    w.max_residual = std::max(w.max_residual, res);
    w.Z = (w.X - w.U).cwiseMax(0.0);
    w.U += w.Z - w.X;
  }
  return w.Z;
}

FusionResult bcd_fuse(const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops, const FusionConfig& cfg) {
  if (cfg.method == Method::two_stage) throw UsageError("bcd_fuse does not run two_stage; use two_stage_recover");
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Dims3 sri = check_inputs(hsi, msi, ops).sri;

  FusionResult out;
  out.factors = starting_point(hsi, msi, ops, cfg, sri);
  const Problem p{&hsi, &ops.P1, &ops.P2, &msi, &ops.P3};
  run_sweeps(out.factors, p, cfg, cfg.method != Method::stereo, out);
  out.sri_estimate = btd_reconstruct(out.factors);
  out.wall_time_s = seconds_since(t0);
  return out;
}

Mat estimate_spectra(const Mat& S, std::size_t I_M, std::size_t J_M, const Tensor3& hsi, const DegradationOps& ops) {
  if (std::size_t(S.rows()) != I_M * J_M) throw UsageError("abundance matrix has the wrong number of rows");
  if (std::size_t(ops.P1.cols()) != I_M || std::size_t(ops.P2.cols()) != J_M ||
      std::size_t(ops.P1.rows()) != hsi.dims().I || std::size_t(ops.P2.rows()) != hsi.dims().J) {
    throw UsageError("spatial operators do not conform to the abundance maps and HSI");
  }
  const Eigen::Index R = S.cols();
  if (hsi.dims().I * hsi.dims().J < std::size_t(R)) {
    throw UsageError("spectral recovery needs I_H*J_H >= R");
  }
  Mat M(ops.P1.rows() * ops.P2.rows(), R);
  for (Eigen::Index r = 0; r < R; ++r) {
    const Eigen::Map<const Mat> Sr(S.col(r).data(), Eigen::Index(I_M), Eigen::Index(J_M));
    Eigen::Map<Mat>(M.col(r).data(), ops.P1.rows(), ops.P2.rows()).noalias() = ops.P1 * Sr * ops.P2.transpose();
  }
  Eigen::ColPivHouseholderQR<Mat> qr(M);
  qr.setThreshold(1e-10);
  if (qr.rank() < R) {
    std::ostringstream os;
    os << "(P2 kron P1) S has rank " << qr.rank() << " < R = " << R
       << "; spectra are not recoverable from the HSI with these abundances";
    throw NumericalError(os.str());
  }
  return qr.solve(Mat(hsi.as_mode3())).transpose();
}

FusionResult two_stage_recover(const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops,
                               const FusionConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Dims3 sri = check_inputs(hsi, msi, ops).sri;
  const RankSpec rank = cfg.effective_rank();
  if (hsi.dims().I * hsi.dims().J < rank.R()) throw UsageError("two-stage recovery needs I_H*J_H >= R");

  FusionResult out;
  const BtdFactors start = starting_point(hsi, msi, ops, cfg, sri);

  // Stage 1: nonnegative BTD of the MSI; its spectral factor D ~ P3 C is
  // auxiliary.
  BtdFactors msi_fit{start.A, start.B, ops.P3 * start.C, rank};
  const Mat I_KM = Mat::Identity(msi.dims().K, msi.dims().K);
  run_sweeps(msi_fit, Problem{nullptr, nullptr, nullptr, &msi, &I_KM}, cfg, true, out);

  // Stage 2: spectra from the HSI with the abundances fixed.
  out.factors = BtdFactors{msi_fit.A, msi_fit.B, Mat(), rank};
  out.factors.C = estimate_spectra(abundances(msi_fit).S, sri.I, sri.J, hsi, ops);
  out.objective_trace.push_back(objective(out.factors, hsi, msi, ops));
  out.sri_estimate = btd_reconstruct(out.factors);
  out.wall_time_s = seconds_since(t0);
  return out;
}

FusionResult fuse(const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops, const FusionConfig& cfg) {
  return cfg.method == Method::two_stage ? two_stage_recover(hsi, msi, ops, cfg) : bcd_fuse(hsi, msi, ops, cfg);
}

BtdFactors init_factors(Dims3 sri, const RankSpec& rank, std::uint64_t seed, InitStrategy strategy,
                        const Tensor3& hsi, const Tensor3& msi, const DegradationOps& ops) {
  if (strategy == InitStrategy::provided) throw UsageError("init_factors cannot synthesise provided factors");
  const Eigen::Index n = rank.total();
  const Eigen::Index R = rank.R();
  BtdFactors f{Mat(sri.I, n), Mat(sri.J, n), Mat(sri.K, R), rank};

  if (strategy == InitStrategy::random_uniform) {
    UniformStream u(seed);
    for (Mat* M : {&f.A, &f.B, &f.C})
      for (Eigen::Index k = 0; k < M->size(); ++k) M->data()[k] = u.next();
    if (std::size_t(ops.P3.cols()) == sri.K && msi.dims() == ops.msi_dims(sri)) {
      const double model = (abundances(f).S * (ops.P3 * f.C).transpose()).norm();
      const double target = frob_norm(msi);
      if (model > 0.0 && target > 0.0) f.C *= target / model;
    }
    return f;
  }

  // svd_warm
  check_inputs(hsi, msi, ops);
  const std::size_t K_M = msi.dims().K;
  const Eigen::Index max_rank = std::min<Eigen::Index>(sri.I, sri.J);
  for (Eigen::Index r = 0; r < R; ++r) {
    const Mat slab = msi.slab(std::size_t(r) % K_M);
    Eigen::JacobiSVD<Mat> svd(slab, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index width = rank.L(r);
    const Eigen::Index first = (Eigen::Index(std::size_t(r) / K_M) * width) % max_rank;
    const Eigen::Index off = rank.partition().offset(r);
    for (Eigen::Index l = 0; l < width; ++l) {
      const Eigen::Index t = (first + l) % max_rank;
      const double s = std::sqrt(svd.singularValues()(t));
      f.A.col(off + l) = svd.matrixU().col(t).cwiseAbs() * s;
      f.B.col(off + l) = svd.matrixV().col(t).cwiseAbs() * s;
    }
  }
  f.C.setConstant(1.0);
  try {
    f.C = estimate_spectra(abundances(f).S, sri.I, sri.J, hsi, ops).cwiseMax(0.0);
  } catch (const NumericalError&) {
    // Degenerate abundances: keep the flat spectra.
  }
  const double floor = 1e-6 * std::max(f.C.maxCoeff(), 1.0);
  f.C = f.C.cwiseMax(floor);
  return f;
}

}  // namespace hsr
