#include "hsr/model.hpp"

#include "hsr/degradation.hpp"
#include "hsr/error.hpp"

#include <algorithm>
#include <sstream>

namespace hsr {

RankSpec::RankSpec(std::vector<std::size_t> L) : part_(std::move(L)) {
  if (part_.blocks() == 0) throw UsageError("rank spec needs at least one block");
}

RankSpec RankSpec::uniform(std::size_t R, std::size_t L) {
  if (R == 0 || L == 0) throw UsageError("R and L must be positive");
  return RankSpec(std::vector<std::size_t>(R, L));
}

bool RankSpec::is_uniform() const {
  const auto& w = part_.widths();
  return std::adjacent_find(w.begin(), w.end(), std::not_equal_to<>()) == w.end();
}

void BtdFactors::validate() const {
  if (rank.R() == 0) throw UsageError("factors have an empty rank spec");
  if (std::size_t(A.cols()) != rank.total() || std::size_t(B.cols()) != rank.total() ||
      std::size_t(C.cols()) != rank.R()) {
    std::ostringstream os;
    os << "factor shapes A " << A.rows() << "x" << A.cols() << ", B " << B.rows() << "x" << B.cols() << ", C "
       << C.rows() << "x" << C.cols() << " do not match R=" << rank.R() << ", sum(L)=" << rank.total();
    throw UsageError(os.str());
  }
  if (A.rows() == 0 || B.rows() == 0 || C.rows() == 0) throw UsageError("factor matrices must be non-empty");
}

bool BtdFactors::nonnegative() const {
  return (A.array() >= 0.0).all() && (B.array() >= 0.0).all() && (C.array() >= 0.0).all();
}

Mat AbundanceSet::map(std::size_t r) const {
  return Eigen::Map<const Mat>(S.col(Eigen::Index(r)).data(), Eigen::Index(I), Eigen::Index(J));
}

AbundanceSet abundances(const BtdFactors& f) {
  f.validate();
  const Eigen::Index I = f.A.rows();
  const Eigen::Index J = f.B.rows();
  AbundanceSet out{Mat(I * J, f.rank.R()), std::size_t(I), std::size_t(J)};
  for (std::size_t r = 0; r < f.rank.R(); ++r) {
    Eigen::Map<Mat>(out.S.col(Eigen::Index(r)).data(), I, J).noalias() = f.A_block(r) * f.B_block(r).transpose();
  }
  return out;
}

Tensor3 btd_reconstruct(const BtdFactors& f) {
  const Mat X3 = abundances(f).S * f.C.transpose();
  return fold(X3, 3, f.dims());
}

Mat btd_unfold_direct(const BtdFactors& f, int mode) {
  f.validate();
  const Partition& part = f.rank.partition();
  switch (mode) {
    case 1:
      return pw_khatri_rao(f.C, f.B, part) * f.A.transpose();
    case 2:
      return pw_khatri_rao(f.C, f.A, part) * f.B.transpose();
    case 3:
      return abundances(f).S * f.C.transpose();
    default:
      throw UsageError("mode must be 1, 2 or 3, got " + std::to_string(mode));
  }
}

DegradedFactors degrade_factors(const BtdFactors& f, const DegradationOps& ops) {
  f.validate();
  ops.check_conforms(f.dims());
  return {BtdFactors{ops.P1 * f.A, ops.P2 * f.B, f.C, f.rank}, BtdFactors{f.A, f.B, ops.P3 * f.C, f.rank}};
}

std::string IdentifiabilityCheck::explain() const {
  if (holds) return "all conditions hold";
  std::string s;
  for (const auto& clause : failed) {
    if (!s.empty()) s += "; ";
    s += clause;
  }
  return s;
}

namespace {

std::size_t uniform_L(const RankSpec& rank) {
  if (!rank.is_uniform()) throw UsageError("identifiability conditions are stated for a uniform block rank L");
  return rank.L(0);
}

// min(floor(I/L),R) + min(floor(J/L),R) + min(K,R) >= 2R+2
void check_kruskal_like(std::size_t I, std::size_t J, std::size_t K, std::size_t R, std::size_t L,
                        IdentifiabilityCheck& out) {
  const std::size_t lhs = std::min(I / L, R) + std::min(J / L, R) + std::min(K, R);
  if (lhs < 2 * R + 2) {
    std::ostringstream os;
    os << "min(floor(I/L),R)+min(floor(J/L),R)+min(K,R) = " << lhs << " < 2R+2 = " << 2 * R + 2;
    out.failed.push_back(os.str());
  }
}

void check_spatial_size(std::size_t I, std::size_t J, std::size_t R, std::size_t L, IdentifiabilityCheck& out) {
  if (I * J < L * L * R) {
    std::ostringstream os;
    os << "I*J = " << I * J << " < L^2*R = " << L * L * R;
    out.failed.push_back(os.str());
  }
}

}  // namespace

IdentifiabilityCheck check_btd_identifiability(std::size_t I, std::size_t J, std::size_t K, const RankSpec& rank) {
  const std::size_t L = uniform_L(rank);
  const std::size_t R = rank.R();
  IdentifiabilityCheck out;
  check_spatial_size(I, J, R, L, out);
  check_kruskal_like(I, J, K, R, L, out);
  out.holds = out.failed.empty();
  return out;
}

IdentifiabilityCheck check_coupled_identifiability(std::size_t I_M, std::size_t J_M, std::size_t K_M,
                                                   std::size_t I_H, std::size_t J_H, const RankSpec& rank) {
  const std::size_t L = uniform_L(rank);
  const std::size_t R = rank.R();
  IdentifiabilityCheck out;
  check_spatial_size(I_M, J_M, R, L, out);
  if (I_H * J_H < R) {
    std::ostringstream os;
    os << "I_H*J_H = " << I_H * J_H << " < R = " << R;
    out.failed.push_back(os.str());
  }
  check_kruskal_like(I_M, J_M, K_M, R, L, out);
  out.holds = out.failed.empty();
  return out;
}

}  // namespace hsr
