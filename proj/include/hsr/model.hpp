#pragma once

#include "hsr/tensor.hpp"

#include <string>
#include <vector>

namespace hsr {

struct DegradationOps;

/// Number of blocks R and per-block ranks L_r. A CPD of rank F is
/// RankSpec::uniform(F, 1).
class RankSpec {
 public:
  RankSpec() = default;
  explicit RankSpec(std::vector<std::size_t> L);

  static RankSpec uniform(std::size_t R, std::size_t L);

  std::size_t R() const { return part_.blocks(); }
  std::size_t L(std::size_t r) const { return part_.width(r); }
  std::size_t total() const { return part_.total(); }
  const Partition& partition() const { return part_; }
  bool is_uniform() const;

  friend bool operator==(const RankSpec& a, const RankSpec& b) { return a.part_.widths() == b.part_.widths(); }

 private:
  Partition part_;
};

/// Factors of a rank-(L_r, L_r, 1) block-term decomposition:
/// X = sum_r (A_r B_r^T) o c_r with A = [A_1 ... A_R], B = [B_1 ... B_R].
struct BtdFactors {
  Mat A;  // I x sum(L)
  Mat B;  // J x sum(L)
  Mat C;  // K x R
  RankSpec rank;

  Dims3 dims() const { return {std::size_t(A.rows()), std::size_t(B.rows()), std::size_t(C.rows())}; }
  auto A_block(std::size_t r) const { return A.middleCols(rank.partition().offset(r), rank.L(r)); }
  auto B_block(std::size_t r) const { return B.middleCols(rank.partition().offset(r), rank.L(r)); }

  /// Throws UsageError when the column counts do not agree with `rank`.
  void validate() const;
  bool nonnegative() const;
};

/// S with column r = vec(A_r B_r^T) (I*J x R), the abundance matrix.
struct AbundanceSet {
  Mat S;
  std::size_t I = 0;
  std::size_t J = 0;

  /// Abundance map r as an I x J matrix.
  Mat map(std::size_t r) const;
};

Tensor3 btd_reconstruct(const BtdFactors& f);
Mat btd_unfold_direct(const BtdFactors& f, int mode);
AbundanceSet abundances(const BtdFactors& f);

struct DegradedFactors {
  BtdFactors hsi;  // ({P1 A_r}, {P2 B_r}, C)
  BtdFactors msi;  // ({A_r}, {B_r}, P3 C)
};
DegradedFactors degrade_factors(const BtdFactors& f, const DegradationOps& ops);

/// Outcome of an identifiability condition check. `failed` lists the
/// clauses that do not hold; empty when `holds` is true.
struct IdentifiabilityCheck {
  bool holds = false;
  std::vector<std::string> failed;
  std::string explain() const;
};

/// Sufficient conditions for essential uniqueness of a rank-(L,L,1) BTD.
/// Requires uniform L.
IdentifiabilityCheck check_btd_identifiability(std::size_t I, std::size_t J, std::size_t K, const RankSpec& rank);

/// Sufficient conditions for recovering {A_r B_r^T, c_r} from the coupled
/// HSI/MSI pair. Requires uniform L.
IdentifiabilityCheck check_coupled_identifiability(std::size_t I_M, std::size_t J_M, std::size_t K_M,
                                                   std::size_t I_H, std::size_t J_H, const RankSpec& rank);

}  // namespace hsr
