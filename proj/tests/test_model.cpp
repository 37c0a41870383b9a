#include "hsr/degradation.hpp"
#include "hsr/error.hpp"
#include "hsr/model.hpp"
#include "hsr/synthetic.hpp"
#include "oracles.hpp"

#include <doctest.h>

using hsr::BtdFactors;
using hsr::Mat;
using hsr::RankSpec;

namespace {

BtdFactors random_btd(std::mt19937_64& rng, hsr::Dims3 d, const RankSpec& rank) {
  return {oracle::random_mat(rng, d.I, rank.total()), oracle::random_mat(rng, d.J, rank.total()),
          oracle::random_mat(rng, d.K, rank.R()), rank};
}

}  // namespace

TEST_CASE("rank spec") {
  const RankSpec r({2, 3});
  CHECK(r.R() == 2);
  CHECK(r.total() == 5);
  CHECK_FALSE(r.is_uniform());
  CHECK(RankSpec::uniform(4, 2).is_uniform());
  CHECK_THROWS_AS(RankSpec(std::vector<std::size_t>{}), hsr::UsageError);
  CHECK_THROWS_AS(RankSpec::uniform(0, 2), hsr::UsageError);
  CHECK_THROWS_AS(RankSpec({1, 0}), hsr::UsageError);
}

TEST_CASE("reconstruction") {
  SUBCASE("single outer product") {
    BtdFactors f{Mat::Zero(2, 1), Mat::Zero(2, 1), Mat::Ones(2, 1), RankSpec::uniform(1, 1)};
    f.A(0, 0) = 1.0;
    f.B(0, 0) = 1.0;
    const hsr::Tensor3 x = hsr::btd_reconstruct(f);
    CHECK(x(0, 0, 0) == 1.0);
    CHECK(x(0, 0, 1) == 1.0);
    CHECK(hsr::frob_norm_sq(x) == 2.0);
  }
  SUBCASE("zero block drops out") {
    std::mt19937_64 rng(10);
    BtdFactors f = random_btd(rng, {3, 4, 5}, RankSpec({2, 1}));
    f.C.col(1).setZero();
    const BtdFactors first{f.A.leftCols(2), f.B.leftCols(2), f.C.leftCols(1), RankSpec({2})};
    CHECK(oracle::rel_err(hsr::unfold(hsr::btd_reconstruct(f), 3), hsr::unfold(hsr::btd_reconstruct(first), 3)) <
          1e-15);
  }
  SUBCASE("triple-loop oracle") {
    std::mt19937_64 rng(11);
    const BtdFactors f = random_btd(rng, {3, 3, 4}, RankSpec::uniform(2, 2));
    CHECK(oracle::rel_err(hsr::unfold(hsr::btd_reconstruct(f), 3), oracle::unfold(oracle::reconstruct(f), 3)) < 1e-13);
  }
  SUBCASE("CPD reduction") {
    std::mt19937_64 rng(12);
    const BtdFactors f = random_btd(rng, {4, 3, 5}, RankSpec::uniform(3, 1));
    hsr::Tensor3 cpd({4, 3, 5});
    for (std::size_t k = 0; k < 5; ++k)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 4; ++i)
          for (Eigen::Index r = 0; r < 3; ++r) cpd(i, j, k) += f.A(i, r) * f.B(j, r) * f.C(k, r);
    CHECK(hsr::frob_norm(hsr::btd_reconstruct(f) - cpd) <= 1e-13 * hsr::frob_norm(cpd));
  }
  SUBCASE("shape mismatch") {
    BtdFactors f{Mat::Zero(2, 3), Mat::Zero(2, 2), Mat::Zero(2, 1), RankSpec::uniform(1, 2)};
    CHECK_THROWS_AS(hsr::btd_reconstruct(f), hsr::UsageError);
  }
}

TEST_CASE("direct unfoldings agree with reconstruction") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const hsr::Dims3 d{oracle::pick(rng, 1, 10), oracle::pick(rng, 1, 10), oracle::pick(rng, 1, 10)};
    std::vector<std::size_t> L(oracle::pick(rng, 1, 3));
    for (auto& l : L) l = oracle::pick(rng, 1, 3);
    const BtdFactors f = random_btd(rng, d, RankSpec(L));
    const hsr::Tensor3 x = hsr::btd_reconstruct(f);
    for (int mode = 1; mode <= 3; ++mode) CHECK(oracle::rel_err(hsr::btd_unfold_direct(f, mode), hsr::unfold(x, mode)) < 1e-12);
  }
  BtdFactors zero = random_btd(rng, {3, 4, 2}, RankSpec::uniform(2, 2));
  zero.C.setZero();
  for (int mode = 1; mode <= 3; ++mode) CHECK(hsr::btd_unfold_direct(zero, mode).isZero(0.0));

  const BtdFactors rank1 = random_btd(rng, {3, 4, 2}, RankSpec::uniform(1, 1));
  const Mat X3 = hsr::btd_unfold_direct(rank1, 3);
  CHECK(X3.jacobiSvd().singularValues()(1) < 1e-12 * X3.norm());
  CHECK_THROWS_AS(hsr::btd_unfold_direct(rank1, 5), hsr::UsageError);
}

TEST_CASE("abundances") {
  std::mt19937_64 rng(14);
  const BtdFactors f1 = random_btd(rng, {4, 5, 3}, RankSpec::uniform(2, 1));
  const hsr::AbundanceSet s1 = hsr::abundances(f1);
  for (std::size_t r = 0; r < 2; ++r) CHECK(oracle::rel_err(s1.map(r), f1.A.col(r) * f1.B.col(r).transpose()) < 1e-15);

  const BtdFactors f = random_btd(rng, {4, 5, 3}, RankSpec({2, 3}));
  const hsr::AbundanceSet s = hsr::abundances(f);
  CHECK(oracle::rel_err(s.S * f.C.transpose(), hsr::btd_unfold_direct(f, 3)) < 1e-12);
  CHECK(oracle::rel_err(s.map(1), f.A_block(1) * f.B_block(1).transpose()) < 1e-12);

  BtdFactors z = f;
  z.A.setZero();
  CHECK(hsr::abundances(z).S.isZero(0.0));
}

TEST_CASE("degraded factors commute with degradation") {
  std::mt19937_64 rng(15);
  const hsr::Dims3 d{9, 8, 10};
  const BtdFactors f = random_btd(rng, d, RankSpec::uniform(3, 2));

  const auto same = hsr::degrade_factors(f, hsr::DegradationOps::identity(d));
  CHECK(same.hsi.A == f.A);
  CHECK(same.msi.C == f.C);

  hsr::DegradationOps ops;
  ops.P1 = oracle::random_mat(rng, 3, d.I);
  ops.P2 = oracle::random_mat(rng, 4, d.J);
  ops.P3 = oracle::random_mat(rng, 2, d.K);
  const auto df = hsr::degrade_factors(f, ops);
  const hsr::Tensor3 x = hsr::btd_reconstruct(f);
  const hsr::Tensor3 hsi = oracle::mode_product(oracle::mode_product(x, ops.P1, 1), ops.P2, 2);
  const hsr::Tensor3 msi = oracle::mode_product(x, ops.P3, 3);
  CHECK(hsr::frob_norm(hsr::btd_reconstruct(df.hsi) - hsi) <= 1e-12 * hsr::frob_norm(hsi));
  CHECK(hsr::frob_norm(hsr::btd_reconstruct(df.msi) - msi) <= 1e-12 * hsr::frob_norm(msi));

  ops.P1 = Mat::Zero(3, d.I + 1);
  CHECK_THROWS_AS(hsr::degrade_factors(f, ops), hsr::UsageError);
}

TEST_CASE("BTD identifiability conditions") {
  CHECK(hsr::check_btd_identifiability(100, 100, 4, RankSpec::uniform(4, 5)).holds);
  const auto full_scale = hsr::check_btd_identifiability(145, 145, 4, RankSpec::uniform(10, 20));
  CHECK_FALSE(full_scale.holds);
  CHECK(full_scale.failed.size() == 1);
  CHECK(full_scale.explain().find("18 < 2R+2 = 22") != std::string::npos);
  CHECK_FALSE(hsr::check_btd_identifiability(2, 2, 2, RankSpec::uniform(1, 1)).holds);
  CHECK_THROWS_AS(hsr::check_btd_identifiability(10, 10, 4, RankSpec({1, 2})), hsr::UsageError);
}

TEST_CASE("coupled identifiability conditions") {
  const RankSpec r = RankSpec::uniform(3, 2);
  CHECK(hsr::check_coupled_identifiability(27, 27, 4, 9, 9, r).holds);
  const auto tiny_hsi = hsr::check_coupled_identifiability(27, 27, 4, 1, 1, r);
  CHECK_FALSE(tiny_hsi.holds);
  CHECK(tiny_hsi.explain().find("I_H*J_H") != std::string::npos);
  CHECK_FALSE(hsr::check_coupled_identifiability(145, 145, 4, 29, 29, RankSpec::uniform(10, 20)).holds);
  CHECK_THROWS_AS(hsr::check_coupled_identifiability(27, 27, 4, 9, 9, RankSpec({2, 1})), hsr::UsageError);

  // Monotone in every dimension.
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t dims[5];
    for (auto& v : dims) v = oracle::pick(rng, 1, 30);
    const RankSpec rank = RankSpec::uniform(oracle::pick(rng, 1, 6), oracle::pick(rng, 1, 4));
    const bool base = hsr::check_coupled_identifiability(dims[0], dims[1], dims[2], dims[3], dims[4], rank).holds;
    if (!base) continue;
    for (int which = 0; which < 5; ++which) {
      std::size_t grown[5];
      std::copy(dims, dims + 5, grown);
      grown[which] += oracle::pick(rng, 1, 10);
      CHECK(hsr::check_coupled_identifiability(grown[0], grown[1], grown[2], grown[3], grown[4], rank).holds);
    }
  }
}

TEST_CASE("synthetic factors are reproducible and nonnegative") {
  const auto a = hsr::random_factors({5, 6, 7}, RankSpec::uniform(2, 2), 3);
  const auto b = hsr::random_factors({5, 6, 7}, RankSpec::uniform(2, 2), 3);
  CHECK(a.A == b.A);
  CHECK(a.C == b.C);
  CHECK(a.nonnegative());
  const auto p = hsr::perturb_factors(a, 0.01, 4);
  CHECK(p.nonnegative());
  CHECK((p.A - a.A).norm() <= 0.0100001 * a.A.norm());
  CHECK((p.A - a.A).norm() > 0.0);
}
