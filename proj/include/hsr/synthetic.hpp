#pragma once

#include "hsr/model.hpp"

#include <cstdint>

namespace hsr {

/// Factors with i.i.d. uniform(0,1) entries, drawn A, B, C in column-major
/// order from UniformStream(seed).
BtdFactors random_factors(Dims3 dims, const RankSpec& rank, std::uint64_t seed);

/// Adds Gaussian noise to each factor matrix with ||noise||_F equal to
/// `relative` times the matrix norm, then clips at zero.
BtdFactors perturb_factors(const BtdFactors& f, double relative, std::uint64_t seed);

}  // namespace hsr
