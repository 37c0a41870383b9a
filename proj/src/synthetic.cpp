#include "hsr/synthetic.hpp"

#include "hsr/error.hpp"
#include "hsr/random.hpp"

namespace hsr {

BtdFactors random_factors(Dims3 dims, const RankSpec& rank, std::uint64_t seed) {
  if (dims.I == 0 || dims.J == 0 || dims.K == 0) throw UsageError("dimensions must be positive");
  BtdFactors f{Mat(dims.I, rank.total()), Mat(dims.J, rank.total()), Mat(dims.K, rank.R()), rank};
  UniformStream u(seed);
  for (Mat* M : {&f.A, &f.B, &f.C})
    for (Eigen::Index k = 0; k < M->size(); ++k) M->data()[k] = u.next();
  return f;
}

BtdFactors perturb_factors(const BtdFactors& f, double relative, std::uint64_t seed) {
  if (!(relative >= 0.0)) throw UsageError("perturbation level must be non-negative");
  f.validate();
  BtdFactors out = f;
  GaussianStream g(seed);
  for (Mat* M : {&out.A, &out.B, &out.C}) {
    Mat noise(M->rows(), M->cols());
    for (Eigen::Index k = 0; k < noise.size(); ++k) noise.data()[k] = g.next();
    const double nn = noise.norm();
    if (nn > 0.0) *M += (relative * M->norm() / nn) * noise;
    *M = M->cwiseMax(0.0);
  }
  return out;
}

}  // namespace hsr
