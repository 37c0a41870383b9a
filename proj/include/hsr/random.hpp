#pragma once

#include <cstdint>
#include <random>

namespace hsr {

/// Portable uniform(0,1) stream: mt19937_64 output reduced to its top 53
/// bits. std::uniform_real_distribution is not used because its algorithm
/// differs between standard libraries.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  /// Value in [0, 1).
  double next() { return double(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Standard normal stream via Box-Muller over UniformStream.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : uniform_(seed) {}

  double next();

 private:
  UniformStream uniform_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hsr
