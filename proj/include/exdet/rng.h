#ifndef EXDET_RNG_H_
#define EXDET_RNG_H_

#include <cstdint>
#include <random>

namespace exdet {

// Portable random stream: std::mt19937_64 (whose output sequence is fixed by
// the C++ standard) seeded with splitmix64(seed ^ splitmix64(stream)).
// Conversions to doubles and integers are done here rather than through
// <random> distributions, whose algorithms are implementation-defined:
//   uniform()         = (next() >> 11) * 2^-53
//   uniform_int(a, b) = a + rejection-sampled next() mod (b - a + 1)
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Inclusive on both ends.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace exdet

#endif  // EXDET_RNG_H_
