#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

namespace trajfill {

// Seedable generator with a platform-independent stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The standard distributions are not, so uniform and normal
// variates are derived here: uniform() takes the top 53 bits, normal() uses
// the Box-Muller transform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  std::size_t index(std::size_t n);  // uniform in [0, n)

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Stream seed for one job, e.g. (global seed, gap index, model tag).
std::uint64_t derive_seed(std::uint64_t global, std::uint64_t a, std::uint64_t b = 0);

}  // namespace trajfill
