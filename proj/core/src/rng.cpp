#include "trajfill/rng.hpp"

#include <cmath>
#include <numbers>

namespace trajfill {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) return 0;
  const auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t global, std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(mix64(global) ^ a) ^ b);
}

}  // namespace trajfill
