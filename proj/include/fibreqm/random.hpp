#pragma once

// Seeded generators for randomized families. Distributions are built from
// raw 64-bit engine output so a seed reproduces the same numbers with every
// standard library.

#include <cstdint>
#include <random>

#include "fibreqm/hilbert.hpp"

namespace fqm {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box–Muller, no caching).
  double normal();
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
};

OperatorMatrix random_matrix(std::size_t n, Rng& rng, double scale = 1.0);
OperatorMatrix random_hermitian(std::size_t n, Rng& rng, double scale = 1.0);
OperatorMatrix random_anti_hermitian(std::size_t n, Rng& rng, double scale = 1.0);
/// exp of a random anti-Hermitian matrix; unitary to rounding.
OperatorMatrix random_unitary(std::size_t n, Rng& rng, double scale = 1.0);
/// Unit-norm random vector.
StateVector random_state(std::size_t n, Rng& rng);

}  // namespace fqm
