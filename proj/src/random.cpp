#include "fibreqm/random.hpp"

#include <cmath>
#include <numbers>

namespace fqm {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re, im};
}

OperatorMatrix random_matrix(std::size_t n, Rng& rng, double scale) {
  const auto m = static_cast<Eigen::Index>(n);
  OperatorMatrix a(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) a(i, j) = scale * rng.complex_normal();
  }
  return a;
}

OperatorMatrix random_hermitian(std::size_t n, Rng& rng, double scale) {
  const OperatorMatrix a = random_matrix(n, rng, scale);
  return 0.5 * (a + a.adjoint());
}

OperatorMatrix random_anti_hermitian(std::size_t n, Rng& rng, double scale) {
  const OperatorMatrix a = random_matrix(n, rng, scale);
  return 0.5 * (a - a.adjoint());
}

OperatorMatrix random_unitary(std::size_t n, Rng& rng, double scale) {
  return matrix_exponential(random_anti_hermitian(n, rng, scale));
}

StateVector random_state(std::size_t n, Rng& rng) {
  StateVector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
  return v / v.norm();
}

}  // namespace fqm
