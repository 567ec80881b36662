#pragma once

// Finite-dimensional Hilbert-space primitives shared by every other module.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace fqm {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using OperatorMatrix = Eigen::MatrixXcd;

/// Vectors living in a fibre F_γ(t) share the coordinate representation of
/// the typical fibre; the alias only documents intent.
using FibreVector = StateVector;

inline constexpr Complex kI{0.0, 1.0};

struct PhysicalConstants {
  double hbar = 1.0;

  /// Throws InvalidArgument unless hbar is positive and finite.
  void validate() const;
};

/// ⟨u|v⟩, conjugate-linear in the first slot.
Complex inner_product(const StateVector& u, const StateVector& v);

OperatorMatrix adjoint(const OperatorMatrix& a);

/// AB − BA.
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

/// Max-absolute-entry metric used for every tolerance comparison.
double max_abs(const OperatorMatrix& a);
double max_abs(const StateVector& v);
double max_abs_diff(const OperatorMatrix& a, const OperatorMatrix& b);
double max_abs_diff(const StateVector& a, const StateVector& b);

bool is_hermitian(const OperatorMatrix& a, double tol);
bool is_unitary(const OperatorMatrix& a, double tol);

/// Smallest singular value; used as the invertibility criterion.
double min_singular_value(const OperatorMatrix& a);

/// Inverse via partial-pivot LU after a singular-value check against
/// `inv_tol`. Throws SingularMatrix when the check fails.
OperatorMatrix checked_inverse(const OperatorMatrix& a, double inv_tol);

/// exp(A) by scaling and squaring around a truncated Taylor series.
/// Throws NonConvergence if the series does not settle inside the term
/// budget or the result is not finite.
OperatorMatrix matrix_exponential(const OperatorMatrix& a);

/// |ψ⟩⟨ψ| (not normalized).
OperatorMatrix outer(const StateVector& u, const StateVector& v);

OperatorMatrix identity(std::size_t n);

void require_square(const OperatorMatrix& a, const char* what);
void require_same_dimension(const OperatorMatrix& a, const OperatorMatrix& b,
                            const char* what);
void require_same_dimension(const OperatorMatrix& a, const StateVector& v,
                            const char* what);
void require_same_dimension(const StateVector& u, const StateVector& v,
                            const char* what);

}  // namespace fqm
