#pragma once

// Hilbert-bundle structure along a path: trivializations l_γ(t), lifting of
// vectors and operators into fibres, the fibre scalar product, ‡-conjugation,
// basis fields, global sections and the module structure on sections.
//
// Fibres are represented in a fixed coordinate frame of dimension n. The
// fibre metric is induced through l, ⟨u|v⟩_γ(t) = ⟨l u|l v⟩, so l need not
// be unitary for the lift to be an isometry.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fibreqm/grid.hpp"
#include "fibreqm/hilbert.hpp"
#include "fibreqm/paths.hpp"

namespace fqm {

using MatrixFunction = std::function<OperatorMatrix(double)>;

inline constexpr double kDefaultInverseTolerance = 1e-10;

/// t ↦ l_γ(t): fibre F_γ(t) → typical fibre, with access to dl/dt.
///
/// Without an analytic derivative, dl/dt falls back to central differences
/// with the configured step; if no step was configured either, derivative()
/// throws MissingDerivative.
class TrivializationFamily {
 public:
  TrivializationFamily() = default;
  TrivializationFamily(std::size_t dimension, MatrixFunction eval,
                       MatrixFunction derivative = {}, std::string name = "custom");

  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& name() const noexcept { return name_; }

  OperatorMatrix at(double t) const;
  /// l_γ(t)^{-1}; throws SingularMatrix below the invertibility threshold.
  OperatorMatrix inverse_at(double t) const;

  bool has_analytic_derivative() const noexcept { return static_cast<bool>(derivative_); }
  OperatorMatrix derivative(double t) const;
  /// d(l^{-1})/dt = −l^{-1}(dl/dt)l^{-1}.
  OperatorMatrix inverse_derivative(double t) const;

  TrivializationFamily& with_finite_difference_step(double h);
  TrivializationFamily& with_inverse_tolerance(double tol);
  double inverse_tolerance() const noexcept { return inv_tol_; }

 private:
  std::size_t dimension_ = 0;
  MatrixFunction eval_;
  MatrixFunction derivative_;
  std::string name_;
  double fd_step_ = 0.0;
  double inv_tol_ = kDefaultInverseTolerance;
};

struct DerivativeConsistency {
  double max_deviation = 0.0;
  double worst_time = 0.0;
  double min_singular_value = 0.0;
};

/// Compares derivative() with a central difference of at() using the grid
/// spacing, at interior grid points, and records the worst conditioning.
DerivativeConsistency check_derivative_consistency(const TrivializationFamily& l,
                                                   const TimeGrid& grid);

/// Point-indexed trivialization x ↦ l_x, used for global sections and for
/// pulling back along a path.
struct PointTrivialization {
  std::size_t dimension = 0;
  std::function<OperatorMatrix(const BasePoint&)> eval;
  /// (x, v) ↦ directional derivative of l at x along v.
  std::function<OperatorMatrix(const BasePoint&, const Eigen::VectorXd&)> directional_derivative;
  std::string name = "point";
};

/// l_γ(t) = l_{γ(t)}; the derivative uses the path velocity when both the
/// directional derivative and dγ/dt are available.
TrivializationFamily pull_back(const PointTrivialization& l, const Path& path);

namespace trivializations {
TrivializationFamily identity(std::size_t n);
/// e^{iωt}·I.
TrivializationFamily global_phase(std::size_t n, double omega);
/// diag(e^{iω₁t}, …, e^{iω_n t}).
TrivializationFamily diagonal_gauge(std::vector<double> frequencies);
/// Constant diag(d₁, …, d_n); not unitary unless every |d_a| = 1.
TrivializationFamily constant_diagonal(std::vector<Complex> entries);
/// exp(K(t)), K(t) = Σ_k K_k t^k with seeded random anti-Hermitian K_k.
/// The derivative is exact, read off the block exponential
/// exp([[K, K'], [0, K]]).
TrivializationFamily random_smooth_unitary(std::size_t n, std::uint64_t seed,
                                           std::size_t degree = 2, double scale = 0.5);
/// x ↦ diag(e^{i k_a·x}) for wavevectors k_a.
PointTrivialization position_phase(std::vector<Eigen::VectorXd> wavevectors);
}  // namespace trivializations

/// Values of a quantity at every node of a grid, keyed by grid index.
template <class T>
struct AlongPath {
  TimeGrid grid;
  std::vector<T> values;

  std::size_t size() const noexcept { return values.size(); }
  const T& operator[](std::size_t k) const { return values[k]; }
  T& operator[](std::size_t k) { return values[k]; }
};

using SectionAlongPath = AlongPath<FibreVector>;
using MorphismAlongPath = AlongPath<OperatorMatrix>;
using ScalarField = AlongPath<Complex>;

/// Ψ_γ(t) = l_γ(t)^{-1} ψ.
FibreVector lift_vector(const TrivializationFamily& l, double t, const StateVector& psi);
/// A_γ(t) = l_γ(t)^{-1} 𝒜 l_γ(t).
OperatorMatrix lift_operator(const TrivializationFamily& l, double t, const OperatorMatrix& a);
/// Inverse of lift_vector: l_γ(t) Ψ.
StateVector lower_vector(const TrivializationFamily& l, double t, const FibreVector& psi);
/// Inverse of lift_operator: l_γ(t) A l_γ(t)^{-1}.
OperatorMatrix lower_operator(const TrivializationFamily& l, double t, const OperatorMatrix& a);

/// ⟨u|v⟩_γ(t) = ⟨l u|l v⟩.
Complex fibre_inner_product(const TrivializationFamily& l, double t, const FibreVector& u,
                            const FibreVector& v);

/// A‡ = l^{-1}(l A l^{-1})† l at one time.
OperatorMatrix bundle_adjoint_morphism(const TrivializationFamily& l, double t,
                                       const OperatorMatrix& a_fibre);

/// Adjoint of a two-point map A: F_γ(t) → F_γ(s), returned as a map
/// F_γ(s) → F_γ(t) satisfying ⟨A‡Φ|Ψ⟩_γ(t) = ⟨Φ|AΨ⟩_γ(s):
/// A‡ = l_t^{-1} (l_s A l_t^{-1})† l_s.
OperatorMatrix bundle_adjoint_map(const TrivializationFamily& l, double s, double t,
                                  const OperatorMatrix& a_map);

/// e_a(t) = l_γ(t)^{-1} f_a. Throws InvalidArgument for a dependent frame.
std::vector<FibreVector> basis_field(const TrivializationFamily& l, double t,
                                     const std::vector<StateVector>& frame);

/// Φ̄: x ↦ l_x^{-1} φ for a point-indexed trivialization.
class GlobalSection {
 public:
  GlobalSection(PointTrivialization l, StateVector phi);

  FibreVector at(const BasePoint& x) const;
  /// Restriction to a path. Global sections are only admitted along paths
  /// without self-intersections (within `spatial_tol`); otherwise throws
  /// InvalidArgument.
  SectionAlongPath along(const Path& path, double spatial_tol = 1e-12) const;

 private:
  PointTrivialization l_;
  StateVector phi_;
};

/// Lifts a conventional trajectory sample-by-sample.
SectionAlongPath lift_states(const TrivializationFamily& l, const TimeGrid& grid,
                             const std::vector<StateVector>& states);
/// Lifts an observable family t ↦ 𝒜(t) on a grid.
MorphismAlongPath lift_observable(const TrivializationFamily& l, const TimeGrid& grid,
                                  const MatrixFunction& observable);

/// (fΦ + gΨ)(t) pointwise.
SectionAlongPath module_combine(const ScalarField& f, const SectionAlongPath& phi,
                                const ScalarField& g, const SectionAlongPath& psi);

/// t ↦ ⟨Φ(t)|Ψ(t)⟩_γ(t).
ScalarField section_inner(const TrivializationFamily& l, const SectionAlongPath& phi,
                          const SectionAlongPath& psi);

/// (AΦ)(t) = A(t)Φ(t).
SectionAlongPath morphism_as_section_operator(const MorphismAlongPath& a,
                                              const SectionAlongPath& phi);

using SectionOperator = std::function<SectionAlongPath(const SectionAlongPath&)>;

/// Recovers B_t with B_t(Φ(t)) = (BΦ)(t) by probing B with time-localized
/// basis sections. Throws NotPointwise when a probe leaks into other times or
/// B disagrees with the recovered morphism on a random section.
MorphismAlongPath section_operator_as_morphism(const SectionOperator& b, const TimeGrid& grid,
                                               std::size_t dimension,
                                               double tol = 0.0);

}  // namespace fqm
