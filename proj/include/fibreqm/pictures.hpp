#pragma once

// Mean values on the bundle side, pictures of motion, density morphisms and
// integrals of motion.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fibreqm/transport.hpp"

namespace fqm {

/// ⟨Ψ|AΨ⟩_γ(t) / ⟨Ψ|Ψ⟩_γ(t). Throws ZeroState for Ψ = 0.
Complex bundle_mean_value(const TrivializationFamily& l, double t, const OperatorMatrix& a_fibre,
                          const FibreVector& psi);
Complex bundle_mean_value(const MorphismAlongPath& a, const SectionAlongPath& psi,
                          const TrivializationFamily& l, double t);

/// Ψ^H = U_γ(t0, t)Ψ_γ(t).
FibreVector to_heisenberg_state(const SectionAlongPath& psi, const EvolutionTransport& u,
                                double t0, double t);
/// A^H = U_γ(t0, t) A_γ(t) U_γ(t, t0).
OperatorMatrix to_heisenberg_observable(const MorphismAlongPath& a, const EvolutionTransport& u,
                                        double t0, double t);

/// Invertible family 𝒱(t, t0): F_γ(t0) → F_γ(t) on a grid, with 𝒱(t0, t0) = I.
/// States transform as Ψ ↦ 𝒱^{-1}Ψ and observables as A ↦ 𝒱^{-1}A𝒱, which
/// keeps every mean value unchanged when 𝒱 is a unitary bundle map.
class PictureTransform {
 public:
  /// Inverses are computed by checked LU. Throws InvalidArgument unless
  /// 𝒱(t0, t0) = I to 1e-12.
  PictureTransform(TimeGrid grid, std::size_t reference, std::vector<OperatorMatrix> forward,
                   bool unitary);

  /// Schrödinger picture: 𝒱 ≡ I.
  static PictureTransform identity(const TimeGrid& grid, std::size_t reference, std::size_t n);
  /// Heisenberg picture: 𝒱(t, t0) = U_γ(t, t0), inverse U_γ(t0, t).
  static PictureTransform from_transport(const EvolutionTransport& u, double t0);
  /// 𝒱(t, t0) = l_t^{-1} W(t) W(t0)^{-1} l_t0 for a family W of operators on
  /// the typical fibre; unitary W gives a unitary bundle map.
  static PictureTransform from_typical_fibre(const TrivializationFamily& l, const TimeGrid& grid,
                                             double t0, const MatrixFunction& w,
                                             bool unitary);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t reference_index() const noexcept { return reference_; }
  double reference_time() const { return grid_.time(reference_); }
  bool unitary() const noexcept { return unitary_; }
  const OperatorMatrix& forward(std::size_t k) const { return forward_.at(k); }
  const OperatorMatrix& inverse(std::size_t k) const { return inverse_.at(k); }

 private:
  PictureTransform() = default;
  TimeGrid grid_;
  std::size_t reference_ = 0;
  bool unitary_ = false;
  std::vector<OperatorMatrix> forward_;
  std::vector<OperatorMatrix> inverse_;
};

FibreVector to_general_picture(const SectionAlongPath& psi, const PictureTransform& v, double t);
OperatorMatrix to_general_picture(const MorphismAlongPath& a, const PictureTransform& v, double t);

/// P_γ(t) = l^{-1} ρ l.
OperatorMatrix density_morphism(const OperatorMatrix& rho, const TrivializationFamily& l, double t);

/// P_γ(t) = U_γ(t, t0) P0 U_γ(t0, t).
OperatorMatrix evolve_density_morphism(const OperatorMatrix& p0, const EvolutionTransport& u,
                                       double t0, double t);

/// Normalized fibre projector onto Ψ: l^{-1}|ψ⟩⟨ψ|l / ⟨ψ|ψ⟩ with ψ = lΨ.
OperatorMatrix pure_state_density(const FibreVector& psi, const TrivializationFamily& l, double t);

/// tr(l P l^{-1}).
Complex fibre_trace(const OperatorMatrix& p, const TrivializationFamily& l, double t);

/// tr(P A)/tr(P) for fibre-side P and A; equals tr(ρ𝒜)/tr(ρ) by similarity.
Complex density_mean_value(const OperatorMatrix& p, const OperatorMatrix& a_fibre);

/// Observable family t ↦ 𝒜(t) with its explicit time derivative.
///
/// Without an analytic derivative, ∂𝒜/∂t is taken by central differences
/// with `fd_step`; setting fd_step to 0 turns that off and makes a missing
/// derivative an error.
struct ObservableFamily {
  MatrixFunction eval;
  MatrixFunction time_derivative;
  bool time_independent = false;
  double fd_step = 1e-5;

  static ObservableFamily constant(OperatorMatrix a);

  OperatorMatrix at(double t) const { return eval(t); }
  OperatorMatrix derivative(double t) const;
};

struct IntegralOfMotionReport {
  /// max_t ‖iℏ∂𝒜/∂t + [𝒜, ℋ]‖.
  double conventional_residual = 0.0;
  double worst_time = 0.0;
  /// max_t ‖A_γ(t) − U_γ(t,t0) A_γ(t0) U_γ(t0,t)‖; only evaluated for
  /// time-independent observables.
  bool transported_evaluated = false;
  double transported_residual = 0.0;
  bool conventional_passes = false;
  bool transported_passes = false;
  /// False when both criteria were evaluated and disagree.
  bool criteria_agree = true;
  bool is_integral = false;
  /// max_t |⟨A⟩(t) − ⟨A⟩(t0)| over the random probe states.
  double max_mean_drift = 0.0;
  double tol = 0.0;
};

/// Evaluates the conventional criterion and, for time-independent 𝒜, the
/// transported-invariance criterion; the conventional one is authoritative.
/// The mean drift of 𝒜 along `probe_states` seeded random evolutions is
/// recorded alongside.
IntegralOfMotionReport is_integral_of_motion(const ObservableFamily& a,
                                             const HamiltonianFamily& h,
                                             const EvolutionTransport& u,
                                             const TrivializationFamily& l, double tol = 1e-6,
                                             const PhysicalConstants& constants = {},
                                             std::size_t probe_states = 10,
                                             std::uint64_t seed = 7);

}  // namespace fqm
