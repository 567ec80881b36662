#pragma once

// Bundle-side dynamics: evolution transport U_γ(t,s), bundle and
// matrix-bundle Hamiltonians, transport coefficients Γ, and the integrator
// for iℏ dΨ_γ/dt = H^m_γ(t)Ψ_γ(t).

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "fibreqm/bundle.hpp"
#include "fibreqm/dynamics.hpp"

namespace fqm {

/// U_γ(t,s) = l_γ(t)^{-1} 𝒰(t,s) l_γ(s), defined at grid-aligned times only.
class EvolutionTransport {
 public:
  EvolutionTransport(std::shared_ptr<const EvolutionOperator> evolution,
                     const TrivializationFamily& l);

  const TimeGrid& grid() const noexcept { return evolution_->grid(); }
  std::size_t dimension() const noexcept { return evolution_->dimension(); }
  const EvolutionOperator& evolution() const noexcept { return *evolution_; }

  /// U_γ(t_to, t_from) by grid index.
  OperatorMatrix between(std::size_t to, std::size_t from) const;
  /// U_γ(t, s); throws OffGrid for off-grid times.
  OperatorMatrix operator()(double t, double s) const;

  const OperatorMatrix& frame(std::size_t k) const { return frame_.at(k); }
  const OperatorMatrix& frame_inverse(std::size_t k) const { return frame_inverse_.at(k); }

 private:
  std::shared_ptr<const EvolutionOperator> evolution_;
  std::vector<OperatorMatrix> frame_;
  std::vector<OperatorMatrix> frame_inverse_;
  // left_[k] = l_k^{-1} F_k, right_[k] = B_k l_k.
  std::vector<OperatorMatrix> left_;
  std::vector<OperatorMatrix> right_;
};

EvolutionTransport build_transport(const HamiltonianFamily& h, const TrivializationFamily& l,
                                   const TimeGrid& grid, const PhysicalConstants& constants = {});

/// H_γ(t) = l^{-1} ℋ(t) l.
OperatorMatrix bundle_hamiltonian(const HamiltonianFamily& h, const TrivializationFamily& l,
                                  double t);

/// H^m_γ(t) = l^{-1} ℋ(t) l + iℏ (d l^{-1}/dt) l.
///
/// This is the matrix for which Ψ_γ = l^{-1}ψ solves the matrix-bundle
/// Schrödinger equation whenever ψ solves the conventional one. Throws
/// MissingDerivative when dl/dt is unavailable.
OperatorMatrix matrix_bundle_hamiltonian(const HamiltonianFamily& h,
                                         const TrivializationFamily& l, double t,
                                         const PhysicalConstants& constants = {});

enum class DerivativeTerm { Include, Omit };

/// H^m_γ sampled at grid nodes and at step midpoints, which is what the
/// exponential-midpoint integrator consumes.
struct MatrixBundleHamiltonian {
  TimeGrid grid;
  double hbar = 1.0;
  std::vector<OperatorMatrix> nodes;
  std::vector<OperatorMatrix> midpoints;

  /// Node value at a grid-aligned time.
  const OperatorMatrix& at(double t) const;
};

/// `DerivativeTerm::Omit` drops the iℏ(dl^{-1}/dt)l correction. It exists
/// only as a negative control for the equivalence checks.
MatrixBundleHamiltonian sample_matrix_bundle_hamiltonian(
    const HamiltonianFamily& h, const TrivializationFamily& l, const TimeGrid& grid,
    const PhysicalConstants& constants = {}, DerivativeTerm term = DerivativeTerm::Include);

/// Γ_γ(t) = −H^m_γ(t)/(iℏ).
OperatorMatrix transport_coefficients(const OperatorMatrix& hm, double hbar);
OperatorMatrix transport_coefficients(const MatrixBundleHamiltonian& hm, double t, double hbar);

/// Exponential-midpoint integration of the matrix-bundle Schrödinger
/// equation on the grid H^m was sampled on. Throws GridMismatch when
/// [t0, t1] and `step` do not reproduce that grid.
SectionAlongPath integrate_bundle_schrodinger(const MatrixBundleHamiltonian& hm,
                                              const FibreVector& psi0, double t0, double t1,
                                              double step);
SectionAlongPath integrate_bundle_schrodinger(const MatrixBundleHamiltonian& hm,
                                              const FibreVector& psi0);

/// U_γ(t,s)Ψ_s.
FibreVector transport_section(const EvolutionTransport& u, const FibreVector& psi_s, double s,
                              double t);

/// Grid-index triple (r, s, t) with r ≤ s ≤ t.
using GridTriple = std::array<std::size_t, 3>;

/// Every ordered triple r ≤ s ≤ t drawn from `indices`.
std::vector<GridTriple> all_triples(const std::vector<std::size_t>& indices);

struct TransportAxiomReport {
  double max_identity_deviation = 0.0;
  double max_composition_deviation = 0.0;
  GridTriple worst_triple{};
  std::size_t triples_checked = 0;
  double identity_tol = 0.0;
  double composition_tol = 0.0;
  bool passed = false;
};

/// ‖U_γ(t,t) − I‖ over every index in the sample and
/// ‖U_γ(t,s)U_γ(s,r) − U_γ(t,r)‖ over every triple.
TransportAxiomReport check_transport_axioms(const EvolutionTransport& u,
                                            const std::vector<GridTriple>& sample,
                                            double identity_tol, double composition_tol);
inline TransportAxiomReport check_transport_axioms(const EvolutionTransport& u,
                                                   const std::vector<GridTriple>& sample,
                                                   double tol) {
  return check_transport_axioms(u, sample, tol, tol);
}

}  // namespace fqm
