#pragma once

// Conventional Hilbert-space dynamics. This layer is the reference oracle the
// bundle pipeline is differentially checked against.

#include <cstddef>
#include <functional>
#include <vector>

#include "fibreqm/grid.hpp"
#include "fibreqm/hilbert.hpp"

namespace fqm {

/// t ↦ ℋ(t). `hermitian_expected` only controls which checks are meaningful;
/// non-Hermitian families are integrated the same way.
struct HamiltonianFamily {
  std::function<OperatorMatrix(double)> eval;
  std::size_t dimension = 0;
  bool hermitian_expected = true;

  /// Evaluates and validates shape/finiteness. Throws EvaluationFailure.
  OperatorMatrix at(double t) const;
};

struct Trajectory {
  TimeGrid grid;
  std::vector<StateVector> states;
};

struct DensityTrajectory {
  TimeGrid grid;
  std::vector<OperatorMatrix> densities;
};

/// exp(−i·dt·H/ℏ), the exponential-midpoint step when H = ℋ(t + dt/2).
OperatorMatrix step_propagator(const OperatorMatrix& h_mid, double dt, double hbar);

/// Ordered products of step propagators on one grid.
///
/// 𝒰(t_j, t_i) is assembled from cumulative products F_j = 𝒰(t_j, t_0) and
/// B_i = 𝒰(t_0, t_i); the backward chain is built from exp(+i·dt·H/ℏ) steps
/// rather than by inverting F, so non-Hermitian families are handled too.
class EvolutionOperator {
 public:
  static EvolutionOperator build(const HamiltonianFamily& h, const TimeGrid& grid,
                                 const PhysicalConstants& constants);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dimension() const noexcept { return dimension_; }

  /// 𝒰(t_k, t_{k-1}) for k ≥ 1.
  const OperatorMatrix& step(std::size_t k) const;
  /// 𝒰(t_k, t_0).
  const OperatorMatrix& forward(std::size_t k) const;
  /// 𝒰(t_0, t_k).
  const OperatorMatrix& backward(std::size_t k) const;

  /// 𝒰(t_to, t_from) by grid index.
  OperatorMatrix between(std::size_t to, std::size_t from) const;
  /// 𝒰(t, s) for grid-aligned times; throws OffGrid otherwise.
  OperatorMatrix operator()(double t, double s) const;

  /// Assembles an operator from externally supplied chains, one entry per
  /// grid node; steps[0] is a placeholder. Used by tests that need to corrupt
  /// a propagator on purpose.
  EvolutionOperator(TimeGrid grid, std::vector<OperatorMatrix> steps,
                    std::vector<OperatorMatrix> forward,
                    std::vector<OperatorMatrix> backward);

 private:
  TimeGrid grid_;
  std::size_t dimension_ = 0;
  std::vector<OperatorMatrix> steps_;
  std::vector<OperatorMatrix> forward_;
  std::vector<OperatorMatrix> backward_;
};

/// Integrates iℏ dψ/dt = ℋ(t)ψ with ψ(t+h) = exp(−i·h·ℋ(t+h/2)/ℏ)ψ(t).
/// No renormalization is applied.
Trajectory evolve_state(const HamiltonianFamily& h, const StateVector& psi0,
                        double t0, double t1, double step,
                        const PhysicalConstants& constants = {});
Trajectory evolve_state(const HamiltonianFamily& h, const StateVector& psi0,
                        const TimeGrid& grid, const PhysicalConstants& constants = {});

/// 𝒰(t, s) as the ordered product of step propagators on a grid over
/// [min(s,t), max(s,t)] with spacing ≤ step. 𝒰(s, s) = I.
OperatorMatrix evolution_operator(const HamiltonianFamily& h, double s, double t,
                                  double step, const PhysicalConstants& constants = {});

/// Throws InvalidArgument unless ρ is Hermitian, positive semidefinite and of
/// unit trace, all to `tol`.
void validate_density(const OperatorMatrix& rho, double tol);

/// ρ(t) = 𝒰(t,t0)·ρ0·𝒰(t0,t) on the grid.
DensityTrajectory evolve_density(const HamiltonianFamily& h, const OperatorMatrix& rho0,
                                 double t0, double t1, double step,
                                 const PhysicalConstants& constants = {});
DensityTrajectory evolve_density(const EvolutionOperator& u, const OperatorMatrix& rho0);

/// ⟨ψ|Aψ⟩/⟨ψ|ψ⟩. Throws ZeroState for ψ = 0.
Complex mean_value(const OperatorMatrix& a, const StateVector& psi);

/// tr(ρA)/tr(ρ). Throws ZeroState when tr(ρ) = 0.
Complex mean_value_density(const OperatorMatrix& a, const OperatorMatrix& rho);

/// max_t |‖ψ(t)‖² − ‖ψ(t0)‖²|.
double norm_drift(const Trajectory& trajectory);

}  // namespace fqm
