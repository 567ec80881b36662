#include "fibreqm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fibreqm/errors.hpp"

namespace fqm {

OperatorMatrix HamiltonianFamily::at(double t) const {
  if (!eval) fail(ErrorCode::EvaluationFailure, "Hamiltonian family has no evaluator");
  OperatorMatrix h = eval(t);
  const auto n = static_cast<Eigen::Index>(dimension);
  if (h.rows() != n || h.cols() != n) {
    fail(ErrorCode::EvaluationFailure,
         "Hamiltonian at t=" + std::to_string(t) + " has shape " +
             std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
             ", expected " + std::to_string(dimension));
  }
  if (!h.allFinite()) {
    fail(ErrorCode::EvaluationFailure,
         "Hamiltonian at t=" + std::to_string(t) + " is not finite");
  }
  return h;
}

OperatorMatrix step_propagator(const OperatorMatrix& h_mid, double dt, double hbar) {
  return matrix_exponential(OperatorMatrix((-kI * (dt / hbar)) * h_mid));
}

namespace {

OperatorMatrix inverse_step_propagator(const OperatorMatrix& h_mid, double dt,
                                       double hbar) {
  return matrix_exponential(OperatorMatrix((kI * (dt / hbar)) * h_mid));
}

}  // namespace

EvolutionOperator::EvolutionOperator(TimeGrid grid, std::vector<OperatorMatrix> steps,
                                     std::vector<OperatorMatrix> forward,
                                     std::vector<OperatorMatrix> backward)
    : grid_(grid),
      steps_(std::move(steps)),
      forward_(std::move(forward)),
      backward_(std::move(backward)) {
  if (forward_.size() != grid_.size() || backward_.size() != grid_.size() ||
      steps_.size() != grid_.size()) {
    fail(ErrorCode::GridMismatch, "evolution operator chains do not match the grid");
  }
  dimension_ = static_cast<std::size_t>(forward_.front().rows());
}

EvolutionOperator EvolutionOperator::build(const HamiltonianFamily& h,
                                           const TimeGrid& grid,
                                           const PhysicalConstants& constants) {
  constants.validate();
  const std::size_t n = h.dimension;
  const double dt = grid.spacing();
  std::vector<OperatorMatrix> steps(grid.size());
  std::vector<OperatorMatrix> forward(grid.size());
  std::vector<OperatorMatrix> backward(grid.size());
  steps[0] = identity(n);
  forward[0] = identity(n);
  backward[0] = identity(n);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const OperatorMatrix h_mid = h.at(grid.midpoint(k));
    steps[k + 1] = step_propagator(h_mid, dt, constants.hbar);
    forward[k + 1] = steps[k + 1] * forward[k];
    backward[k + 1] = backward[k] * inverse_step_propagator(h_mid, dt, constants.hbar);
  }
  return EvolutionOperator(grid, std::move(steps), std::move(forward), std::move(backward));
}

const OperatorMatrix& EvolutionOperator::step(std::size_t k) const {
  if (k == 0 || k >= steps_.size()) {
    fail(ErrorCode::OffGrid, "step index " + std::to_string(k) + " out of range");
  }
  return steps_[k];
}

const OperatorMatrix& EvolutionOperator::forward(std::size_t k) const {
  if (k >= forward_.size()) fail(ErrorCode::OffGrid, "grid index out of range");
  return forward_[k];
}

const OperatorMatrix& EvolutionOperator::backward(std::size_t k) const {
  if (k >= backward_.size()) fail(ErrorCode::OffGrid, "grid index out of range");
  return backward_[k];
}

OperatorMatrix EvolutionOperator::between(std::size_t to, std::size_t from) const {
  return forward(to) * backward(from);
}

OperatorMatrix EvolutionOperator::operator()(double t, double s) const {
  return between(grid_.index_of(t), grid_.index_of(s));
}

Trajectory evolve_state(const HamiltonianFamily& h, const StateVector& psi0,
                        const TimeGrid& grid, const PhysicalConstants& constants) {
  constants.validate();
  if (static_cast<std::size_t>(psi0.size()) != h.dimension) {
    fail(ErrorCode::DimensionMismatch, "evolve_state: initial state dimension " +
                                           std::to_string(psi0.size()) +
                                           " does not match Hamiltonian dimension " +
                                           std::to_string(h.dimension));
  }
  if (max_abs(psi0) == 0.0) fail(ErrorCode::ZeroState, "evolve_state: zero initial state");

  Trajectory out{grid, {}};
  out.states.reserve(grid.size());
  out.states.push_back(psi0);
  const double dt = grid.spacing();
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const OperatorMatrix u = step_propagator(h.at(grid.midpoint(k)), dt, constants.hbar);
    out.states.push_back(u * out.states.back());
  }
  return out;
}

Trajectory evolve_state(const HamiltonianFamily& h, const StateVector& psi0, double t0,
                        double t1, double step, const PhysicalConstants& constants) {
  return evolve_state(h, psi0, TimeGrid::from_step(t0, t1, step), constants);
}

OperatorMatrix evolution_operator(const HamiltonianFamily& h, double s, double t,
                                  double step, const PhysicalConstants& constants) {
  constants.validate();
  if (!(step > 0.0) || !std::isfinite(step)) {
    fail(ErrorCode::InvalidArgument, "evolution_operator: step must be positive");
  }
  if (s == t) return identity(h.dimension);
  const TimeGrid grid = TimeGrid::from_step(std::min(s, t), std::max(s, t), step);
  const double dt = grid.spacing();
  OperatorMatrix product = identity(h.dimension);
  if (t > s) {
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      product = step_propagator(h.at(grid.midpoint(k)), dt, constants.hbar) * product;
    }
  } else {
    // 𝒰(t, s) with t < s: undo the steps from t to s.
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      product = product * inverse_step_propagator(h.at(grid.midpoint(k)), dt, constants.hbar);
    }
  }
  return product;
}

void validate_density(const OperatorMatrix& rho, double tol) {
  require_square(rho, "density");
  if (!rho.allFinite()) fail(ErrorCode::InvalidArgument, "density has non-finite entries");
  if (!is_hermitian(rho, tol)) fail(ErrorCode::InvalidArgument, "density is not Hermitian");
  const Complex trace = rho.trace();
  if (std::abs(trace - Complex(1.0, 0.0)) > tol) {
    fail(ErrorCode::InvalidArgument,
         "density trace " + std::to_string(trace.real()) + " is not 1");
  }
  const OperatorMatrix hermitian_part = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(hermitian_part,
                                                       Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -tol) {
    fail(ErrorCode::InvalidArgument, "density is not positive semidefinite");
  }
}

DensityTrajectory evolve_density(const EvolutionOperator& u, const OperatorMatrix& rho0) {
  if (static_cast<std::size_t>(rho0.rows()) != u.dimension() ||
      static_cast<std::size_t>(rho0.cols()) != u.dimension()) {
    fail(ErrorCode::DimensionMismatch, "evolve_density: density dimension mismatch");
  }
  validate_density(rho0, 1e-10);
  DensityTrajectory out{u.grid(), {}};
  out.densities.reserve(u.grid().size());
  for (std::size_t k = 0; k < u.grid().size(); ++k) {
    out.densities.push_back(u.forward(k) * rho0 * u.backward(k));
  }
  return out;
}

DensityTrajectory evolve_density(const HamiltonianFamily& h, const OperatorMatrix& rho0,
                                 double t0, double t1, double step,
                                 const PhysicalConstants& constants) {
  const auto u = EvolutionOperator::build(h, TimeGrid::from_step(t0, t1, step), constants);
  return evolve_density(u, rho0);
}

Complex mean_value(const OperatorMatrix& a, const StateVector& psi) {
  require_same_dimension(a, psi, "mean_value");
  const Complex norm = inner_product(psi, psi);
  if (norm.real() == 0.0) fail(ErrorCode::ZeroState, "mean_value: zero state");
  return inner_product(psi, a * psi) / norm;
}

Complex mean_value_density(const OperatorMatrix& a, const OperatorMatrix& rho) {
  require_same_dimension(a, rho, "mean_value_density");
  const Complex trace = rho.trace();
  if (trace == Complex(0.0, 0.0)) fail(ErrorCode::ZeroState, "mean_value_density: zero trace");
  return (rho * a).trace() / trace;
}

double norm_drift(const Trajectory& trajectory) {
  if (trajectory.states.empty()) return 0.0;
  const double reference = trajectory.states.front().squaredNorm();
  double drift = 0.0;
  for (const auto& psi : trajectory.states) {
    drift = std::max(drift, std::abs(psi.squaredNorm() - reference));
  }
  return drift;
}

}  // namespace fqm
