#include "fibreqm/pictures.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fibreqm/errors.hpp"
#include "fibreqm/random.hpp"

namespace fqm {

namespace {

Complex mean_in_frame(const OperatorMatrix& frame, const OperatorMatrix& a_fibre,
                      const FibreVector& psi) {
  const StateVector lowered = frame * psi;
  const Complex norm = inner_product(lowered, lowered);
  if (norm.real() == 0.0) fail(ErrorCode::ZeroState, "mean value of a zero section");
  return inner_product(lowered, StateVector(frame * StateVector(a_fibre * psi))) / norm;
}

}  // namespace

Complex bundle_mean_value(const TrivializationFamily& l, double t, const OperatorMatrix& a_fibre,
                          const FibreVector& psi) {
  (void)l.inverse_at(t);
  const OperatorMatrix frame = l.at(t);
  require_same_dimension(a_fibre, psi, "bundle_mean_value");
  require_same_dimension(frame, psi, "bundle_mean_value");
  return mean_in_frame(frame, a_fibre, psi);
}

Complex bundle_mean_value(const MorphismAlongPath& a, const SectionAlongPath& psi,
                          const TrivializationFamily& l, double t) {
  require_same_grid(a.grid, psi.grid, "bundle_mean_value");
  const std::size_t k = a.grid.index_of(t);
  return bundle_mean_value(l, t, a[k], psi[k]);
}

FibreVector to_heisenberg_state(const SectionAlongPath& psi, const EvolutionTransport& u,
                                double t0, double t) {
  require_same_grid(psi.grid, u.grid(), "to_heisenberg_state");
  const std::size_t k0 = u.grid().index_of(t0);
  const std::size_t k = u.grid().index_of(t);
  return u.between(k0, k) * psi[k];
}

OperatorMatrix to_heisenberg_observable(const MorphismAlongPath& a, const EvolutionTransport& u,
                                        double t0, double t) {
  require_same_grid(a.grid, u.grid(), "to_heisenberg_observable");
  const std::size_t k0 = u.grid().index_of(t0);
  const std::size_t k = u.grid().index_of(t);
  return u.between(k0, k) * a[k] * u.between(k, k0);
}

PictureTransform::PictureTransform(TimeGrid grid, std::size_t reference,
                                   std::vector<OperatorMatrix> forward, bool unitary)
    : grid_(grid), reference_(reference), unitary_(unitary), forward_(std::move(forward)) {
  if (forward_.size() != grid_.size()) {
    fail(ErrorCode::GridMismatch, "picture transform needs one operator per grid node");
  }
  if (reference_ >= grid_.size()) fail(ErrorCode::OffGrid, "reference index out of range");
  const auto n = forward_.front().rows();
  if (max_abs_diff(forward_[reference_], OperatorMatrix::Identity(n, n)) > 1e-12) {
    fail(ErrorCode::InvalidArgument, "picture transform must be the identity at t0");
  }
  inverse_.reserve(forward_.size());
  for (const auto& v : forward_) inverse_.push_back(checked_inverse(v, kDefaultInverseTolerance));
}

PictureTransform PictureTransform::identity(const TimeGrid& grid, std::size_t reference,
                                            std::size_t n) {
  return PictureTransform(grid, reference, std::vector<OperatorMatrix>(grid.size(), fqm::identity(n)),
                          true);
}

PictureTransform PictureTransform::from_transport(const EvolutionTransport& u, double t0) {
  PictureTransform v;
  v.grid_ = u.grid();
  v.reference_ = u.grid().index_of(t0);
  v.unitary_ = true;
  v.forward_.reserve(v.grid_.size());
  v.inverse_.reserve(v.grid_.size());
  for (std::size_t k = 0; k < v.grid_.size(); ++k) {
    v.forward_.push_back(u.between(k, v.reference_));
    v.inverse_.push_back(u.between(v.reference_, k));
  }
  return v;
}

PictureTransform PictureTransform::from_typical_fibre(const TrivializationFamily& l,
                                                      const TimeGrid& grid, double t0,
                                                      const MatrixFunction& w, bool unitary) {
  const std::size_t k0 = grid.index_of(t0);
  const OperatorMatrix w0_inv = checked_inverse(w(grid.time(k0)), kDefaultInverseTolerance);
  const OperatorMatrix l0 = l.at(grid.time(k0));
  std::vector<OperatorMatrix> forward;
  forward.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    forward.push_back(l.inverse_at(t) * w(t) * w0_inv * l0);
  }
  // Rounding in l^{-1} l at t0 is far below the identity check threshold.
  return PictureTransform(grid, k0, std::move(forward), unitary);
}

FibreVector to_general_picture(const SectionAlongPath& psi, const PictureTransform& v, double t) {
  require_same_grid(psi.grid, v.grid(), "to_general_picture");
  const std::size_t k = v.grid().index_of(t);
  return v.inverse(k) * psi[k];
}

OperatorMatrix to_general_picture(const MorphismAlongPath& a, const PictureTransform& v, double t) {
  require_same_grid(a.grid, v.grid(), "to_general_picture");
  const std::size_t k = v.grid().index_of(t);
  return v.inverse(k) * a[k] * v.forward(k);
}

OperatorMatrix density_morphism(const OperatorMatrix& rho, const TrivializationFamily& l,
                                double t) {
  return lift_operator(l, t, rho);
}

OperatorMatrix evolve_density_morphism(const OperatorMatrix& p0, const EvolutionTransport& u,
                                       double t0, double t) {
  const std::size_t k0 = u.grid().index_of(t0);
  const std::size_t k = u.grid().index_of(t);
  require_same_dimension(p0, u.frame(0), "evolve_density_morphism");
  return u.between(k, k0) * p0 * u.between(k0, k);
}

OperatorMatrix pure_state_density(const FibreVector& psi, const TrivializationFamily& l, double t) {
  const OperatorMatrix frame = l.at(t);
  const OperatorMatrix inv = l.inverse_at(t);
  require_same_dimension(frame, psi, "pure_state_density");
  const StateVector lowered = frame * psi;
  const double norm = lowered.squaredNorm();
  if (norm == 0.0) fail(ErrorCode::ZeroState, "pure_state_density: zero vector");
  return inv * (outer(lowered, lowered) / norm) * frame;
}

Complex fibre_trace(const OperatorMatrix& p, const TrivializationFamily& l, double t) {
  return lower_operator(l, t, p).trace();
}

Complex density_mean_value(const OperatorMatrix& p, const OperatorMatrix& a_fibre) {
  return mean_value_density(a_fibre, p);
}

ObservableFamily ObservableFamily::constant(OperatorMatrix a) {
  ObservableFamily f;
  const auto n = a.rows();
  f.eval = [a = std::move(a)](double) { return a; };
  f.time_derivative = [n](double) { return OperatorMatrix(OperatorMatrix::Zero(n, n)); };
  f.time_independent = true;
  return f;
}

OperatorMatrix ObservableFamily::derivative(double t) const {
  if (time_derivative) return time_derivative(t);
  if (!(fd_step > 0.0)) {
    fail(ErrorCode::MissingDerivative, "observable has no explicit time derivative");
  }
  return (eval(t + fd_step) - eval(t - fd_step)) / (2.0 * fd_step);
}

IntegralOfMotionReport is_integral_of_motion(const ObservableFamily& a,
                                             const HamiltonianFamily& h,
                                             const EvolutionTransport& u,
                                             const TrivializationFamily& l, double tol,
                                             const PhysicalConstants& constants,
                                             std::size_t probe_states, std::uint64_t seed) {
  constants.validate();
  if (!a.eval) fail(ErrorCode::InvalidArgument, "observable has no evaluator");
  if (l.dimension() != u.dimension()) {
    fail(ErrorCode::DimensionMismatch, "trivialization and transport dimensions differ");
  }
  IntegralOfMotionReport report;
  report.tol = tol;
  const TimeGrid& grid = u.grid();

  std::vector<OperatorMatrix> lifted;
  lifted.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    const OperatorMatrix observable = a.at(t);
    const OperatorMatrix residual =
        (kI * constants.hbar) * a.derivative(t) + commutator(observable, h.at(t));
    const double r = max_abs(residual);
    if (r > report.conventional_residual) {
      report.conventional_residual = r;
      report.worst_time = t;
    }
    lifted.push_back(u.frame_inverse(k) * observable * u.frame(k));
  }
  report.conventional_passes = report.conventional_residual <= tol;

  if (a.time_independent) {
    report.transported_evaluated = true;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const OperatorMatrix transported = u.between(k, 0) * lifted[0] * u.between(0, k);
      report.transported_residual =
          std::max(report.transported_residual, max_abs_diff(lifted[k], transported));
    }
    report.transported_passes = report.transported_residual <= tol;
    report.criteria_agree = report.transported_passes == report.conventional_passes;
  }
  report.is_integral = report.conventional_passes &&
                       (!report.transported_evaluated || report.transported_passes);

  Rng rng(seed);
  for (std::size_t p = 0; p < probe_states; ++p) {
    const FibreVector psi0 = random_state(u.dimension(), rng);
    const Complex initial = mean_in_frame(u.frame(0), lifted[0], psi0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
      const FibreVector psi = u.between(k, 0) * psi0;
      report.max_mean_drift =
          std::max(report.max_mean_drift, std::abs(mean_in_frame(u.frame(k), lifted[k], psi) - initial));
    }
  }
  return report;
}

}  // namespace fqm
