#include "fibreqm/transport.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>

#include "fibreqm/errors.hpp"

namespace fqm {

EvolutionTransport::EvolutionTransport(std::shared_ptr<const EvolutionOperator> evolution,
                                       const TrivializationFamily& l)
    : evolution_(std::move(evolution)) {
  if (!evolution_) fail(ErrorCode::InvalidArgument, "transport needs an evolution operator");
  if (l.dimension() != evolution_->dimension()) {
    fail(ErrorCode::DimensionMismatch, "trivialization and Hamiltonian dimensions differ");
  }
  const TimeGrid& g = evolution_->grid();
  frame_.reserve(g.size());
  frame_inverse_.reserve(g.size());
  left_.reserve(g.size());
  right_.reserve(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    frame_.push_back(l.at(t));
    frame_inverse_.push_back(l.inverse_at(t));
    left_.push_back(frame_inverse_.back() * evolution_->forward(k));
    right_.push_back(evolution_->backward(k) * frame_.back());
  }
}

OperatorMatrix EvolutionTransport::between(std::size_t to, std::size_t from) const {
  if (to >= left_.size() || from >= right_.size()) {
    fail(ErrorCode::OffGrid, "transport index out of range");
  }
  return left_[to] * right_[from];
}

OperatorMatrix EvolutionTransport::operator()(double t, double s) const {
  return between(grid().index_of(t), grid().index_of(s));
}

EvolutionTransport build_transport(const HamiltonianFamily& h, const TrivializationFamily& l,
                                   const TimeGrid& grid, const PhysicalConstants& constants) {
  auto evolution =
      std::make_shared<const EvolutionOperator>(EvolutionOperator::build(h, grid, constants));
  return EvolutionTransport(std::move(evolution), l);
}

OperatorMatrix bundle_hamiltonian(const HamiltonianFamily& h, const TrivializationFamily& l,
                                  double t) {
  return lift_operator(l, t, h.at(t));
}

OperatorMatrix matrix_bundle_hamiltonian(const HamiltonianFamily& h,
                                         const TrivializationFamily& l, double t,
                                         const PhysicalConstants& constants) {
  constants.validate();
  const OperatorMatrix m = l.at(t);
  const OperatorMatrix inv = l.inverse_at(t);
  const OperatorMatrix hamiltonian = h.at(t);
  require_same_dimension(m, hamiltonian, "matrix_bundle_hamiltonian");
  const OperatorMatrix inverse_rate = -inv * l.derivative(t) * inv;
  return inv * hamiltonian * m + (kI * constants.hbar) * (inverse_rate * m);
}

namespace {

OperatorMatrix sample_one(const HamiltonianFamily& h, const TrivializationFamily& l, double t,
                          const PhysicalConstants& constants, DerivativeTerm term) {
  if (term == DerivativeTerm::Include) return matrix_bundle_hamiltonian(h, l, t, constants);
  return bundle_hamiltonian(h, l, t);
}

}  // namespace

const OperatorMatrix& MatrixBundleHamiltonian::at(double t) const {
  return nodes.at(grid.index_of(t));
}

MatrixBundleHamiltonian sample_matrix_bundle_hamiltonian(const HamiltonianFamily& h,
                                                         const TrivializationFamily& l,
                                                         const TimeGrid& grid,
                                                         const PhysicalConstants& constants,
                                                         DerivativeTerm term) {
  constants.validate();
  MatrixBundleHamiltonian out{grid, constants.hbar, {}, {}};
  out.nodes.reserve(grid.size());
  out.midpoints.reserve(grid.steps());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.nodes.push_back(sample_one(h, l, grid.time(k), constants, term));
  }
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    out.midpoints.push_back(sample_one(h, l, grid.midpoint(k), constants, term));
  }
  return out;
}

OperatorMatrix transport_coefficients(const OperatorMatrix& hm, double hbar) {
  if (!(hbar > 0.0)) fail(ErrorCode::InvalidArgument, "hbar must be positive");
  return -hm / (kI * hbar);
}

OperatorMatrix transport_coefficients(const MatrixBundleHamiltonian& hm, double t, double hbar) {
  return transport_coefficients(hm.at(t), hbar);
}

SectionAlongPath integrate_bundle_schrodinger(const MatrixBundleHamiltonian& hm,
                                              const FibreVector& psi0) {
  if (hm.midpoints.size() != hm.grid.steps() || hm.nodes.size() != hm.grid.size()) {
    fail(ErrorCode::GridMismatch, "matrix-bundle Hamiltonian samples do not match its grid");
  }
  if (max_abs(psi0) == 0.0) fail(ErrorCode::ZeroState, "bundle integration from a zero section");
  SectionAlongPath out{hm.grid, {}};
  out.values.reserve(hm.grid.size());
  out.values.push_back(psi0);
  const double dt = hm.grid.spacing();
  for (std::size_t k = 0; k < hm.grid.steps(); ++k) {
    require_same_dimension(hm.midpoints[k], psi0, "integrate_bundle_schrodinger");
    const OperatorMatrix u = step_propagator(hm.midpoints[k], dt, hm.hbar);
    out.values.push_back(u * out.values.back());
  }
  return out;
}

SectionAlongPath integrate_bundle_schrodinger(const MatrixBundleHamiltonian& hm,
                                              const FibreVector& psi0, double t0, double t1,
                                              double step) {
  require_same_grid(TimeGrid::from_step(t0, t1, step), hm.grid, "integrate_bundle_schrodinger");
  return integrate_bundle_schrodinger(hm, psi0);
}

FibreVector transport_section(const EvolutionTransport& u, const FibreVector& psi_s, double s,
                              double t) {
  const OperatorMatrix m = u(t, s);
  require_same_dimension(m, psi_s, "transport_section");
  return m * psi_s;
}

std::vector<GridTriple> all_triples(const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<GridTriple> out;
  for (std::size_t a = 0; a < sorted.size(); ++a) {
    for (std::size_t b = a; b < sorted.size(); ++b) {
      for (std::size_t c = b; c < sorted.size(); ++c) {
        out.push_back({sorted[a], sorted[b], sorted[c]});
      }
    }
  }
  return out;
}

TransportAxiomReport check_transport_axioms(const EvolutionTransport& u,
                                            const std::vector<GridTriple>& sample,
                                            double identity_tol, double composition_tol) {
  TransportAxiomReport report;
  report.identity_tol = identity_tol;
  report.composition_tol = composition_tol;

  std::map<std::pair<std::size_t, std::size_t>, OperatorMatrix> cache;
  auto transport = [&](std::size_t to, std::size_t from) -> const OperatorMatrix& {
    auto [it, inserted] = cache.try_emplace({to, from});
    if (inserted) it->second = u.between(to, from);
    return it->second;
  };

  const OperatorMatrix id = identity(u.dimension());
  std::vector<std::size_t> seen;
  for (const auto& [r, s, t] : sample) {
    seen.insert(seen.end(), {r, s, t});
    const double dev = max_abs_diff(OperatorMatrix(transport(t, s) * transport(s, r)),
                                    transport(t, r));
    if (report.triples_checked == 0 || dev > report.max_composition_deviation) {
      report.max_composition_deviation = dev;
      report.worst_triple = {r, s, t};
    }
    ++report.triples_checked;
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  for (std::size_t k : seen) {
    report.max_identity_deviation =
        std::max(report.max_identity_deviation, max_abs_diff(u.between(k, k), id));
  }
  report.passed = report.max_identity_deviation <= identity_tol &&
                  report.max_composition_deviation <= composition_tol;
  return report;
}

}  // namespace fqm
