#include "fibreqm/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "fibreqm/catalog.hpp"
#include "fibreqm/errors.hpp"
#include "fibreqm/random.hpp"
#include "fibreqm/transport.hpp"

namespace fqm {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Running maximum that remembers where it happened.
struct Worst {
  double value = 0.0;
  std::optional<double> time;

  void update(double v, double t) {
    if (std::isnan(value)) return;  // NaN sticks
    if (!time || std::isnan(v) || v > value) {
      value = v;
      time = t;
    }
  }
};

/// Everything the checks share. Built once per scenario and read-only after.
struct Context {
  const ScenarioConfig& cfg;
  PhysicalConstants constants;
  TimeGrid grid;
  Path path;
  HamiltonianFamily h;
  TrivializationFamily l;
  std::vector<ObservableFamily> observables;
  std::shared_ptr<const EvolutionOperator> evolution;
  std::unique_ptr<EvolutionTransport> transport;
  Trajectory oracle;
  SectionAlongPath lifted_oracle;
  MatrixBundleHamiltonian hm;
  SectionAlongPath bundle;
  /// U_γ(t, t0)Ψ_γ(t0).
  SectionAlongPath transported;

  explicit Context(const ScenarioConfig& c)
      : cfg(c), constants{c.hbar}, grid(c.grid()), path(build_path(c)), h(build_hamiltonian(c)),
        l(build_trivialization(c, path)) {
    for (const auto& spec : cfg.observables) observables.push_back(build_observable(cfg, spec));
    evolution = std::make_shared<const EvolutionOperator>(EvolutionOperator::build(h, grid, constants));
    transport = std::make_unique<EvolutionTransport>(evolution, l);
    oracle = evolve_state(h, cfg.initial_state, grid, constants);
    lifted_oracle = {grid, {}};
    lifted_oracle.values.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      lifted_oracle.values.push_back(transport->frame_inverse(k) * oracle.states[k]);
    }
    const DerivativeTerm term =
        cfg.fault == "omit_derivative_term" ? DerivativeTerm::Omit : DerivativeTerm::Include;
    hm = sample_matrix_bundle_hamiltonian(h, l, grid, constants, term);
    bundle = integrate_bundle_schrodinger(hm, lifted_oracle[0]);
    transported = {grid, {}};
    transported.values.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      transported.values.push_back(transport->between(k, 0) * lifted_oracle[0]);
    }
  }

  const EvolutionTransport& u() const { return *transport; }
  std::size_t n() const { return cfg.dimension; }
  std::uint64_t seed(const char* tag) const { return derive_seed(cfg.seed, tag); }

  /// Observable matrices at node k, in config order.
  OperatorMatrix observable(std::size_t i, std::size_t k) const {
    return observables[i].at(grid.time(k));
  }
  OperatorMatrix lifted_observable(std::size_t i, std::size_t k) const {
    return u().frame_inverse(k) * observable(i, k) * u().frame(k);
  }
};

double fibre_norm(const Context& c, std::size_t k, const FibreVector& v) {
  return StateVector(c.u().frame(k) * v).norm();
}

// ---------------------------------------------------------------------------

CheckRecord check_state_equivalence(const Context& c) {
  Worst integrator;
  Worst propagator;
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const double t = c.grid.time(k);
    integrator.update(max_abs_diff(c.bundle[k], c.lifted_oracle[k]), t);
    const StateVector lifted_propagated =
        c.u().frame_inverse(k) * StateVector(c.evolution->between(k, 0) * c.oracle.states[0]);
    propagator.update(max_abs_diff(c.transported[k], lifted_propagated), t);
  }
  Worst gamma;
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const OperatorMatrix g = transport_coefficients(c.hm.nodes[k], c.cfg.hbar);
    const OperatorMatrix back = (kI * c.cfg.hbar) * g + c.hm.nodes[k];
    gamma.update(max_abs(back) / std::max(1.0, max_abs(c.hm.nodes[k])), c.grid.time(k));
  }
  const double tol = c.cfg.tolerances.eq_tol;
  return make_record(
      "state_equivalence",
      {at_most("bundle_vs_lifted_oracle", integrator.value, tol, integrator.time,
               c.cfg.fault.empty() ? "" : "fault injected: " + c.cfg.fault),
       at_most("transport_vs_lifted_propagator", propagator.value, tol, propagator.time),
       at_most("gamma_hm_consistency", gamma.value, c.cfg.tolerances.fp_tol, gamma.time)});
}

CheckRecord check_transport_axioms(const Context& c) {
  const auto sample = c.grid.strided_indices(c.cfg.sampling.transport_points);
  const auto triples = all_triples(sample);
  const Tolerances& tol = c.cfg.tolerances;
  const TransportAxiomReport axioms =
      check_transport_axioms(c.u(), triples, tol.identity_tol, tol.composition_tol);

  // Identity over every node, and composition through every node to the end.
  const OperatorMatrix id = identity(c.n());
  const std::size_t last = c.grid.steps();
  const OperatorMatrix end_from_start = c.u().between(last, 0);
  Worst identity_all;
  Worst composition_all;
  Worst integrator;
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const double t = c.grid.time(k);
    identity_all.update(max_abs_diff(c.u().between(k, k), id), t);
    composition_all.update(
        max_abs_diff(OperatorMatrix(c.u().between(last, k) * c.u().between(k, 0)), end_from_start), t);
    integrator.update(max_abs_diff(c.transported[k], c.bundle[k]), t);
  }
  const auto [r, s, t] = axioms.worst_triple;
  std::ostringstream detail;
  detail << axioms.triples_checked << " triples over " << sample.size() << " nodes; worst (r,s,t)=("
         << c.grid.time(r) << "," << c.grid.time(s) << "," << c.grid.time(t) << ")";
  return make_record(
      "transport_axioms",
      {at_most("identity_sampled", axioms.max_identity_deviation, tol.identity_tol),
       at_most("composition_triples", axioms.max_composition_deviation, tol.composition_tol,
               c.grid.time(s), detail.str()),
       at_most("identity_all_nodes", identity_all.value, tol.identity_tol, identity_all.time),
       at_most("composition_all_nodes", composition_all.value, tol.composition_tol,
               composition_all.time),
       at_most("transport_vs_integrator", integrator.value, tol.eq_tol, integrator.time)});
}

/// Observables for the mean-value and picture checks: the configured ones,
/// or a seeded random Hermitian one when the config lists none.
std::vector<MatrixFunction> observable_functions(const Context& c) {
  std::vector<MatrixFunction> out;
  for (const auto& o : c.observables) out.push_back(o.eval);
  if (out.empty()) {
    Rng rng(c.seed("default-observable"));
    const OperatorMatrix a = random_hermitian(c.n(), rng);
    out.push_back([a](double) { return a; });
  }
  return out;
}

CheckRecord check_mean_value_invariance(const Context& c) {
  const auto obs = observable_functions(c);
  Worst bridge;
  Worst scaled;
  Worst transported;
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const double t = c.grid.time(k);
    for (const auto& a_of_t : obs) {
      const OperatorMatrix a = a_of_t(t);
      const OperatorMatrix lifted = c.u().frame_inverse(k) * a * c.u().frame(k);
      const Complex conventional = mean_value(a, c.oracle.states[k]);
      const Complex bundle = bundle_mean_value(c.l, t, lifted, c.lifted_oracle[k]);
      bridge.update(std::abs(bundle - conventional), t);
      const FibreVector rescaled = Complex(0.0, 3.0) * c.lifted_oracle[k];
      scaled.update(std::abs(bundle_mean_value(c.l, t, lifted, rescaled) - bundle), t);
      transported.update(std::abs(bundle_mean_value(c.l, t, lifted, c.transported[k]) - conventional), t);
    }
  }
  const Tolerances& tol = c.cfg.tolerances;
  return make_record("mean_value_invariance",
                     {at_most("lifted_bridge", bridge.value, tol.alg_tol, bridge.time),
                      at_most("scale_invariance", scaled.value, tol.alg_tol, scaled.time),
                      at_most("transported_section", transported.value, tol.eq_tol, transported.time)},
                     c.observables.empty() ? "no observables configured; used a seeded random one" : "");
}

CheckRecord check_hermiticity(const Context& c) {
  const Tolerances& tol = c.cfg.tolerances;
  const auto nodes = c.grid.strided_indices(c.cfg.sampling.pair_points);
  Worst adjoint_lift;
  Worst fixed_point;
  Worst hamiltonian;
  double negative = std::numeric_limits<double>::infinity();
  Rng rng(c.seed("hermiticity"));
  const OperatorMatrix non_hermitian = random_matrix(c.n(), rng);
  bool any_hermitian_observable = false;
  for (std::size_t k : nodes) {
    const double t = c.grid.time(k);
    for (std::size_t i = 0; i < c.observables.size(); ++i) {
      const OperatorMatrix a = c.observable(i, k);
      const OperatorMatrix lifted = lift_operator(c.l, t, a);
      const OperatorMatrix dagger = bundle_adjoint_morphism(c.l, t, lifted);
      adjoint_lift.update(max_abs_diff(dagger, lift_operator(c.l, t, adjoint(a))), t);
      if (is_hermitian(a, 1e-12)) {
        any_hermitian_observable = true;
        fixed_point.update(max_abs_diff(dagger, lifted), t);
      }
    }
    const OperatorMatrix hb = bundle_hamiltonian(c.h, c.l, t);
    hamiltonian.update(max_abs_diff(bundle_adjoint_morphism(c.l, t, hb), hb), t);
    const OperatorMatrix lifted_bad = lift_operator(c.l, t, non_hermitian);
    negative = std::min(negative, max_abs_diff(bundle_adjoint_morphism(c.l, t, lifted_bad), lifted_bad));
  }
  std::vector<CheckComponent> comps;
  if (!c.observables.empty()) {
    comps.push_back(at_most("adjoint_of_lift", adjoint_lift.value, tol.alg_tol, adjoint_lift.time));
  }
  if (any_hermitian_observable) {
    comps.push_back(at_most("hermitian_observables_fixed", fixed_point.value, tol.alg_tol, fixed_point.time));
  }
  if (c.h.hermitian_expected) {
    comps.push_back(at_most("bundle_hamiltonian_hermitian", hamiltonian.value, tol.alg_tol, hamiltonian.time));
  } else {
    // ℋ not Hermitian, so H_γ must not be a Hermitian morphism either.
    comps.push_back(at_least("bundle_hamiltonian_not_hermitian", hamiltonian.value, tol.alg_tol,
                             hamiltonian.time, "negative control"));
  }
  comps.push_back(at_least("non_hermitian_control", negative, tol.alg_tol, std::nullopt,
                           "minimum ‖A‡ − A‖ for a seeded non-Hermitian observable"));
  return make_record("hermiticity_correspondence", std::move(comps));
}

CheckRecord check_unitarity(const Context& c) {
  if (!c.h.hermitian_expected) {
    return skipped_record("unitarity", "Hamiltonian is not Hermitian; transport is not a unitary bundle map");
  }
  const Tolerances& tol = c.cfg.tolerances;
  const auto nodes = c.grid.strided_indices(c.cfg.sampling.pair_points);
  Worst adjoint_inverse;
  for (std::size_t a : nodes) {
    for (std::size_t b : nodes) {
      // U_γ(t_b, t_a): F_a → F_b; its adjoint maps F_b → F_a.
      const OperatorMatrix dagger =
          bundle_adjoint_map(c.l, c.grid.time(b), c.grid.time(a), c.u().between(b, a));
      adjoint_inverse.update(max_abs_diff(dagger, c.u().between(a, b)), c.grid.time(b));
    }
  }
  Worst norm;
  const double norm0 = fibre_norm(c, 0, c.transported[0]);
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    norm.update(std::abs(fibre_norm(c, k, c.transported[k]) - norm0), c.grid.time(k));
  }
  return make_record("unitarity",
                     {at_most("adjoint_equals_inverse", adjoint_inverse.value, tol.prop_tol,
                              adjoint_inverse.time),
                      at_most("fibre_norm_preserved", norm.value, tol.prop_tol, norm.time),
                      at_most("oracle_norm_preserved", norm_drift(c.oracle), tol.prop_tol)});
}

Complex mean_at(const OperatorMatrix& frame, const OperatorMatrix& a, const FibreVector& psi) {
  const StateVector lowered = frame * psi;
  return inner_product(lowered, StateVector(frame * StateVector(a * psi))) / inner_product(lowered, lowered);
}

CheckRecord check_pictures(const Context& c) {
  if (!c.h.hermitian_expected) {
    return skipped_record("picture_invariance",
                          "Hamiltonian is not Hermitian; pictures only preserve means for unitary evolution");
  }
  const Tolerances& tol = c.cfg.tolerances;
  const auto obs = observable_functions(c);
  const TrivializationFamily w_family =
      trivializations::random_smooth_unitary(c.n(), c.seed("picture"), 2, 1.0);
  const MatrixFunction w = [&w_family](double t) { return w_family.at(t); };
  const PictureTransform general = PictureTransform::from_typical_fibre(c.l, c.grid, c.grid.t0(), w, true);
  const PictureTransform heisenberg = PictureTransform::from_transport(c.u(), c.grid.t0());

  MorphismAlongPath lifted{c.grid, std::vector<OperatorMatrix>(c.grid.size())};
  Worst heis_mean;
  Worst general_mean;
  Worst heis_via_transform;
  Worst constancy;
  const OperatorMatrix& frame0 = c.u().frame(0);
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const double t = c.grid.time(k);
    const FibreVector psi_h = to_heisenberg_state(c.transported, c.u(), c.grid.t0(), t);
    constancy.update(max_abs_diff(psi_h, c.transported[0]), t);
    const FibreVector psi_v = to_general_picture(c.transported, general, t);
    heis_via_transform.update(max_abs_diff(to_general_picture(c.transported, heisenberg, t), psi_h), t);
    for (const auto& a_of_t : obs) {
      lifted.values[k] = c.u().frame_inverse(k) * a_of_t(t) * c.u().frame(k);
      const Complex schrodinger = mean_at(c.u().frame(k), lifted[k], c.transported[k]);
      const OperatorMatrix a_h = to_heisenberg_observable(lifted, c.u(), c.grid.t0(), t);
      heis_mean.update(std::abs(mean_at(frame0, a_h, psi_h) - schrodinger), t);
      const OperatorMatrix a_v = to_general_picture(lifted, general, t);
      general_mean.update(std::abs(mean_at(frame0, a_v, psi_v) - schrodinger), t);
    }
  }
  return make_record("picture_invariance",
                     {at_most("heisenberg_means", heis_mean.value, tol.prop_tol, heis_mean.time),
                      at_most("general_means", general_mean.value, tol.prop_tol, general_mean.time),
                      at_most("heisenberg_state_constancy", constancy.value, tol.prop_tol, constancy.time),
                      at_most("transport_picture_is_heisenberg", heis_via_transform.value, tol.prop_tol,
                              heis_via_transform.time)});
}

CheckRecord check_density(const Context& c) {
  if (!c.h.hermitian_expected) {
    return skipped_record("density_consistency", "Hamiltonian is not Hermitian; ρ(t) is not a density operator");
  }
  const Tolerances& tol = c.cfg.tolerances;
  OperatorMatrix rho0;
  if (c.cfg.initial_density) {
    rho0 = *c.cfg.initial_density;
  } else {
    const StateVector& psi = c.cfg.initial_state;
    rho0 = outer(psi, psi) / psi.squaredNorm();
  }
  const bool pure = max_abs_diff(OperatorMatrix(rho0 * rho0), rho0) <= 1e-12;
  const DensityTrajectory oracle = evolve_density(*c.evolution, rho0);
  const double t0 = c.grid.t0();
  const OperatorMatrix p0 = density_morphism(rho0, c.l, t0);
  const Complex trace0 = rho0.trace();
  const auto obs = observable_functions(c);

  std::vector<OperatorMatrix> p(c.grid.size());
  Worst lifted;
  Worst trace;
  Worst purity;
  Worst routes;
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const double t = c.grid.time(k);
    p[k] = evolve_density_morphism(p0, c.u(), t0, t);
    const OperatorMatrix oracle_lifted = c.u().frame_inverse(k) * oracle.densities[k] * c.u().frame(k);
    lifted.update(max_abs_diff(p[k], oracle_lifted), t);
    trace.update(std::abs(fibre_trace(p[k], c.l, t) - trace0), t);
    if (pure) {
      purity.update(max_abs_diff(OperatorMatrix(p[k] * p[k]), p[k]), t);
      const OperatorMatrix projector = pure_state_density(c.transported[k], c.l, t);
      for (const auto& a_of_t : obs) {
        const OperatorMatrix a = c.u().frame_inverse(k) * a_of_t(t) * c.u().frame(k);
        const Complex via_state = mean_at(c.u().frame(k), a, c.transported[k]);
        routes.update(std::max(std::abs(density_mean_value(projector, a) - via_state),
                               std::abs(density_mean_value(p[k], a) - via_state)),
                      t);
      }
    }
  }
  // iℏ dP/dt = [H^m, P], central differences at interior nodes.
  Worst von_neumann;
  const double h2 = 2.0 * c.grid.spacing();
  for (std::size_t k = 1; k + 1 < c.grid.size(); ++k) {
    const OperatorMatrix rate = (p[k + 1] - p[k - 1]) / h2;
    const OperatorMatrix residual = (kI * c.cfg.hbar) * rate - commutator(c.hm.nodes[k], p[k]);
    von_neumann.update(max_abs(residual), c.grid.time(k));
  }
  std::vector<CheckComponent> comps = {
      at_most("transported_vs_lifted_oracle", lifted.value, tol.prop_tol, lifted.time),
      at_most("fibre_trace_preserved", trace.value, tol.alg_tol, trace.time),
      at_most("commutator_form_fd", von_neumann.value, tol.fd_tol, von_neumann.time,
              "central differences with the grid spacing")};
  if (pure) {
    comps.push_back(at_most("purity_preserved", purity.value, tol.alg_tol, purity.time));
    comps.push_back(at_most("pure_state_mean_routes", routes.value, tol.alg_tol, routes.time));
  }
  return make_record("density_consistency", std::move(comps), pure ? "" : "mixed initial density");
}

CheckRecord check_integrals(const Context& c) {
  if (c.observables.empty()) return skipped_record("integrals_of_motion", "no observables configured");
  const double tol = c.cfg.tolerances.integral_tol;
  std::vector<CheckComponent> comps;
  for (std::size_t i = 0; i < c.observables.size(); ++i) {
    const ObservableSpec& spec = c.cfg.observables[i];
    const IntegralOfMotionReport r = is_integral_of_motion(
        c.observables[i], c.h, c.u(), c.l, tol, c.constants, 10, c.seed(("integral:" + spec.name).c_str()));
    const std::string verdict = r.is_integral ? "certified" : "rejected";
    if (spec.expect_integral) {
      const bool ok = r.is_integral == *spec.expect_integral;
      CheckComponent comp = at_most(spec.name + ".conventional_residual", r.conventional_residual, tol,
                                    r.worst_time, verdict + (*spec.expect_integral ? ", expected integral" : ", expected non-integral"));
      if (!*spec.expect_integral) {
        comp.bound = Bound::AtLeast;
      }
      comp.passed = ok;
      comps.push_back(std::move(comp));
    } else {
      comps.push_back(at_most(spec.name + ".conventional_residual", r.conventional_residual,
                              std::numeric_limits<double>::infinity(), r.worst_time, verdict + ", informational"));
    }
    if (r.transported_evaluated) {
      CheckComponent agree = at_most(spec.name + ".criteria_agree", r.criteria_agree ? 0.0 : 1.0, 0.0);
      agree.detail = "transported residual " + std::to_string(r.transported_residual);
      comps.push_back(std::move(agree));
    }
    if (r.is_integral) {
      comps.push_back(at_most(spec.name + ".mean_drift", r.max_mean_drift, 10.0 * tol));
    }
  }
  return make_record("integrals_of_motion", std::move(comps));
}

CheckRecord check_module_dualities(const Context& c) {
  const double fp = c.cfg.tolerances.fp_tol;
  const TimeGrid g(c.grid.t0(), c.grid.t1(), c.cfg.sampling.duality_points - 1);
  const auto n = static_cast<Eigen::Index>(c.n());
  Rng rng(c.seed("module"));
  auto random_field = [&] {
    ScalarField f{g, {}};
    for (std::size_t k = 0; k < g.size(); ++k) f.values.push_back(rng.complex_normal());
    return f;
  };
  auto random_section = [&] {
    SectionAlongPath s{g, {}};
    for (std::size_t k = 0; k < g.size(); ++k) s.values.push_back(random_state(c.n(), rng) * (1.0 + rng.uniform()));
    return s;
  };
  auto product = [&](const ScalarField& a, const ScalarField& b) {
    ScalarField out{g, {}};
    for (std::size_t k = 0; k < g.size(); ++k) out.values.push_back(a[k] * b[k]);
    return out;
  };
  auto sum = [&](const ScalarField& a, const ScalarField& b) {
    ScalarField out{g, {}};
    for (std::size_t k = 0; k < g.size(); ++k) out.values.push_back(a[k] + b[k]);
    return out;
  };
  const ScalarField zero{g, std::vector<Complex>(g.size(), Complex(0.0, 0.0))};
  const ScalarField one{g, std::vector<Complex>(g.size(), Complex(1.0, 0.0))};

  double axioms = 0.0;
  auto relative = [](const FibreVector& a, const FibreVector& b, double scale) {
    return max_abs_diff(a, b) / std::max(scale, std::numeric_limits<double>::min());
  };
  for (std::size_t trial = 0; trial < c.cfg.sampling.module_trials; ++trial) {
    const ScalarField f = random_field();
    const ScalarField h = random_field();
    const SectionAlongPath phi = random_section();
    const SectionAlongPath psi = random_section();
    const SectionAlongPath chi = random_section();
    const SectionAlongPath comb = module_combine(f, phi, h, psi);
    const SectionAlongPath f_h_phi = module_combine(product(f, h), phi, zero, psi);
    const SectionAlongPath h_phi = module_combine(h, phi, zero, psi);
    const SectionAlongPath f_of_h_phi = module_combine(f, h_phi, zero, psi);
    const SectionAlongPath fh_sum_phi = module_combine(sum(f, h), phi, zero, psi);
    const SectionAlongPath f_phi_plus_h_phi = module_combine(f, phi, h, phi);
    const SectionAlongPath phi_plus_psi = module_combine(one, phi, one, psi);
    const SectionAlongPath f_sum = module_combine(f, phi_plus_psi, zero, psi);
    const SectionAlongPath f_split = module_combine(f, phi, f, psi);
    const SectionAlongPath unit = module_combine(one, phi, zero, psi);
    const ScalarField ip_comb = section_inner(c.l, chi, comb);
    const ScalarField ip_phi = section_inner(c.l, chi, phi);
    const ScalarField ip_psi = section_inner(c.l, chi, psi);
    const ScalarField ip_rev = section_inner(c.l, comb, chi);
    const ScalarField ip_self = section_inner(c.l, phi, phi);
    const ScalarField ip_psi_self = section_inner(c.l, psi, psi);
    const ScalarField ip_chi = section_inner(c.l, chi, chi);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double sf = std::abs(f[k]);
      const double sh = std::abs(h[k]);
      const double nphi = max_abs(phi[k]);
      const double npsi = max_abs(psi[k]);
      axioms = std::max(axioms, relative(comb[k], f[k] * phi[k] + h[k] * psi[k], sf * nphi + sh * npsi));
      axioms = std::max(axioms, relative(f_h_phi[k], f_of_h_phi[k], sf * sh * nphi));
      axioms = std::max(axioms, relative(fh_sum_phi[k], f_phi_plus_h_phi[k], (sf + sh) * nphi));
      axioms = std::max(axioms, relative(f_sum[k], f_split[k], sf * (nphi + npsi)));
      axioms = std::max(axioms, relative(unit[k], phi[k], nphi));
      // ⟨χ|fΦ + hΨ⟩ = f⟨χ|Φ⟩ + h⟨χ|Ψ⟩ and ⟨fΦ + hΨ|χ⟩ = conj of the above.
      const Complex linear = f[k] * ip_phi[k] + h[k] * ip_psi[k];
      const double nchi = std::sqrt(ip_chi[k].real());
      const double ip_scale = nchi * (sf * std::sqrt(ip_self[k].real()) + sh * std::sqrt(ip_psi_self[k].real()));
      axioms = std::max(axioms, std::abs(ip_comb[k] - linear) / std::max(ip_scale, 1e-300));
      axioms = std::max(axioms, std::abs(ip_rev[k] - std::conj(ip_comb[k])) / std::max(ip_scale, 1e-300));
      axioms = std::max(axioms, std::abs(ip_self[k].imag()) / std::max(ip_self[k].real(), 1e-300));
    }
  }

  // (4.3) → (4.4): a morphism viewed as a section operator and read back.
  MorphismAlongPath a{g, {}};
  for (std::size_t k = 0; k < g.size(); ++k) a.values.push_back(random_matrix(c.n(), rng));
  const SectionOperator as_operator = [&a](const SectionAlongPath& phi) {
    return morphism_as_section_operator(a, phi);
  };
  const MorphismAlongPath recovered = section_operator_as_morphism(as_operator, g, c.n());
  double morphism_round_trip = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    morphism_round_trip = std::max(morphism_round_trip, max_abs_diff(recovered[k], a[k]) / max_abs(a[k]));
  }

  // (4.4) → (4.3): an operator defined through the typical fibre, read off
  // as a morphism and applied again.
  const OperatorMatrix typical = random_matrix(c.n(), rng);
  std::vector<OperatorMatrix> frames;
  std::vector<OperatorMatrix> inverses;
  for (std::size_t k = 0; k < g.size(); ++k) {
    frames.push_back(c.l.at(g.time(k)));
    inverses.push_back(c.l.inverse_at(g.time(k)));
  }
  const SectionOperator through_fibre = [&](const SectionAlongPath& phi) {
    SectionAlongPath out{phi.grid, {}};
    for (std::size_t k = 0; k < phi.size(); ++k) {
      out.values.push_back(inverses[k] * StateVector(typical * StateVector(frames[k] * phi[k])));
    }
    return out;
  };
  const MorphismAlongPath b = section_operator_as_morphism(through_fibre, g, c.n());
  double operator_round_trip = 0.0;
  for (std::size_t trial = 0; trial < 10; ++trial) {
    const SectionAlongPath phi = random_section();
    const SectionAlongPath direct = through_fibre(phi);
    const SectionAlongPath via = morphism_as_section_operator(b, phi);
    for (std::size_t k = 0; k < g.size(); ++k) {
      operator_round_trip = std::max(operator_round_trip, max_abs_diff(direct[k], via[k]) /
                                                            std::max(max_abs(direct[k]), 1e-300));
    }
  }

  // A time shift couples different times and has no morphism.
  const SectionOperator shift = [n](const SectionAlongPath& phi) {
    SectionAlongPath out{phi.grid, {}};
    out.values.push_back(FibreVector::Zero(n));
    for (std::size_t k = 0; k + 1 < phi.size(); ++k) out.values.push_back(phi[k]);
    return out;
  };
  bool rejected = false;
  try {
    (void)section_operator_as_morphism(shift, g, c.n());
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::NotPointwise;
  }

  return make_record(
      "module_dualities",
      {at_most("module_axioms", axioms, fp, std::nullopt,
               std::to_string(c.cfg.sampling.module_trials) + " random combinations, relative error"),
       at_most("morphism_operator_round_trip", morphism_round_trip, fp),
       at_most("operator_morphism_round_trip", operator_round_trip, fp),
       at_most("non_pointwise_rejected", rejected ? 0.0 : 1.0, 0.0, std::nullopt, "time-shift operator")});
}

CheckRecord check_trivialization(const Context& c) {
  const Tolerances& tol = c.cfg.tolerances;
  std::vector<CheckComponent> comps;
  const DerivativeConsistency dc = check_derivative_consistency(c.l, c.grid);
  comps.push_back(at_least("min_singular_value", dc.min_singular_value, c.l.inverse_tolerance()));
  if (c.l.has_analytic_derivative()) {
    comps.push_back(at_most("derivative_vs_fd", dc.max_deviation, tol.fd_tol, dc.worst_time));
  }
  Worst round_trip;
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const StateVector back = c.u().frame(k) * c.lifted_oracle[k];
    round_trip.update(max_abs_diff(back, c.oracle.states[k]), c.grid.time(k));
  }
  comps.push_back(at_most("lift_round_trip", round_trip.value, tol.identity_tol, round_trip.time));

  // Orthonormal frame stays orthonormal in the fibre product.
  const auto nodes = c.grid.strided_indices(c.cfg.sampling.pair_points);
  std::vector<StateVector> standard;
  for (std::size_t a = 0; a < c.n(); ++a) standard.push_back(identity(c.n()).col(static_cast<Eigen::Index>(a)));
  Worst gram;
  for (std::size_t k : nodes) {
    const double t = c.grid.time(k);
    const auto e = basis_field(c.l, t, standard);
    double dev = 0.0;
    for (std::size_t a = 0; a < e.size(); ++a) {
      for (std::size_t b = 0; b < e.size(); ++b) {
        dev = std::max(dev, std::abs(fibre_inner_product(c.l, t, e[a], e[b]) - (a == b ? 1.0 : 0.0)));
      }
    }
    gram.update(dev, t);
  }
  comps.push_back(at_most("basis_field_orthonormal", gram.value, tol.alg_tol, gram.time));

  // Global sections exist for point-indexed trivializations, but only
  // restrict to paths that never revisit a point.
  if (c.cfg.trivialization.value("kind", std::string()) == "position_phase") {
    std::vector<Eigen::VectorXd> k;
    for (const auto& v : c.cfg.trivialization["wavevectors"]) {
      const auto x = v.get<std::vector<double>>();
      k.emplace_back(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
    }
    Rng rng(c.seed("global-section"));
    const StateVector phi = random_state(c.n(), rng);
    const GlobalSection section(trivializations::position_phase(std::move(k)), phi);
    constexpr double spatial_tol = 1e-9;
    const auto crossings = self_intersections(c.path, spatial_tol);
    if (!crossings.empty()) {
      bool rejected = false;
      try {
        (void)section.along(c.path, spatial_tol);
      } catch (const Error& e) {
        rejected = e.code() == ErrorCode::InvalidArgument;
      }
      comps.push_back(at_most("global_section_rejected", rejected ? 0.0 : 1.0, 0.0, std::nullopt,
                              std::to_string(crossings.size()) + " self-intersection pairs"));
    } else {
      const SectionAlongPath along = section.along(c.path, spatial_tol);
      Worst dev;
      for (std::size_t i = 0; i < c.grid.size(); ++i) {
        dev.update(max_abs_diff(along[i], StateVector(c.u().frame_inverse(i) * phi)), c.grid.time(i));
      }
      comps.push_back(at_most("global_section_matches_lift", dev.value, tol.identity_tol, dev.time));
    }
  }
  return make_record("trivialization_consistency", std::move(comps));
}

CheckRecord check_closed_form(const Context& c) {
  const auto flip = rabi_flip_probability(c.cfg);
  if (!flip) return skipped_record("closed_form", "no closed form for this Hamiltonian");
  const StateVector& psi0 = c.cfg.initial_state;
  if (std::abs(psi0(0)) == 0.0 || max_abs(StateVector(psi0.tail(psi0.size() - 1))) != 0.0) {
    return skipped_record("closed_form", "closed form assumes the initial state e1");
  }
  Worst oracle;
  Worst bundle;
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const double t = c.grid.time(k);
    const double expected = (*flip)(t);
    const StateVector& psi = c.oracle.states[k];
    oracle.update(std::abs(std::norm(psi(1)) / psi.squaredNorm() - expected), t);
    const StateVector lowered = c.u().frame(k) * c.bundle[k];
    bundle.update(std::abs(std::norm(lowered(1)) / lowered.squaredNorm() - expected), t);
  }
  const double tol = c.cfg.tolerances.eq_tol;
  return make_record("closed_form", {at_most("oracle_flip_probability", oracle.value, tol, oracle.time),
                                     at_most("bundle_flip_probability", bundle.value, tol, bundle.time)});
}

void add_series(const Context& c, EquivalenceReport& report) {
  report.times = c.grid.times();
  const std::size_t size = c.grid.size();
  TimeSeries residual{"state_residual", {}};
  TimeSeries oracle_norm{"oracle_norm", {}};
  TimeSeries fibre{"fibre_norm", {}};
  for (std::size_t k = 0; k < size; ++k) {
    residual.values.push_back(max_abs_diff(c.bundle[k], c.lifted_oracle[k]));
    oracle_norm.values.push_back(c.oracle.states[k].norm());
    fibre.values.push_back(fibre_norm(c, k, c.bundle[k]));
  }
  report.series.push_back(std::move(residual));
  report.series.push_back(std::move(oracle_norm));
  report.series.push_back(std::move(fibre));
  for (std::size_t i = 0; i < c.observables.size(); ++i) {
    TimeSeries conventional{"mean." + c.cfg.observables[i].name, {}};
    TimeSeries bundle{"bundle_mean." + c.cfg.observables[i].name, {}};
    for (std::size_t k = 0; k < size; ++k) {
      conventional.values.push_back(mean_value(c.observable(i, k), c.oracle.states[k]).real());
      bundle.values.push_back(mean_at(c.u().frame(k), c.lifted_observable(i, k), c.bundle[k]).real());
    }
    report.series.push_back(std::move(conventional));
    report.series.push_back(std::move(bundle));
  }
  if (const auto flip = rabi_flip_probability(c.cfg)) {
    TimeSeries simulated{"flip_probability", {}};
    TimeSeries closed{"flip_closed_form", {}};
    for (std::size_t k = 0; k < size; ++k) {
      const StateVector& psi = c.oracle.states[k];
      simulated.values.push_back(std::norm(psi(1)) / psi.squaredNorm());
      closed.values.push_back((*flip)(c.grid.time(k)));
    }
    report.series.push_back(std::move(simulated));
    report.series.push_back(std::move(closed));
  }
}

using CheckFn = CheckRecord (*)(const Context&);

CheckFn check_for(const std::string& id) {
  if (id == "state_equivalence") return check_state_equivalence;
  if (id == "transport_axioms") return check_transport_axioms;
  if (id == "mean_value_invariance") return check_mean_value_invariance;
  if (id == "hermiticity_correspondence") return check_hermiticity;
  if (id == "unitarity") return check_unitarity;
  if (id == "picture_invariance") return check_pictures;
  if (id == "density_consistency") return check_density;
  if (id == "integrals_of_motion") return check_integrals;
  if (id == "module_dualities") return check_module_dualities;
  if (id == "trivialization_consistency") return check_trivialization;
  if (id == "closed_form") return check_closed_form;
  fail(ErrorCode::InvalidArgument, "unknown check '" + id + "'");
}

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return std::string(to_string(err->code())) + ": " + err->what();
  }
  return std::string("internal error: ") + e.what();
}

}  // namespace

EquivalenceReport run_scenario(const ScenarioConfig& cfg) {
  const auto start = Clock::now();
  EquivalenceReport report;
  report.scenario = cfg.name;
  report.description = cfg.description;
  report.seed = cfg.seed;
  report.config = to_json(cfg);

  std::unique_ptr<Context> context;
  std::string setup_error;
  try {
    context = std::make_unique<Context>(cfg);
  } catch (const std::exception& e) {
    setup_error = describe(e);
  }
  for (const auto& id : cfg.checks) {
    const auto check_start = Clock::now();
    CheckRecord record;
    if (!context) {
      record = failed_record(id, "scenario setup failed: " + setup_error);
    } else {
      try {
        record = check_for(id)(*context);
      } catch (const std::exception& e) {
        record = failed_record(id, describe(e));
      }
    }
    record.elapsed_ms = ms_since(check_start);
    report.records.push_back(std::move(record));
  }
  if (context) {
    try {
      add_series(*context, report);
    } catch (const std::exception& e) {
      report.warnings.push_back("time series unavailable: " + describe(e));
    }
  }
  report.elapsed_ms = ms_since(start);
  return report;
}

namespace {

void sort_reports(std::vector<EquivalenceReport>& reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const EquivalenceReport& a, const EquivalenceReport& b) {
    if (a.passed() != b.passed()) return !a.passed();
    return a.scenario < b.scenario;
  });
}

EquivalenceReport load_failure(const std::string& origin, const std::string& message) {
  EquivalenceReport r;
  r.scenario = origin;
  r.records.push_back(failed_record("load", message));
  return r;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read '" + p.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <class Task>
std::vector<EquivalenceReport> run_parallel(std::size_t count, const SuiteOptions& options, Task task) {
  std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max<std::size_t>(1, std::min(threads, count));
  std::vector<EquivalenceReport> out(count);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) out[i] = task(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace

SuiteReport run_configs(const std::vector<ScenarioConfig>& configs, const std::string& source,
                        const SuiteOptions& options) {
  const auto start = Clock::now();
  SuiteReport suite;
  suite.source = source;
  if (configs.empty()) suite.warnings.push_back("suite is empty; aggregate passes vacuously");
  suite.reports = run_parallel(configs.size(), options, [&](std::size_t i) { return run_scenario(configs[i]); });
  sort_reports(suite.reports);
  suite.elapsed_ms = ms_since(start);
  return suite;
}

SuiteReport run_suite(const std::string& source, const SuiteOptions& options) {
  namespace fs = std::filesystem;
  if (source == "builtin") return run_configs(catalog_scenarios(), source, options);

  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(source, ec)) {
    for (const auto& entry : fs::directory_iterator(source)) {
      const fs::path& p = entry.path();
      if (entry.is_regular_file() && p.extension() == ".json" && p.filename() != "manifest.json") {
        files.push_back(p);
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    const std::string text = read_file(source);
    json manifest;
    try {
      manifest = json::parse(text);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::Parse, source + ": " + e.what());
    }
    if (!manifest.is_object() || !manifest.contains("scenarios") || !manifest["scenarios"].is_array()) {
      fail(ErrorCode::Schema, source + ": field 'scenarios' must be an array of paths");
    }
    const fs::path dir = fs::path(source).parent_path();
    for (const auto& item : manifest["scenarios"]) {
      if (!item.is_string()) fail(ErrorCode::Schema, source + ": field 'scenarios' must contain strings");
      const fs::path p = item.get<std::string>();
      files.push_back(p.is_absolute() ? p : dir / p);
    }
  }

  const auto start = Clock::now();
  SuiteReport suite;
  suite.source = source;
  if (files.empty()) suite.warnings.push_back("suite is empty; aggregate passes vacuously");
  std::mutex warnings_mutex;
  suite.reports = run_parallel(files.size(), options, [&](std::size_t i) {
    try {
      return run_scenario(load_scenario(files[i].string()));
    } catch (const std::exception& e) {
      std::lock_guard lock(warnings_mutex);
      suite.warnings.push_back("could not load " + files[i].string());
      return load_failure(files[i].string(), describe(e));
    }
  });
  std::sort(suite.warnings.begin(), suite.warnings.end());
  sort_reports(suite.reports);
  suite.elapsed_ms = ms_since(start);
  return suite;
}

}  // namespace fqm
