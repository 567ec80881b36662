#include <doctest.h>

#include <cmath>

#include "fibreqm/errors.hpp"
#include "fibreqm/pictures.hpp"
#include "fibreqm/random.hpp"
#include "oracles.hpp"

using namespace fqm;
using oracle::I;

namespace {

struct Setup {
  TimeGrid grid{0.0, 1.0, 400};
  HamiltonianFamily h;
  TrivializationFamily l;
  EvolutionTransport u;
  SectionAlongPath psi;
  MorphismAlongPath a;
  OperatorMatrix a0;
  Trajectory oracle_states;
};

Setup make_setup(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const OperatorMatrix h0 = random_hermitian(n, rng);
  const OperatorMatrix h1 = random_hermitian(n, rng);
  HamiltonianFamily h{[h0, h1](double t) { return OperatorMatrix(h0 + t * h1); }, n, true};
  TrivializationFamily l = trivializations::random_smooth_unitary(n, seed + 1);
  const TimeGrid grid(0.0, 1.0, 400);
  EvolutionTransport u = build_transport(h, l, grid);
  const StateVector psi0 = random_state(n, rng);
  Trajectory tr = evolve_state(h, psi0, grid);
  const OperatorMatrix a0 = random_hermitian(n, rng);
  SectionAlongPath psi{grid, {}};
  MorphismAlongPath a{grid, {}};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    psi.values.push_back(transport_section(u, lift_vector(l, 0.0, psi0), 0.0, grid.time(k)));
    a.values.push_back(lift_operator(l, grid.time(k), a0));
  }
  return {grid, h, l, u, psi, a, a0, tr};
}

}  // namespace

TEST_SUITE("pictures-and-statistics") {

TEST_CASE("bundle mean value") {
  Rng rng(1);
  const auto l = trivializations::random_smooth_unitary(2, 2);
  CHECK(std::abs(bundle_mean_value(l, 0.4, lift_operator(l, 0.4, oracle::sz()),
                                   lift_vector(l, 0.4, oracle::vec({1, 0}))) - 1.0) < 1e-15);
  CHECK_THROWS_AS(bundle_mean_value(l, 0.4, oracle::sz(), oracle::vec({0, 0})), Error);

  const Setup s = make_setup(4, 10);
  double worst = 0.0;
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    const Complex bundle = bundle_mean_value(s.a, s.psi, s.l, s.grid.time(k));
    worst = std::max(worst, std::abs(bundle - mean_value(s.a0, s.oracle_states.states[k])));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("Heisenberg picture") {
  const Setup s = make_setup(3, 20);
  CHECK(max_abs_diff(to_heisenberg_state(s.psi, s.u, 0.0, 0.0), s.psi[0]) < 1e-14);
  for (double t : {0.25, 0.5, 1.0}) {
    const std::size_t k = s.grid.index_of(t);
    CHECK(max_abs_diff(to_heisenberg_state(s.psi, s.u, 0.0, t), s.psi[0]) < 1e-8);
    const OperatorMatrix ah = to_heisenberg_observable(s.a, s.u, 0.0, t);
    const Complex heis = bundle_mean_value(s.l, 0.0, ah, s.psi[0]);
    CHECK(std::abs(heis - bundle_mean_value(s.a, s.psi, s.l, t)) < 1e-8);
    (void)k;
  }

  const TimeGrid g(0.0, 1.0, 10);
  const HamiltonianFamily zero{[](double) { return OperatorMatrix::Zero(2, 2); }, 2, true};
  const auto u = build_transport(zero, trivializations::identity(2), g);
  MorphismAlongPath a{g, std::vector<OperatorMatrix>(g.size(), oracle::sx())};
  CHECK(max_abs_diff(to_heisenberg_observable(a, u, 0.0, 0.7), oracle::sx()) == 0.0);
}

TEST_CASE("general pictures") {
  const Setup s = make_setup(2, 30);
  const auto schrodinger = PictureTransform::identity(s.grid, 0, 2);
  CHECK(max_abs_diff(to_general_picture(s.psi, schrodinger, 0.5), s.psi[s.grid.index_of(0.5)]) == 0.0);

  const auto heisenberg = PictureTransform::from_transport(s.u, 0.0);
  for (double t : {0.1, 0.9}) {
    CHECK(max_abs_diff(to_general_picture(s.psi, heisenberg, t), to_heisenberg_state(s.psi, s.u, 0.0, t)) < 1e-15);
    CHECK(max_abs_diff(to_general_picture(s.a, heisenberg, t), to_heisenberg_observable(s.a, s.u, 0.0, t)) < 1e-15);
  }

  // Scalar phase: states pick up the phase, observables and means do not change.
  std::vector<OperatorMatrix> phases;
  for (std::size_t j = 0; j < s.grid.size(); ++j) {
    phases.push_back(std::exp(I * 2.0 * s.grid.time(j)) * identity(2));
  }
  const PictureTransform phase(s.grid, 0, phases, true);
  const double t = 0.6;
  const std::size_t k = s.grid.index_of(t);
  const FibreVector moved = to_general_picture(s.psi, phase, t);
  CHECK(max_abs_diff(moved, FibreVector(std::exp(-I * 2.0 * t) * s.psi[k])) < 1e-14);
  CHECK(max_abs_diff(to_general_picture(s.a, phase, t), s.a[k]) < 1e-14);

  const auto w = trivializations::random_smooth_unitary(2, 31, 2, 1.0);
  const auto general = PictureTransform::from_typical_fibre(s.l, s.grid, 0.0, [w](double tt) { return w.at(tt); }, true);
  for (std::size_t j = 0; j < s.grid.size(); j += 40) {
    const double tj = s.grid.time(j);
    const Complex m = bundle_mean_value(s.l, s.grid.time(0), to_general_picture(s.a, general, tj),
                                        to_general_picture(s.psi, general, tj));
    CHECK(std::abs(m - bundle_mean_value(s.a, s.psi, s.l, tj)) < 1e-8);
  }

  std::vector<OperatorMatrix> bad(s.grid.size(), 2.0 * identity(2));
  CHECK_THROWS_AS(PictureTransform(s.grid, 0, bad, false), Error);
}

TEST_CASE("density morphisms") {
  Rng rng(50);
  const OperatorMatrix rho = OperatorMatrix(0.5 * identity(2)) + 0.2 * oracle::sx();
  CHECK(max_abs_diff(density_morphism(rho, trivializations::identity(2), 0.3), rho) == 0.0);

  const auto l = trivializations::random_smooth_unitary(3, 51);
  const StateVector psi = random_state(3, rng);
  const OperatorMatrix p = density_morphism(outer(psi, psi), l, 0.4);
  const FibreVector lifted = lift_vector(l, 0.4, psi);
  CHECK(max_abs_diff(p, outer(lifted, lifted)) < 1e-15);
  CHECK(max_abs_diff(OperatorMatrix(p * p), p) < 1e-15);

  const auto pure = pure_state_density(lift_vector(trivializations::identity(2), 0.0, oracle::vec({1, 0})),
                                       trivializations::identity(2), 0.0);
  CHECK(max_abs_diff(pure, oracle::diag({1, 0})) == 0.0);
  const auto skew = trivializations::constant_diagonal({1.0, 2.0, 3.0});
  const OperatorMatrix q = pure_state_density(random_state(3, rng), skew, 0.0);
  CHECK(std::abs(fibre_trace(q, skew, 0.0) - 1.0) < 1e-15);
  CHECK(max_abs_diff(OperatorMatrix(q * q), q) < 1e-15);
}

TEST_CASE("density transport and routes to the mean") {
  const Setup s = make_setup(3, 60);
  const OperatorMatrix p0 = pure_state_density(s.psi[0], s.l, 0.0);
  CHECK(max_abs_diff(evolve_density_morphism(p0, s.u, 0.0, 0.0), p0) < 1e-14);
  for (double t : {0.3, 1.0}) {
    const std::size_t k = s.grid.index_of(t);
    const OperatorMatrix pt = evolve_density_morphism(p0, s.u, 0.0, t);
    CHECK(max_abs_diff(pt, pure_state_density(s.psi[k], s.l, t)) < 1e-8);
    CHECK(std::abs(fibre_trace(pt, s.l, t) - 1.0) < 1e-10);
    CHECK(max_abs_diff(OperatorMatrix(pt * pt), pt) < 1e-10);
    CHECK(std::abs(density_mean_value(pt, s.a[k]) - bundle_mean_value(s.a, s.psi, s.l, t)) < 1e-10);
  }

  const TimeGrid g(0.0, 1.0, 20);
  const HamiltonianFamily zero{[](double) { return OperatorMatrix::Zero(2, 2); }, 2, true};
  const auto u = build_transport(zero, trivializations::constant_diagonal({1.0, 2.0}), g);
  const OperatorMatrix mixed = oracle::diag({0.3, 0.7});
  CHECK(max_abs_diff(evolve_density_morphism(mixed, u, 0.0, 0.85), mixed) == 0.0);
}

TEST_CASE("integrals of motion") {
  const TimeGrid g(0.0, 1.0, 1000);
  const HamiltonianFamily sz{[](double) { return oracle::sz(); }, 2, true};
  const auto u = build_transport(sz, trivializations::identity(2), g);

  const auto conserved = is_integral_of_motion(ObservableFamily::constant(oracle::sz()), sz, u,
                                               trivializations::identity(2));
  CHECK(conserved.is_integral);
  CHECK(conserved.conventional_residual == 0.0);
  CHECK(conserved.max_mean_drift <= 1e-5);

  const auto rejected = is_integral_of_motion(ObservableFamily::constant(oracle::sx()), sz, u,
                                              trivializations::identity(2));
  CHECK_FALSE(rejected.is_integral);
  CHECK(rejected.conventional_residual == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rejected.transported_evaluated);
  CHECK(rejected.criteria_agree);

  // 𝒜(t) = 𝒰(t,0)σx𝒰(0,t) with the exact derivative −i[ℋ, 𝒜].
  ObservableFamily heis;
  heis.eval = [](double t) {
    const OperatorMatrix w = oracle::expi(oracle::sz(), t);
    return OperatorMatrix(w * oracle::sx() * w.adjoint());
  };
  heis.time_derivative = [heis](double t) { return OperatorMatrix(-I * commutator(oracle::sz(), heis.eval(t))); };
  const auto moving = is_integral_of_motion(heis, sz, u, trivializations::identity(2));
  CHECK(moving.is_integral);
  CHECK(moving.conventional_residual < 1e-12);
  CHECK_FALSE(moving.transported_evaluated);

  // Finite-difference derivative gives the same verdict.
  ObservableFamily heis_fd;
  heis_fd.eval = heis.eval;
  CHECK(is_integral_of_motion(heis_fd, sz, u, trivializations::identity(2)).is_integral);

  ObservableFamily no_derivative;
  no_derivative.eval = heis.eval;
  no_derivative.fd_step = 0.0;
  CHECK_THROWS_AS(is_integral_of_motion(no_derivative, sz, u, trivializations::identity(2)), Error);

  Rng rng(70);
  const OperatorMatrix h0 = random_hermitian(3, rng);
  const HamiltonianFamily constant{[h0](double) { return h0; }, 3, true};
  const auto gauge = trivializations::random_smooth_unitary(3, 71);
  const auto uc = build_transport(constant, gauge, g);
  const auto energy = is_integral_of_motion(ObservableFamily::constant(h0), constant, uc, gauge);
  CHECK(energy.is_integral);
  CHECK(energy.criteria_agree);
  CHECK(energy.max_mean_drift <= 1e-5);
}

}  // TEST_SUITE
