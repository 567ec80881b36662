#include <doctest.h>

#include <cmath>

#include "fibreqm/bundle.hpp"
#include "fibreqm/errors.hpp"
#include "fibreqm/random.hpp"
#include "fibreqm/transport.hpp"
#include "oracles.hpp"

using namespace fqm;
using oracle::I;

namespace {

TrivializationFamily diag12() { return trivializations::constant_diagonal({1.0, 2.0}); }

/// exp(K(t))·D: smooth, invertible, not unitary.
TrivializationFamily skewed(std::size_t n, std::uint64_t seed) {
  const auto u = trivializations::random_smooth_unitary(n, seed);
  OperatorMatrix d = OperatorMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) d(a, a) = 1.0 + 0.5 * static_cast<double>(a);
  return TrivializationFamily(
      n, [u, d](double t) { return OperatorMatrix(u.at(t) * d); },
      [u, d](double t) { return OperatorMatrix(u.derivative(t) * d); }, "skewed");
}

}  // namespace

TEST_SUITE("bundle-structure") {

TEST_CASE("lifting vectors") {
  const StateVector psi = oracle::vec({0.3, 0.4 * I});
  CHECK(max_abs_diff(lift_vector(trivializations::identity(2), 0.7, psi), psi) == 0.0);
  const double omega = 1.7;
  const double t = 0.35;
  const FibreVector lifted = lift_vector(trivializations::global_phase(2, omega), t, psi);
  CHECK(max_abs_diff(lifted, StateVector(std::exp(-I * omega * t) * psi)) < 1e-15);
  CHECK(max_abs_diff(lift_vector(diag12(), 0.0, oracle::vec({1, 1})), oracle::vec({1, 0.5})) == 0.0);
  CHECK(max_abs_diff(lower_vector(diag12(), 0.0, oracle::vec({1, 0.5})), oracle::vec({1, 1})) == 0.0);
}

TEST_CASE("lifting operators") {
  Rng rng(3);
  const OperatorMatrix b = random_matrix(2, rng);
  CHECK(max_abs_diff(lift_operator(diag12(), 0.0, identity(2)), identity(2)) == 0.0);
  OperatorMatrix expected(2, 2);
  expected << 0, 2, 0.5, 0;
  CHECK(max_abs_diff(lift_operator(diag12(), 0.0, oracle::sx()), expected) == 0.0);
  CHECK(max_abs_diff(lower_operator(diag12(), 0.0, lift_operator(diag12(), 0.0, b)), b) < 1e-15);

  // Spectrum is preserved under a unitary gauge.
  const auto l = trivializations::random_smooth_unitary(4, 77);
  const OperatorMatrix a = random_hermitian(4, rng);
  const OperatorMatrix lifted = lift_operator(l, 0.4, a);
  Eigen::ComplexEigenSolver<OperatorMatrix> es(lifted);
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> ref(a);
  std::vector<double> got;
  for (Eigen::Index k = 0; k < 4; ++k) got.push_back(es.eigenvalues()(k).real());
  std::sort(got.begin(), got.end());
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(std::abs(got[k] - ref.eigenvalues()(k)) < 1e-12);
}

TEST_CASE("fibre inner product") {
  Rng rng(4);
  const StateVector u = random_state(3, rng);
  const StateVector v = random_state(3, rng);
  CHECK(fibre_inner_product(trivializations::identity(3), 0.2, u, v) == inner_product(u, v));
  CHECK(fibre_inner_product(diag12(), 0.0, oracle::vec({0, 1}), oracle::vec({0, 1})) == Complex(4, 0));
  const auto l = skewed(3, 5);
  const Complex lifted = fibre_inner_product(l, 0.6, lift_vector(l, 0.6, u), lift_vector(l, 0.6, v));
  CHECK(std::abs(lifted - inner_product(u, v)) < 1e-14);
}

TEST_CASE("bundle adjoint of a morphism") {
  CHECK(max_abs_diff(bundle_adjoint_morphism(diag12(), 0.0, identity(2)), identity(2)) == 0.0);
  Rng rng(6);
  const OperatorMatrix a = random_matrix(3, rng);
  const auto u = trivializations::random_smooth_unitary(3, 8);
  CHECK(max_abs_diff(bundle_adjoint_morphism(u, 0.3, a), adjoint(a)) < 1e-14);

  const auto l = skewed(3, 9);
  const OperatorMatrix h = random_hermitian(3, rng);
  const OperatorMatrix lifted = lift_operator(l, 0.8, h);
  CHECK(max_abs_diff(bundle_adjoint_morphism(l, 0.8, lifted), lifted) < 1e-13);
  // The plain adjoint is not the right one when l is not unitary.
  CHECK(max_abs_diff(adjoint(lifted), lifted) > 1e-3);
  const OperatorMatrix bad = lift_operator(l, 0.8, a);
  CHECK(max_abs_diff(bundle_adjoint_morphism(l, 0.8, bad), bad) > 1e-3);

  // ⟨A‡u|v⟩ = ⟨u|Av⟩ in the fibre metric.
  const StateVector x = random_state(3, rng);
  const StateVector y = random_state(3, rng);
  const Complex lhs = fibre_inner_product(l, 0.8, bundle_adjoint_morphism(l, 0.8, bad) * x, y);
  const Complex rhs = fibre_inner_product(l, 0.8, x, bad * y);
  CHECK(std::abs(lhs - rhs) < 1e-13);
}

TEST_CASE("bundle adjoint of a two-point map") {
  const auto l = skewed(2, 10);
  CHECK(max_abs_diff(bundle_adjoint_map(l, 0.5, 0.5, identity(2)), identity(2)) < 1e-14);
  Rng rng(12);
  const OperatorMatrix a = random_matrix(2, rng);
  CHECK(max_abs_diff(bundle_adjoint_map(trivializations::identity(2), 0.1, 0.9, a), adjoint(a)) == 0.0);

  // Defining relation: ⟨A‡Φ|Ψ⟩_t = ⟨Φ|AΨ⟩_s for A: F_t → F_s.
  const double s = 0.2;
  const double t = 0.7;
  const StateVector phi = random_state(2, rng);
  const StateVector psi = random_state(2, rng);
  const OperatorMatrix dag = bundle_adjoint_map(l, s, t, a);
  const Complex lhs = fibre_inner_product(l, t, dag * phi, psi);
  const Complex rhs = fibre_inner_product(l, s, phi, a * psi);
  CHECK(std::abs(lhs - rhs) < 1e-13);

  // Transport is a unitary bundle map for Hermitian ℋ.
  const OperatorMatrix h0 = random_hermitian(2, rng);
  const HamiltonianFamily h{[h0](double tt) { return OperatorMatrix(h0 * (1.0 + tt)); }, 2, true};
  const TimeGrid g(0.0, 1.0, 100);
  const EvolutionTransport u = build_transport(h, l, g);
  CHECK(max_abs_diff(bundle_adjoint_map(l, 0.7, 0.2, u(0.7, 0.2)), u(0.2, 0.7)) < 1e-8);
}

TEST_CASE("basis fields") {
  std::vector<StateVector> frame{oracle::vec({1, 0}), oracle::vec({0, 1})};
  const auto same = basis_field(trivializations::identity(2), 0.0, frame);
  CHECK(max_abs_diff(same[0], frame[0]) == 0.0);
  const auto e = basis_field(diag12(), 0.0, frame);
  CHECK(max_abs_diff(e[0], oracle::vec({1, 0})) == 0.0);
  CHECK(max_abs_diff(e[1], oracle::vec({0, 0.5})) == 0.0);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      CHECK(std::abs(fibre_inner_product(diag12(), 0.0, e[a], e[b]) - (a == b ? 1.0 : 0.0)) == 0.0);
    }
  }
  const auto u = trivializations::random_smooth_unitary(2, 3);
  const auto ue = basis_field(u, 0.6, frame);
  CHECK(std::abs(inner_product(ue[0], ue[1])) < 1e-15);
  CHECK(std::abs(inner_product(ue[1], ue[1]) - 1.0) < 1e-15);
  CHECK_THROWS_AS(basis_field(diag12(), 0.0, {oracle::vec({1, 1}), oracle::vec({2, 2})}), Error);
}

TEST_CASE("trivialization families") {
  const auto g = trivializations::global_phase(2, 3.0);
  CHECK(max_abs_diff(g.derivative(0.4), OperatorMatrix(3.0 * I * g.at(0.4))) < 1e-15);
  const auto r = trivializations::random_smooth_unitary(3, 21, 2, 0.5);
  CHECK(is_unitary(r.at(0.9), 1e-13));
  const auto dc = check_derivative_consistency(r, TimeGrid(0.0, 1.0, 1000));
  CHECK(dc.max_deviation < 1e-5);
  CHECK(dc.min_singular_value == doctest::Approx(1.0));
  // Same seed, same family, bit for bit.
  const auto r2 = trivializations::random_smooth_unitary(3, 21, 2, 0.5);
  CHECK(max_abs_diff(r.at(0.3), r2.at(0.3)) == 0.0);
  CHECK(max_abs_diff(r.inverse_derivative(0.3),
                     OperatorMatrix(-r.inverse_at(0.3) * r.derivative(0.3) * r.inverse_at(0.3))) < 1e-15);

  const TrivializationFamily no_derivative(2, [](double) { return identity(2); });
  CHECK_THROWS_AS(no_derivative.derivative(0.0), Error);
  TrivializationFamily fd(2, [](double t) { return OperatorMatrix(std::exp(I * t) * identity(2)); });
  fd.with_finite_difference_step(1e-4);
  CHECK(max_abs_diff(fd.derivative(0.0), OperatorMatrix(I * identity(2))) < 1e-8);

  const auto singular = trivializations::constant_diagonal({1.0, 0.0});
  CHECK_THROWS_AS(singular.inverse_at(0.0), Error);
}

TEST_CASE("global sections and pull-backs") {
  Eigen::VectorXd k1(2), k2(2);
  k1 << 1.0, 0.0;
  k2 << 0.0, 2.0;
  const auto point_l = trivializations::position_phase({k1, k2});
  const StateVector phi = oracle::vec({0.6, 0.8});
  const GlobalSection section(point_l, phi);

  const Path once = make_path(BaseSpace::euclidean(2), 0.0, 1.0, paths::circle(2, 0.5, M_PI), 1001,
                              paths::circle_velocity(2, 0.5, M_PI));
  const auto pulled = pull_back(point_l, once);
  const auto along = section.along(once);
  for (std::size_t k = 0; k < once.points().size(); ++k) {
    const double t = once.grid().time(k);
    CHECK(max_abs_diff(along[k], lift_vector(pulled, t, phi)) < 1e-15);
  }
  CHECK(check_derivative_consistency(pulled, once.grid()).max_deviation < 1e-4);

  const Path twice = make_path(BaseSpace::euclidean(2), 0.0, 1.0, paths::circle(2, 0.5, 4 * M_PI), 101);
  CHECK_THROWS_AS(section.along(twice, 1e-9), Error);
}

TEST_CASE("module structure on sections") {
  const TimeGrid g(0.0, 1.0, 10);
  SectionAlongPath phi{g, {}};
  SectionAlongPath psi{g, {}};
  ScalarField one{g, {}}, zero{g, {}}, ramp{g, {}};
  for (std::size_t k = 0; k < g.size(); ++k) {
    phi.values.push_back(oracle::vec({1, 0}));
    psi.values.push_back(oracle::vec({0.3, I}));
    one.values.push_back(1.0);
    zero.values.push_back(0.0);
    ramp.values.push_back(g.time(k));
  }
  const auto same = module_combine(one, phi, zero, psi);
  const auto none = module_combine(zero, phi, zero, psi);
  const auto scaled = module_combine(ramp, phi, zero, psi);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(max_abs_diff(same[k], phi[k]) == 0.0);
    CHECK(max_abs(none[k]) == 0.0);
    CHECK(max_abs_diff(scaled[k], oracle::vec({g.time(k), 0})) == 0.0);
  }

  const auto l = skewed(2, 30);
  SectionAlongPath lifted_unit{g, {}}, lifted_other{g, {}};
  for (std::size_t k = 0; k < g.size(); ++k) {
    lifted_unit.values.push_back(lift_vector(l, g.time(k), oracle::vec({1, 0})));
    lifted_other.values.push_back(lift_vector(l, g.time(k), oracle::vec({0, 1})));
  }
  const ScalarField norms = section_inner(l, lifted_unit, lifted_unit);
  const ScalarField cross = section_inner(l, lifted_unit, lifted_other);
  const ScalarField ramped = section_inner(l, lifted_unit, module_combine(ramp, lifted_unit, zero, psi));
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(std::abs(norms[k] - 1.0) < 1e-15);
    CHECK(std::abs(cross[k]) < 1e-15);
    CHECK(std::abs(ramped[k] - g.time(k)) < 1e-15);
  }
}

TEST_CASE("morphisms and section operators") {
  const TimeGrid g(0.0, 1.0, 8);
  MorphismAlongPath id{g, {}}, zero{g, {}}, flip{g, {}};
  SectionAlongPath phi{g, {}};
  for (std::size_t k = 0; k < g.size(); ++k) {
    id.values.push_back(identity(2));
    zero.values.push_back(OperatorMatrix::Zero(2, 2));
    flip.values.push_back(oracle::sz());
    phi.values.push_back(oracle::vec({1, 1}));
  }
  const auto kept = morphism_as_section_operator(id, phi);
  const auto killed = morphism_as_section_operator(zero, phi);
  const auto flipped = morphism_as_section_operator(flip, phi);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(max_abs_diff(kept[k], phi[k]) == 0.0);
    CHECK(max_abs(killed[k]) == 0.0);
    CHECK(max_abs_diff(flipped[k], oracle::vec({1, -1})) == 0.0);
  }

  const auto identity_op = section_operator_as_morphism([](const SectionAlongPath& s) { return s; }, g, 2);
  Rng rng(31);
  MorphismAlongPath random_a{g, {}};
  for (std::size_t k = 0; k < g.size(); ++k) random_a.values.push_back(random_matrix(2, rng));
  const auto recovered = section_operator_as_morphism(
      [&](const SectionAlongPath& s) { return morphism_as_section_operator(random_a, s); }, g, 2);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(max_abs_diff(identity_op[k], identity(2)) == 0.0);
    CHECK(max_abs_diff(recovered[k], random_a[k]) == 0.0);
  }

  const SectionOperator shift = [](const SectionAlongPath& s) {
    SectionAlongPath out{s.grid, {}};
    out.values.push_back(FibreVector::Zero(2));
    for (std::size_t k = 0; k + 1 < s.size(); ++k) out.values.push_back(s[k]);
    return out;
  };
  try {
    (void)section_operator_as_morphism(shift, g, 2);
    FAIL("expected NotPointwise");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPointwise);
  }
}

}  // TEST_SUITE
