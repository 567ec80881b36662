#include "fibreqm/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "fibreqm/errors.hpp"
#include "fibreqm/random.hpp"

namespace fqm {

TrivializationFamily::TrivializationFamily(std::size_t dimension, MatrixFunction eval,
                                           MatrixFunction derivative, std::string name)
    : dimension_(dimension),
      eval_(std::move(eval)),
      derivative_(std::move(derivative)),
      name_(std::move(name)) {
  if (dimension_ < 1) fail(ErrorCode::InvalidArgument, "trivialization dimension must be >= 1");
  if (!eval_) fail(ErrorCode::InvalidArgument, "trivialization has no evaluator");
}

OperatorMatrix TrivializationFamily::at(double t) const {
  OperatorMatrix l = eval_(t);
  const auto n = static_cast<Eigen::Index>(dimension_);
  if (l.rows() != n || l.cols() != n) {
    fail(ErrorCode::DimensionMismatch, "trivialization '" + name_ + "' has wrong shape at t=" +
                                           std::to_string(t));
  }
  if (!l.allFinite()) {
    fail(ErrorCode::EvaluationFailure,
         "trivialization '" + name_ + "' is not finite at t=" + std::to_string(t));
  }
  return l;
}

OperatorMatrix TrivializationFamily::inverse_at(double t) const {
  try {
    return checked_inverse(at(t), inv_tol_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMatrix) throw;
    fail(ErrorCode::SingularMatrix, "trivialization '" + name_ + "' at t=" +
                                        std::to_string(t) + ": " + e.what());
  }
}

OperatorMatrix TrivializationFamily::derivative(double t) const {
  if (derivative_) {
    OperatorMatrix d = derivative_(t);
    if (d.rows() != static_cast<Eigen::Index>(dimension_) || !d.allFinite()) {
      fail(ErrorCode::EvaluationFailure,
           "derivative of trivialization '" + name_ + "' is invalid at t=" + std::to_string(t));
    }
    return d;
  }
  if (!(fd_step_ > 0.0)) {
    fail(ErrorCode::MissingDerivative,
         "trivialization '" + name_ + "' has neither an analytic derivative nor a "
         "finite-difference step");
  }
  return (at(t + fd_step_) - at(t - fd_step_)) / (2.0 * fd_step_);
}

OperatorMatrix TrivializationFamily::inverse_derivative(double t) const {
  const OperatorMatrix inv = inverse_at(t);
  return -inv * derivative(t) * inv;
}

TrivializationFamily& TrivializationFamily::with_finite_difference_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    fail(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  }
  fd_step_ = h;
  return *this;
}

TrivializationFamily& TrivializationFamily::with_inverse_tolerance(double tol) {
  if (!(tol >= 0.0)) fail(ErrorCode::InvalidArgument, "inverse tolerance must be >= 0");
  inv_tol_ = tol;
  return *this;
}

DerivativeConsistency check_derivative_consistency(const TrivializationFamily& l,
                                                   const TimeGrid& grid) {
  DerivativeConsistency out;
  out.min_singular_value = std::numeric_limits<double>::infinity();
  const double h = grid.spacing();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    out.min_singular_value = std::min(out.min_singular_value, min_singular_value(l.at(t)));
    if (k == 0 || k == grid.steps()) continue;
    const OperatorMatrix fd = (l.at(grid.time(k + 1)) - l.at(grid.time(k - 1))) / (2.0 * h);
    const double dev = max_abs_diff(fd, l.derivative(t));
    if (dev > out.max_deviation) {
      out.max_deviation = dev;
      out.worst_time = t;
    }
  }
  return out;
}

TrivializationFamily pull_back(const PointTrivialization& l, const Path& path) {
  if (!l.eval) fail(ErrorCode::InvalidArgument, "point trivialization has no evaluator");
  auto eval = [l, path](double t) { return l.eval(path.at(t)); };
  MatrixFunction derivative;
  if (l.directional_derivative && path.has_velocity()) {
    derivative = [l, path](double t) {
      return l.directional_derivative(path.at(t), path.velocity(t));
    };
  }
  TrivializationFamily family(l.dimension, std::move(eval), std::move(derivative),
                              l.name + "@path");
  if (!family.has_analytic_derivative()) family.with_finite_difference_step(path.grid().spacing());
  return family;
}

namespace trivializations {

TrivializationFamily identity(std::size_t n) {
  return TrivializationFamily(
      n, [n](double) { return fqm::identity(n); },
      [n](double) {
        const auto m = static_cast<Eigen::Index>(n);
        return OperatorMatrix(OperatorMatrix::Zero(m, m));
      },
      "identity");
}

TrivializationFamily global_phase(std::size_t n, double omega) {
  return TrivializationFamily(
      n, [n, omega](double t) { return OperatorMatrix(std::polar(1.0, omega * t) * fqm::identity(n)); },
      [n, omega](double t) {
        return OperatorMatrix((kI * omega * std::polar(1.0, omega * t)) * fqm::identity(n));
      },
      "global_phase");
}

TrivializationFamily diagonal_gauge(std::vector<double> frequencies) {
  const std::size_t n = frequencies.size();
  auto eval = [frequencies](double t) {
    const auto m = static_cast<Eigen::Index>(frequencies.size());
    OperatorMatrix l = OperatorMatrix::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) l(a, a) = std::polar(1.0, frequencies[a] * t);
    return l;
  };
  auto derivative = [frequencies](double t) {
    const auto m = static_cast<Eigen::Index>(frequencies.size());
    OperatorMatrix d = OperatorMatrix::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      d(a, a) = kI * frequencies[a] * std::polar(1.0, frequencies[a] * t);
    }
    return d;
  };
  return TrivializationFamily(n, std::move(eval), std::move(derivative), "diagonal_gauge");
}

TrivializationFamily constant_diagonal(std::vector<Complex> entries) {
  const std::size_t n = entries.size();
  OperatorMatrix l = OperatorMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) l(a, a) = entries[a];
  return TrivializationFamily(
      n, [l](double) { return l; },
      [n](double) {
        const auto m = static_cast<Eigen::Index>(n);
        return OperatorMatrix(OperatorMatrix::Zero(m, m));
      },
      "constant_diagonal");
}

TrivializationFamily random_smooth_unitary(std::size_t n, std::uint64_t seed,
                                           std::size_t degree, double scale) {
  Rng rng(seed);
  std::vector<OperatorMatrix> coefficients;
  for (std::size_t k = 0; k <= degree; ++k) {
    coefficients.push_back(random_anti_hermitian(n, rng, scale));
  }
  auto generator = [coefficients](double t) {
    OperatorMatrix k = coefficients.back();
    for (std::size_t i = coefficients.size() - 1; i-- > 0;) k = OperatorMatrix(k * t + coefficients[i]);
    return k;
  };
  auto generator_rate = [coefficients](double t) {
    const auto m = coefficients.front().rows();
    OperatorMatrix k = OperatorMatrix::Zero(m, m);
    for (std::size_t i = coefficients.size() - 1; i >= 1; --i) {
      k = OperatorMatrix(k * t + static_cast<double>(i) * coefficients[i]);
    }
    return k;
  };
  auto eval = [generator](double t) { return matrix_exponential(generator(t)); };
  auto derivative = [generator, generator_rate, n](double t) {
    const auto m = static_cast<Eigen::Index>(n);
    OperatorMatrix block = OperatorMatrix::Zero(2 * m, 2 * m);
    const OperatorMatrix k = generator(t);
    block.topLeftCorner(m, m) = k;
    block.bottomRightCorner(m, m) = k;
    block.topRightCorner(m, m) = generator_rate(t);
    return OperatorMatrix(matrix_exponential(block).topRightCorner(m, m));
  };
  return TrivializationFamily(n, std::move(eval), std::move(derivative),
                              "random_smooth_unitary");
}

PointTrivialization position_phase(std::vector<Eigen::VectorXd> wavevectors) {
  PointTrivialization l;
  l.dimension = wavevectors.size();
  l.name = "position_phase";
  l.eval = [wavevectors](const BasePoint& x) {
    const auto m = static_cast<Eigen::Index>(wavevectors.size());
    OperatorMatrix out = OperatorMatrix::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) out(a, a) = std::polar(1.0, wavevectors[a].dot(x));
    return out;
  };
  l.directional_derivative = [wavevectors](const BasePoint& x, const Eigen::VectorXd& v) {
    const auto m = static_cast<Eigen::Index>(wavevectors.size());
    OperatorMatrix out = OperatorMatrix::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      out(a, a) = kI * wavevectors[a].dot(v) * std::polar(1.0, wavevectors[a].dot(x));
    }
    return out;
  };
  return l;
}

}  // namespace trivializations

FibreVector lift_vector(const TrivializationFamily& l, double t, const StateVector& psi) {
  const OperatorMatrix inv = l.inverse_at(t);
  require_same_dimension(inv, psi, "lift_vector");
  return inv * psi;
}

OperatorMatrix lift_operator(const TrivializationFamily& l, double t, const OperatorMatrix& a) {
  const OperatorMatrix inv = l.inverse_at(t);
  require_same_dimension(inv, a, "lift_operator");
  return inv * a * l.at(t);
}

StateVector lower_vector(const TrivializationFamily& l, double t, const FibreVector& psi) {
  const OperatorMatrix m = l.at(t);
  require_same_dimension(m, psi, "lower_vector");
  return m * psi;
}

OperatorMatrix lower_operator(const TrivializationFamily& l, double t, const OperatorMatrix& a) {
  const OperatorMatrix inv = l.inverse_at(t);
  require_same_dimension(inv, a, "lower_operator");
  return l.at(t) * a * inv;
}

Complex fibre_inner_product(const TrivializationFamily& l, double t, const FibreVector& u,
                            const FibreVector& v) {
  // Invertibility is part of the contract even though only l is applied.
  (void)l.inverse_at(t);
  const OperatorMatrix m = l.at(t);
  require_same_dimension(m, u, "fibre_inner_product");
  require_same_dimension(u, v, "fibre_inner_product");
  return inner_product(StateVector(m * u), StateVector(m * v));
}

OperatorMatrix bundle_adjoint_morphism(const TrivializationFamily& l, double t,
                                       const OperatorMatrix& a_fibre) {
  const OperatorMatrix m = l.at(t);
  const OperatorMatrix inv = l.inverse_at(t);
  require_same_dimension(m, a_fibre, "bundle_adjoint_morphism");
  return inv * (m * a_fibre * inv).adjoint() * m;
}

OperatorMatrix bundle_adjoint_map(const TrivializationFamily& l, double s, double t,
                                  const OperatorMatrix& a_map) {
  (void)l.inverse_at(s);
  const OperatorMatrix ls = l.at(s);
  const OperatorMatrix lt_inv = l.inverse_at(t);
  require_same_dimension(ls, a_map, "bundle_adjoint_map");
  return lt_inv * (ls * a_map * lt_inv).adjoint() * ls;
}

std::vector<FibreVector> basis_field(const TrivializationFamily& l, double t,
                                     const std::vector<StateVector>& frame) {
  if (frame.empty()) fail(ErrorCode::InvalidArgument, "basis_field: empty frame");
  const auto n = frame.front().size();
  OperatorMatrix columns(n, static_cast<Eigen::Index>(frame.size()));
  for (std::size_t a = 0; a < frame.size(); ++a) {
    require_same_dimension(frame.front(), frame[a], "basis_field");
    columns.col(static_cast<Eigen::Index>(a)) = frame[a];
  }
  Eigen::ColPivHouseholderQR<OperatorMatrix> qr(columns);
  qr.setThreshold(1e-12);
  if (static_cast<std::size_t>(qr.rank()) != frame.size()) {
    fail(ErrorCode::InvalidArgument, "basis_field: frame vectors are linearly dependent");
  }
  const OperatorMatrix inv = l.inverse_at(t);
  std::vector<FibreVector> out;
  out.reserve(frame.size());
  for (const auto& f : frame) {
    require_same_dimension(inv, f, "basis_field");
    out.push_back(inv * f);
  }
  return out;
}

GlobalSection::GlobalSection(PointTrivialization l, StateVector phi)
    : l_(std::move(l)), phi_(std::move(phi)) {
  if (!l_.eval) fail(ErrorCode::InvalidArgument, "global section needs a trivialization");
  if (static_cast<std::size_t>(phi_.size()) != l_.dimension) {
    fail(ErrorCode::DimensionMismatch, "global section vector has wrong dimension");
  }
}

FibreVector GlobalSection::at(const BasePoint& x) const {
  return checked_inverse(l_.eval(x), kDefaultInverseTolerance) * phi_;
}

SectionAlongPath GlobalSection::along(const Path& path, double spatial_tol) const {
  if (!self_intersections(path, spatial_tol).empty()) {
    fail(ErrorCode::InvalidArgument,
         "global sections are only restricted to paths without self-intersections");
  }
  SectionAlongPath out{path.grid(), {}};
  out.values.reserve(path.points().size());
  for (const auto& x : path.points()) out.values.push_back(at(x));
  return out;
}

SectionAlongPath lift_states(const TrivializationFamily& l, const TimeGrid& grid,
                             const std::vector<StateVector>& states) {
  if (states.size() != grid.size()) {
    fail(ErrorCode::GridMismatch, "lift_states: one state per grid node required");
  }
  SectionAlongPath out{grid, {}};
  out.values.reserve(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    out.values.push_back(lift_vector(l, grid.time(k), states[k]));
  }
  return out;
}

MorphismAlongPath lift_observable(const TrivializationFamily& l, const TimeGrid& grid,
                                  const MatrixFunction& observable) {
  MorphismAlongPath out{grid, {}};
  out.values.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    out.values.push_back(lift_operator(l, t, observable(t)));
  }
  return out;
}

SectionAlongPath module_combine(const ScalarField& f, const SectionAlongPath& phi,
                                const ScalarField& g, const SectionAlongPath& psi) {
  require_same_grid(f.grid, phi.grid, "module_combine");
  require_same_grid(g.grid, psi.grid, "module_combine");
  require_same_grid(phi.grid, psi.grid, "module_combine");
  SectionAlongPath out{phi.grid, {}};
  out.values.reserve(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    require_same_dimension(phi[k], psi[k], "module_combine");
    out.values.push_back(f[k] * phi[k] + g[k] * psi[k]);
  }
  return out;
}

ScalarField section_inner(const TrivializationFamily& l, const SectionAlongPath& phi,
                          const SectionAlongPath& psi) {
  require_same_grid(phi.grid, psi.grid, "section_inner");
  ScalarField out{phi.grid, {}};
  out.values.reserve(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    out.values.push_back(fibre_inner_product(l, phi.grid.time(k), phi[k], psi[k]));
  }
  return out;
}

SectionAlongPath morphism_as_section_operator(const MorphismAlongPath& a,
                                              const SectionAlongPath& phi) {
  require_same_grid(a.grid, phi.grid, "morphism_as_section_operator");
  SectionAlongPath out{phi.grid, {}};
  out.values.reserve(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    require_same_dimension(a[k], phi[k], "morphism_as_section_operator");
    out.values.push_back(a[k] * phi[k]);
  }
  return out;
}

MorphismAlongPath section_operator_as_morphism(const SectionOperator& b, const TimeGrid& grid,
                                               std::size_t dimension, double tol) {
  const auto n = static_cast<Eigen::Index>(dimension);
  const FibreVector zero = FibreVector::Zero(n);
  MorphismAlongPath out{grid, std::vector<OperatorMatrix>(grid.size(), OperatorMatrix::Zero(n, n))};

  SectionAlongPath probe{grid, std::vector<FibreVector>(grid.size(), zero)};
  auto apply = [&](const SectionAlongPath& in) {
    SectionAlongPath result = b(in);
    if (!(result.grid == grid) || result.size() != grid.size()) {
      fail(ErrorCode::GridMismatch, "section operator changed the grid");
    }
    for (const auto& v : result.values) {
      if (v.size() != n) fail(ErrorCode::DimensionMismatch, "section operator changed dimension");
    }
    return result;
  };

  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (Eigen::Index a = 0; a < n; ++a) {
      probe.values[k] = zero;
      probe.values[k](a) = 1.0;
      const SectionAlongPath response = apply(probe);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        if (j == k) continue;
        if (max_abs(response[j]) > tol) {
          fail(ErrorCode::NotPointwise,
               "section operator couples t=" + std::to_string(grid.time(k)) + " into t=" +
                   std::to_string(grid.time(j)));
        }
      }
      out.values[k].col(a) = response[k];
    }
    probe.values[k] = zero;
  }

  // Linear probes cannot see affine or nonlinear parts; compare on one
  // random section as well.
  Rng rng(0x5eedULL);
  SectionAlongPath sample{grid, {}};
  sample.values.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) sample.values.push_back(random_state(dimension, rng));
  const SectionAlongPath direct = apply(sample);
  const SectionAlongPath via_morphism = morphism_as_section_operator(out, sample);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double scale = 1.0 + max_abs(direct[k]);
    if (max_abs_diff(direct[k], via_morphism[k]) > tol + 1e-12 * scale) {
      fail(ErrorCode::NotPointwise,
           "section operator is not a pointwise linear map at t=" + std::to_string(grid.time(k)));
    }
  }
  return out;
}

}  // namespace fqm
