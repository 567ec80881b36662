#include "fibreqm/paths.hpp"

#include <cmath>
#include <utility>

#include "fibreqm/errors.hpp"

namespace fqm {

namespace {
template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;
}  // namespace

BaseSpace BaseSpace::euclidean(std::size_t dim, bool require_injective_paths) {
  if (dim < 1) fail(ErrorCode::InvalidArgument, "Euclidean base requires d >= 1");
  return BaseSpace(EuclideanBase{dim, require_injective_paths});
}

BaseSpace BaseSpace::interval(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    fail(ErrorCode::InvalidArgument, "interval base requires finite a < b");
  }
  return BaseSpace(IntervalBase{a, b});
}

BaseSpace BaseSpace::single_point() { return BaseSpace(SinglePointBase{}); }

std::size_t BaseSpace::point_dimension() const noexcept {
  return std::visit(Overloaded{[](const EuclideanBase& e) { return e.dim; },
                               [](const IntervalBase&) { return std::size_t{1}; },
                               [](const SinglePointBase&) { return std::size_t{0}; }},
                    variant_);
}

bool BaseSpace::contains(const BasePoint& x) const {
  if (static_cast<std::size_t>(x.size()) != point_dimension()) return false;
  if (!x.allFinite()) return false;
  if (const auto* j = std::get_if<IntervalBase>(&variant_)) {
    // Sample times are computed in floating point; allow a rounding margin.
    const double margin = 1e-12 * std::max(1.0, std::abs(j->b - j->a));
    return x(0) >= j->a - margin && x(0) <= j->b + margin;
  }
  return true;
}

bool BaseSpace::requires_injective_paths() const noexcept {
  if (const auto* e = std::get_if<EuclideanBase>(&variant_)) return e->require_injective_paths;
  return false;
}

std::string BaseSpace::describe() const {
  return std::visit(
      Overloaded{[](const EuclideanBase& e) { return "euclidean(" + std::to_string(e.dim) + ")"; },
                 [](const IntervalBase& j) {
                   return "interval[" + std::to_string(j.a) + ", " + std::to_string(j.b) + "]";
                 },
                 [](const SinglePointBase&) { return std::string("single_point"); }},
      variant_);
}

BasePoint Path::at(double t) const { return eval_(t); }

Eigen::VectorXd Path::velocity(double t) const {
  if (!velocity_) fail(ErrorCode::MissingDerivative, "path has no velocity");
  return velocity_(t);
}

Path make_path(const BaseSpace& base, double t0, double t1, PathMap eval,
               std::size_t samples, PathMap velocity) {
  if (samples < 2) fail(ErrorCode::InvalidArgument, "a path needs at least 2 samples");
  if (!(t0 < t1) || !std::isfinite(t0) || !std::isfinite(t1)) {
    fail(ErrorCode::InvalidArgument, "path domain must satisfy t0 < t1");
  }
  if (!eval) fail(ErrorCode::EvaluationFailure, "path has no evaluator");

  Path p;
  p.base_ = base;
  p.grid_ = TimeGrid(t0, t1, samples - 1);
  p.eval_ = std::move(eval);
  p.velocity_ = std::move(velocity);
  p.points_.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = p.grid_.time(k);
    BasePoint x = p.eval_(t);
    if (!base.contains(x)) {
      fail(ErrorCode::EvaluationFailure,
           "path leaves " + base.describe() + " at t=" + std::to_string(t));
    }
    p.points_.push_back(std::move(x));
  }
  // Revisits are judged to rounding: cos(x) and cos(x + 2π) differ in the last bits.
  if (base.requires_injective_paths() && !self_intersections(p, 1e-12).empty()) {
    fail(ErrorCode::EvaluationFailure, "world line on " + base.describe() +
                                           " must not self-intersect");
  }
  return p;
}

std::vector<SelfIntersection> self_intersections(const Path& path, double spatial_tol) {
  if (!(spatial_tol >= 0.0)) fail(ErrorCode::InvalidArgument, "spatial_tol must be >= 0");
  std::vector<SelfIntersection> out;
  const auto& pts = path.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = pts[i].size() == 0 ? 0.0 : (pts[i] - pts[j]).norm();
      if (d <= spatial_tol) {
        const double ti = path.grid().time(i);
        const double tj = path.grid().time(j);
        out.push_back({i, j, ti, tj, d});
        out.push_back({j, i, tj, ti, d});
      }
    }
  }
  return out;
}

namespace paths {

PathMap identity() {
  return [](double t) { return BasePoint::Constant(1, t); };
}

PathMap constant(BasePoint x) {
  return [x = std::move(x)](double) { return x; };
}

PathMap line(BasePoint origin, Eigen::VectorXd velocity) {
  return [origin = std::move(origin), velocity = std::move(velocity)](double t) {
    return BasePoint(origin + t * velocity);
  };
}

PathMap line_velocity(Eigen::VectorXd velocity) {
  return [velocity = std::move(velocity)](double) { return velocity; };
}

PathMap circle(std::size_t dim, double radius, double angular_speed) {
  return [=](double t) {
    BasePoint x = BasePoint::Zero(static_cast<Eigen::Index>(dim));
    x(0) = radius * std::cos(angular_speed * t);
    if (dim > 1) x(1) = radius * std::sin(angular_speed * t);
    return x;
  };
}

PathMap circle_velocity(std::size_t dim, double radius, double angular_speed) {
  return [=](double t) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    v(0) = -radius * angular_speed * std::sin(angular_speed * t);
    if (dim > 1) v(1) = radius * angular_speed * std::cos(angular_speed * t);
    return v;
  };
}

}  // namespace paths

}  // namespace fqm
