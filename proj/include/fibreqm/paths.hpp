#pragma once

// Base spaces M and observer paths γ: J → M.
//
// The base carries no metric or connection; it is bookkeeping for where the
// observer sits. Dynamics only ever sees the path parameter t.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fibreqm/grid.hpp"

namespace fqm {

using BasePoint = Eigen::VectorXd;

struct EuclideanBase {
  std::size_t dim = 3;
  /// Set for space-time bases (M⁴, V₄) whose world lines must not cross
  /// themselves.
  bool require_injective_paths = false;
};

struct IntervalBase {
  double a = 0.0;
  double b = 1.0;
};

struct SinglePointBase {};

class BaseSpace {
 public:
  using Variant = std::variant<EuclideanBase, IntervalBase, SinglePointBase>;

  static BaseSpace euclidean(std::size_t dim, bool require_injective_paths = false);
  static BaseSpace interval(double a, double b);
  static BaseSpace single_point();

  const Variant& variant() const noexcept { return variant_; }
  /// Coordinate dimension of a point: d, 1 or 0.
  std::size_t point_dimension() const noexcept;
  bool contains(const BasePoint& x) const;
  bool requires_injective_paths() const noexcept;
  std::string describe() const;

 private:
  explicit BaseSpace(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

using PathMap = std::function<BasePoint(double)>;

/// γ sampled on a uniform grid. `velocity`, when present, is dγ/dt; it is
/// only needed by point-indexed trivializations.
class Path {
 public:
  const BaseSpace& base() const noexcept { return base_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const std::vector<BasePoint>& points() const noexcept { return points_; }
  const BasePoint& point(std::size_t k) const { return points_.at(k); }

  BasePoint at(double t) const;
  bool has_velocity() const noexcept { return static_cast<bool>(velocity_); }
  Eigen::VectorXd velocity(double t) const;

 private:
  friend Path make_path(const BaseSpace&, double, double, PathMap, std::size_t, PathMap);
  BaseSpace base_ = BaseSpace::single_point();
  TimeGrid grid_;
  PathMap eval_;
  PathMap velocity_;
  std::vector<BasePoint> points_;
};

/// Samples γ on a uniform grid of `samples` points over [t0, t1] and
/// validates every sample against the base. Throws InvalidArgument for a
/// degenerate domain, EvaluationFailure when γ is undefined or leaves M.
Path make_path(const BaseSpace& base, double t0, double t1, PathMap eval,
               std::size_t samples, PathMap velocity = {});

struct SelfIntersection {
  std::size_t i = 0;
  std::size_t j = 0;
  double t = 0.0;
  double s = 0.0;
  double distance = 0.0;
};

/// Brute-force scan for grid pairs with ‖γ(t) − γ(s)‖ ≤ spatial_tol, t ≠ s.
/// Both orderings of every pair are reported.
std::vector<SelfIntersection> self_intersections(const Path& path, double spatial_tol);

/// Common path shapes.
namespace paths {
PathMap identity();
PathMap constant(BasePoint x);
PathMap line(BasePoint origin, Eigen::VectorXd velocity);
PathMap line_velocity(Eigen::VectorXd velocity);
/// Circle of `radius` in the first two coordinates of a d-dimensional space.
PathMap circle(std::size_t dim, double radius, double angular_speed);
PathMap circle_velocity(std::size_t dim, double radius, double angular_speed);
}  // namespace paths

}  // namespace fqm
