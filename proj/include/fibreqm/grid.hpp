#pragma once

#include <cstddef>
#include <vector>

namespace fqm {

/// Uniform time grid t_k = t0 + k·(t1 − t0)/steps, k = 0..steps.
///
/// Every quantity "along a path" is keyed by a grid index, never by the base
/// point it sits over, so self-intersecting paths stay single-valued in
/// storage. Node and midpoint times are computed by one formula here so that
/// the conventional and bundle integrators see bit-identical sample times.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double t0, double t1, std::size_t steps);

  /// Grid over [t0, t1] whose spacing is the largest value ≤ `step` that
  /// divides the interval evenly.
  static TimeGrid from_step(double t0, double t1, double step);

  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t1_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_ + 1; }
  double spacing() const noexcept { return (t1_ - t0_) / static_cast<double>(steps_); }

  double time(std::size_t k) const;
  /// Midpoint of [t_k, t_{k+1}].
  double midpoint(std::size_t k) const;

  /// Index of a grid-aligned time. Throws OffGrid when `t` is further than a
  /// small fraction of the spacing from every node.
  std::size_t index_of(double t) const;
  bool contains(double t) const noexcept;

  std::vector<double> times() const;

  /// Every `stride`-th node, always including the last one.
  std::vector<std::size_t> strided_indices(std::size_t max_points) const;

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept {
    return a.t0_ == b.t0_ && a.t1_ == b.t1_ && a.steps_ == b.steps_;
  }

 private:
  double t0_ = 0.0;
  double t1_ = 1.0;
  std::size_t steps_ = 1;
};

/// Throws GridMismatch unless both grids are identical.
void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what);

}  // namespace fqm
