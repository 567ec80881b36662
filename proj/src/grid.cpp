#include "fibreqm/grid.hpp"

#include <cmath>
#include <string>

#include "fibreqm/errors.hpp"

namespace fqm {

namespace {
constexpr double kAlignmentFraction = 1e-6;
}

TimeGrid::TimeGrid(double t0, double t1, std::size_t steps)
    : t0_(t0), t1_(t1), steps_(steps) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t0 < t1)) {
    fail(ErrorCode::InvalidArgument, "time grid requires finite t0 < t1");
  }
  if (steps < 1) {
    fail(ErrorCode::InvalidArgument, "time grid requires at least one step");
  }
}

TimeGrid TimeGrid::from_step(double t0, double t1, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    fail(ErrorCode::InvalidArgument, "step must be positive and finite");
  }
  if (!(t0 < t1)) {
    fail(ErrorCode::InvalidArgument, "time grid requires t0 < t1");
  }
  const double ratio = (t1 - t0) / step;
  auto steps = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
  if (steps < 1) steps = 1;
  return TimeGrid(t0, t1, steps);
}

double TimeGrid::time(std::size_t k) const {
  if (k > steps_) {
    fail(ErrorCode::OffGrid, "grid index " + std::to_string(k) + " out of range");
  }
  if (k == steps_) return t1_;
  return t0_ + static_cast<double>(k) * spacing();
}

double TimeGrid::midpoint(std::size_t k) const {
  if (k >= steps_) {
    fail(ErrorCode::OffGrid, "midpoint index " + std::to_string(k) + " out of range");
  }
  return 0.5 * (time(k) + time(k + 1));
}

bool TimeGrid::contains(double t) const noexcept {
  if (!std::isfinite(t)) return false;
  const double h = spacing();
  const double pos = (t - t0_) / h;
  const double k = std::round(pos);
  return k >= 0.0 && k <= static_cast<double>(steps_) &&
         std::abs(pos - k) <= kAlignmentFraction;
}

std::size_t TimeGrid::index_of(double t) const {
  if (!contains(t)) {
    fail(ErrorCode::OffGrid, "time " + std::to_string(t) + " is not on the grid");
  }
  return static_cast<std::size_t>(std::round((t - t0_) / spacing()));
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = time(k);
  return out;
}

std::vector<std::size_t> TimeGrid::strided_indices(std::size_t max_points) const {
  if (max_points < 2) max_points = 2;
  const std::size_t stride = (steps_ + max_points - 2) / (max_points - 1);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < steps_; k += (stride == 0 ? 1 : stride)) out.push_back(k);
  out.push_back(steps_);
  return out;
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
  if (!(a == b)) {
    fail(ErrorCode::GridMismatch, std::string(what) + ": operands use different time grids");
  }
}

}  // namespace fqm
