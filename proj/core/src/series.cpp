#include "trajfill/series.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "trajfill/error.hpp"

namespace trajfill {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kPolicy: return "policy";
    case ErrorKind::kCollision: return "collision";
    case ErrorKind::kCalibrationFailed: return "calibration-failed";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kScoring: return "scoring";
  }
  return "unknown";
}

std::size_t samples_for(double seconds, double h) {
  if (!(h > 0.0) || !(seconds >= 0.0)) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("bad duration {} s at step {} s", seconds, h));
  }
  return static_cast<std::size_t>(std::llround(seconds / h));
}

namespace {

bool on_grid(double t, double h) {
  const double k = std::round(t / h);
  return k >= 0.0 && std::abs(t - k * h) <= kGridTolerance * std::max(1.0, k);
}

}  // namespace

Trajectory::Trajectory(std::vector<SamplePoint> points, std::optional<double> vehicle_length,
                       std::string id)
    : points_(std::move(points)), vehicle_length_(vehicle_length), id_(std::move(id)) {
  if (points_.size() < 2) {
    throw Error(ErrorKind::kInvalidInput, "trajectory needs at least 2 samples");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!on_grid(p.t, kSampleInterval)) {
      throw Error(ErrorKind::kInvalidInput, fmt::format("t={} is off the 0.1 s grid", p.t), i);
    }
    if (i > 0) {
      const double dt = p.t - points_[i - 1].t;
      if (std::abs(dt - kSampleInterval) > 1e-6) {
        throw Error(ErrorKind::kInvalidInput,
                    fmt::format("non-uniform step {} s before t={}", dt, p.t), i);
      }
    }
    if (p.v && (*p.v < 0.0 || !std::isfinite(*p.v))) {
      throw Error(ErrorKind::kInvalidInput, fmt::format("negative speed at t={}", p.t), i);
    }
    if (p.x && !std::isfinite(*p.x)) {
      throw Error(ErrorKind::kInvalidInput, fmt::format("non-finite position at t={}", p.t), i);
    }
  }
  if (present_count() < 2) {
    throw Error(ErrorKind::kInvalidInput, "trajectory needs at least 2 present positions");
  }
  if (vehicle_length_ && !(*vehicle_length_ > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "vehicle length must be positive");
  }
}

Trajectory Trajectory::from_positions(double t0, std::span<const std::optional<double>> x,
                                      std::optional<double> vehicle_length, std::string id,
                                      double h) {
  std::vector<SamplePoint> points(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    points[i].t = t0 + static_cast<double>(i) * h;
    points[i].x = x[i];
  }
  return Trajectory(std::move(points), vehicle_length, std::move(id));
}

std::size_t Trajectory::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(points_.begin(), points_.end(), [](const SamplePoint& p) { return p.x.has_value(); }));
}

bool Trajectory::has_speed() const {
  return std::any_of(points_.begin(), points_.end(), [](const SamplePoint& p) { return p.v.has_value(); });
}

HeadwaySeries::HeadwaySeries(double t0, std::vector<std::optional<double>> s, double h)
    : t0_(t0), h_(h), s_(std::move(s)) {
  if (s_.size() < 2) {
    throw Error(ErrorKind::kInvalidInput, "headway series needs at least 2 samples");
  }
  if (!(h_ > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "sample interval must be positive");
  }
  if (!on_grid(t0_, h_)) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("t0={} is off the sample grid", t0_));
  }
  for (std::size_t i = 0; i < s_.size(); ++i) {
    if (s_[i] && !(*s_[i] > 0.0 && std::isfinite(*s_[i]))) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("headway {} at sample {} is not a positive finite value", *s_[i], i), i);
    }
  }
}

double HeadwaySeries::at(std::size_t i) const {
  if (i >= s_.size() || !s_[i]) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("headway sample {} is missing", i), i);
  }
  return *s_[i];
}

std::size_t HeadwaySeries::missing_count() const {
  return static_cast<std::size_t>(
      std::count_if(s_.begin(), s_.end(), [](const auto& v) { return !v.has_value(); }));
}

HeadwaySeries HeadwaySeries::with_values(std::vector<std::optional<double>> s) const {
  return HeadwaySeries(t0_, std::move(s), h_);
}

VehiclePair::VehiclePair(Trajectory leader, Trajectory follower, HeadwaySeries headway,
                         double tolerance)
    : leader_(std::move(leader)), follower_(std::move(follower)), headway_(std::move(headway)) {
  const std::size_t n = headway_.size();
  if (leader_.size() != n || follower_.size() != n) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("pair grids differ: leader {}, follower {}, headway {}", leader_.size(),
                            follower_.size(), n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double t = headway_.time_at(i);
    if (std::abs(leader_[i].t - t) > 1e-6 || std::abs(follower_[i].t - t) > 1e-6) {
      throw Error(ErrorKind::kInvalidInput, fmt::format("pair time grids differ at sample {}", i), i);
    }
  }
  const double length = leader_.vehicle_length().value_or(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& xl = leader_[i].x;
    const auto& xf = follower_[i].x;
    if (xl && xf && headway_[i]) {
      const double expected = *xl - *xf - length;
      if (std::abs(expected - *headway_[i]) > tolerance) {
        throw Error(ErrorKind::kInvalidInput,
                    fmt::format("headway {} disagrees with positions ({}) at sample {}",
                                *headway_[i], expected, i),
                    i);
      }
    }
  }
}

std::string VehiclePair::id() const {
  if (leader_.id().empty() && follower_.id().empty()) return {};
  return fmt::format("{}-{}", follower_.id(), leader_.id());
}

VehiclePair VehiclePair::with_headway(HeadwaySeries headway) const {
  std::vector<SamplePoint> leader_points = leader_.points();
  const auto& length = leader_.vehicle_length();
  for (std::size_t i = 0; i < leader_points.size() && i < headway.size(); ++i) {
    const auto& xf = follower_[i].x;
    if (headway[i] && xf && length) {
      leader_points[i].x = *xf + *length + *headway[i];
    } else if (!headway[i]) {
      leader_points[i].x.reset();
      leader_points[i].v.reset();
    }
  }
  // Leader with fewer than 2 present positions cannot be a Trajectory;
  // keep positions only where the follower side allows reconstructing them.
  Trajectory leader = [&] {
    std::size_t present = 0;
    for (const auto& p : leader_points) present += p.x.has_value() ? 1 : 0;
    if (present >= 2) return Trajectory(std::move(leader_points), length, leader_.id());
    return leader_;
  }();
  return VehiclePair(std::move(leader), follower_, std::move(headway), 1e-4);
}

bool GapSpec::has_edges() const {
  return first_missing > 0 && last_missing + 1 < series_size;
}

std::vector<GapSpec> detect_gaps(const HeadwaySeries& series, double required_context_s) {
  if (series.size() == 0) {
    throw Error(ErrorKind::kInvalidInput, "empty headway series");
  }
  const std::size_t window = samples_for(required_context_s, series.h());
  const std::size_t n = series.size();

  std::vector<GapSpec> gaps;
  std::size_t i = 0;
  while (i < n) {
    if (series.present(i)) {
      ++i;
      continue;
    }
    GapSpec gap;
    gap.first_missing = i;
    while (i < n && !series.present(i)) ++i;
    gap.last_missing = i - 1;
    gap.series_size = n;
    gaps.push_back(gap);
  }

  auto all_present = [&](const IndexRange& r) {
    for (std::size_t k = r.first; k <= r.last; ++k) {
      if (!series.present(k)) return false;
    }
    return true;
  };

  for (auto& gap : gaps) {
    if (window > 0 && gap.first_missing >= window) {
      gap.before_window = IndexRange{gap.first_missing - window, gap.first_missing - 1};
    }
    if (window > 0 && gap.last_missing + window < n) {
      gap.after_window = IndexRange{gap.last_missing + 1, gap.last_missing + window};
    }
    gap.reconstructable = gap.before_window && gap.after_window &&
                          all_present(*gap.before_window) && all_present(*gap.after_window);
  }
  return gaps;
}

HeadwaySeries linear_fill(const HeadwaySeries& series, const GapSpec& gap, double limit_s) {
  const double duration = gap.duration(series.h());
  if (duration >= limit_s - kGridTolerance) {
    throw Error(ErrorKind::kPolicy,
                fmt::format("gap of {:.1f} s is not shorter than {:.1f} s; use model-based "
                            "reconstruction",
                            duration, limit_s),
                gap.first_missing);
  }
  if (!gap.has_edges() || gap.last_missing >= series.size()) {
    throw Error(ErrorKind::kInvalidInput, "gap has no present sample on one side",
                gap.first_missing);
  }
  const std::size_t lo = gap.edge_before();
  const std::size_t hi = gap.edge_after();
  const double s_lo = series.at(lo);
  const double s_hi = series.at(hi);
  const double span = static_cast<double>(hi - lo);

  std::vector<std::optional<double>> values = series.values();
  for (std::size_t k = gap.first_missing; k <= gap.last_missing; ++k) {
    if (values[k]) {
      throw Error(ErrorKind::kInvalidInput, fmt::format("sample {} inside the gap is present", k), k);
    }
    const double frac = static_cast<double>(k - lo) / span;
    values[k] = s_lo + (s_hi - s_lo) * frac;
  }
  return series.with_values(std::move(values));
}

Trajectory estimate_speed(const Trajectory& traj) {
  const auto& pts = traj.points();
  if (traj.present_count() < 2) {
    throw Error(ErrorKind::kInvalidInput, "speed estimation needs at least 2 present positions");
  }
  std::vector<SamplePoint> out = pts;
  const std::size_t n = pts.size();
  std::size_t i = 0;
  while (i < n) {
    if (!pts[i].x) {
      out[i].v.reset();
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && pts[j + 1].x) ++j;
    // run [i, j]
    if (j == i) {
      out[i].v.reset();
    } else {
      for (std::size_t k = i; k <= j; ++k) {
        double v = 0.0;
        if (k == i) {
          v = (*pts[k + 1].x - *pts[k].x) / (pts[k + 1].t - pts[k].t);
        } else if (k == j) {
          v = (*pts[k].x - *pts[k - 1].x) / (pts[k].t - pts[k - 1].t);
        } else {
          v = (*pts[k + 1].x - *pts[k - 1].x) / (pts[k + 1].t - pts[k - 1].t);
        }
        out[k].v = std::max(0.0, v);
      }
    }
    i = j + 1;
  }
  return Trajectory(std::move(out), traj.vehicle_length(), traj.id());
}

}  // namespace trajfill
