#pragma once

// Core time-series and trajectory types on a fixed 10 Hz grid.
//
// Missing samples are always explicit (std::optional), never sentinel
// numbers. Headway is bumper-to-bumper clearance:
//   s = x_leader - x_follower - leader_length.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trajfill {

inline constexpr double kSampleInterval = 0.1;
inline constexpr double kGridTolerance = 1e-9;
inline constexpr double kDefaultContextSeconds = 5.0;
inline constexpr double kShortGapLimitSeconds = 5.0;

// Number of whole samples spanned by `seconds` on a grid of step `h`.
std::size_t samples_for(double seconds, double h = kSampleInterval);

struct SamplePoint {
  double t = 0.0;
  std::optional<double> x;
  std::optional<double> v;
};

class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<SamplePoint> points, std::optional<double> vehicle_length = std::nullopt,
             std::string id = {});

  // Positions on a regular grid starting at t0; speeds left missing.
  static Trajectory from_positions(double t0, std::span<const std::optional<double>> x,
                                   std::optional<double> vehicle_length = std::nullopt,
                                   std::string id = {}, double h = kSampleInterval);

  const std::vector<SamplePoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const SamplePoint& operator[](std::size_t i) const { return points_[i]; }
  const std::optional<double>& vehicle_length() const { return vehicle_length_; }
  const std::string& id() const { return id_; }
  double t0() const { return points_.front().t; }

  std::size_t present_count() const;
  bool has_speed() const;

 private:
  std::vector<SamplePoint> points_;
  std::optional<double> vehicle_length_;
  std::string id_;
};

class HeadwaySeries {
 public:
  HeadwaySeries() = default;
  HeadwaySeries(double t0, std::vector<std::optional<double>> s, double h = kSampleInterval);

  double t0() const { return t0_; }
  double h() const { return h_; }
  std::size_t size() const { return s_.size(); }
  double time_at(std::size_t i) const { return t0_ + static_cast<double>(i) * h_; }

  const std::vector<std::optional<double>>& values() const { return s_; }
  const std::optional<double>& operator[](std::size_t i) const { return s_[i]; }
  bool present(std::size_t i) const { return s_[i].has_value(); }
  double at(std::size_t i) const;  // throws if missing

  std::size_t missing_count() const;

  HeadwaySeries with_values(std::vector<std::optional<double>> s) const;

 private:
  double t0_ = 0.0;
  double h_ = kSampleInterval;
  std::vector<std::optional<double>> s_;
};

// Leader/follower trajectories plus their clearance series on one grid.
class VehiclePair {
 public:
  VehiclePair() = default;
  VehiclePair(Trajectory leader, Trajectory follower, HeadwaySeries headway,
              double tolerance = 1e-6);

  const Trajectory& leader() const { return leader_; }
  const Trajectory& follower() const { return follower_; }
  const HeadwaySeries& headway() const { return headway_; }
  std::string id() const;

  // Same pair with a new headway series; leader positions follow the
  // headway where the follower position and leader length are known.
  VehiclePair with_headway(HeadwaySeries headway) const;

 private:
  Trajectory leader_;
  Trajectory follower_;
  HeadwaySeries headway_;
};

struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive

  std::size_t size() const { return last - first + 1; }
  bool contains(std::size_t i) const { return i >= first && i <= last; }
  bool operator==(const IndexRange&) const = default;
};

struct GapSpec {
  std::size_t first_missing = 0;
  std::size_t last_missing = 0;
  // Empty when the window would fall off the series.
  std::optional<IndexRange> before_window;
  std::optional<IndexRange> after_window;
  // Context windows both exist and contain only present samples.
  bool reconstructable = false;

  std::size_t length() const { return last_missing - first_missing + 1; }
  double duration(double h = kSampleInterval) const { return static_cast<double>(length()) * h; }
  // False for runs touching either end of the series.
  bool has_edges() const;
  std::size_t edge_before() const { return first_missing - 1; }
  std::size_t edge_after() const { return last_missing + 1; }

  std::size_t series_size = 0;
};

// Maximal runs of missing samples, annotated with context windows of
// `required_context_s` on each side.
std::vector<GapSpec> detect_gaps(const HeadwaySeries& series,
                                 double required_context_s = kDefaultContextSeconds);

// Straight line between the two gap edges. Rejects gaps of `limit_s` or
// longer, which need model-based reconstruction.
HeadwaySeries linear_fill(const HeadwaySeries& series, const GapSpec& gap,
                          double limit_s = kShortGapLimitSeconds);

// Central differences inside each contiguous run of present positions,
// one-sided at run ends, clamped at zero.
Trajectory estimate_speed(const Trajectory& traj);

}  // namespace trajfill
