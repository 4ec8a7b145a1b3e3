#pragma once

// Leader headway from decoded LIDAR scans.
//
// Points are in the ego frame, right-handed, +y forward, z up. Each scan
// is cut down to the ego lane ahead of the vehicle, clustered in the ground
// plane, and the nearest surviving cluster gives that scan's headway.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "trajfill/series.hpp"

namespace trajfill {

struct Point3 {
  double x = 0.0;  // lateral, m
  double y = 0.0;  // forward, m
  double z = 0.0;  // elevation, m
};

struct PointScan {
  std::int64_t scan_id = 0;
  std::vector<Point3> points;
};

struct FilterConfig {
  double z_min = 0.3;
  double z_max = 2.5;
  double lane_half_width = 1.8;
  std::size_t min_cluster_points = 4;
  double cluster_radius = 0.7;

  void validate() const;
};

// Keeps z in [z_min, z_max], |x| <= lane_half_width and y > 0.
PointScan filter_scan(const PointScan& scan, const FilterConfig& cfg);

// Single-linkage clusters in (x, y) with linkage radius cluster_radius;
// clusters smaller than min_cluster_points are dropped. Returns the
// smallest planar range sqrt(x^2 + y^2) over the surviving clusters.
std::optional<double> nearest_cluster_distance(const PointScan& scan, const FilterConfig& cfg);

// One sample per scan at t = scan_id * 0.1 s. Scan ids must be consecutive.
HeadwaySeries scans_to_headway(const std::vector<PointScan>& scans, const FilterConfig& cfg);

// Text blocks: a `# scan <id>` line followed by `x y z` rows.
std::vector<PointScan> read_scans(std::istream& in);
std::vector<PointScan> read_scan_file(const std::filesystem::path& path);
void write_scans(std::ostream& out, const std::vector<PointScan>& scans);

}  // namespace trajfill
