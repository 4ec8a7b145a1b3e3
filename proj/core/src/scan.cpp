#include "trajfill/scan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "trajfill/error.hpp"

namespace trajfill {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  std::size_t size_of(std::size_t i) { return size_[find(i)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

void FilterConfig::validate() const {
  if (!(z_min < z_max)) throw Error(ErrorKind::kInvalidInput, "z_min must be below z_max");
  if (!(lane_half_width > 0.0)) throw Error(ErrorKind::kInvalidInput, "lane_half_width must be > 0");
  if (!(cluster_radius > 0.0)) throw Error(ErrorKind::kInvalidInput, "cluster_radius must be > 0");
}

PointScan filter_scan(const PointScan& scan, const FilterConfig& cfg) {
  cfg.validate();
  PointScan out{scan.scan_id, {}};
  for (const auto& p : scan.points) {
    if (p.z >= cfg.z_min && p.z <= cfg.z_max && std::abs(p.x) <= cfg.lane_half_width && p.y > 0.0) {
      out.points.push_back(p);
    }
  }
  return out;
}

std::optional<double> nearest_cluster_distance(const PointScan& scan, const FilterConfig& cfg) {
  const auto& pts = scan.points;
  const std::size_t n = pts.size();
  if (n == 0) return std::nullopt;

  // Sweep in y so each point only checks neighbours within one radius.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a].y != pts[b].y) return pts[a].y < pts[b].y;
    return pts[a].x < pts[b].x;
  });
  const double r2 = cfg.cluster_radius * cfg.cluster_radius;
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = pts[order[i]];
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b = pts[order[j]];
      const double dy = b.y - a.y;
      if (dy > cfg.cluster_radius) break;
      const double dx = b.x - a.x;
      if (dx * dx + dy * dy <= r2) sets.unite(order[i], order[j]);
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (sets.size_of(i) < cfg.min_cluster_points) continue;
    best = std::min(best, std::hypot(pts[i].x, pts[i].y));
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

HeadwaySeries scans_to_headway(const std::vector<PointScan>& scans, const FilterConfig& cfg) {
  cfg.validate();
  if (scans.size() < 2) throw Error(ErrorKind::kInvalidInput, "need at least 2 scans");
  std::vector<std::optional<double>> values;
  values.reserve(scans.size());
  for (std::size_t i = 0; i < scans.size(); ++i) {
    if (i > 0 && scans[i].scan_id != scans[i - 1].scan_id + 1) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("scan ids jump from {} to {}", scans[i - 1].scan_id, scans[i].scan_id), i);
    }
    values.push_back(nearest_cluster_distance(filter_scan(scans[i], cfg), cfg));
  }
  if (scans.front().scan_id < 0) throw Error(ErrorKind::kInvalidInput, "scan ids must be non-negative");
  return HeadwaySeries(static_cast<double>(scans.front().scan_id) * kSampleInterval, std::move(values));
}

std::vector<PointScan> read_scans(std::istream& in) {
  std::vector<PointScan> scans;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream header(line.substr(first + 1));
      std::string word;
      std::int64_t id = 0;
      if (!(header >> word >> id) || word != "scan") {
        throw Error(ErrorKind::kParse, fmt::format("line {}: expected '# scan <id>'", line_no), line_no);
      }
      scans.push_back(PointScan{id, {}});
      continue;
    }
    if (scans.empty()) {
      throw Error(ErrorKind::kParse, fmt::format("line {}: point before the first scan header", line_no), line_no);
    }
    std::istringstream row(line);
    Point3 p;
    std::string extra;
    if (!(row >> p.x >> p.y >> p.z) || (row >> extra) || !std::isfinite(p.x) || !std::isfinite(p.y) ||
        !std::isfinite(p.z)) {
      throw Error(ErrorKind::kParse, fmt::format("line {}: expected 'x y z'", line_no), line_no);
    }
    scans.back().points.push_back(p);
  }
  return scans;
}

std::vector<PointScan> read_scan_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidInput, fmt::format("cannot open {}", path.string()));
  return read_scans(in);
}

void write_scans(std::ostream& out, const std::vector<PointScan>& scans) {
  for (const auto& scan : scans) {
    out << "# scan " << scan.scan_id << '\n';
    for (const auto& p : scan.points) out << fmt::format("{:.4f} {:.4f} {:.4f}\n", p.x, p.y, p.z);
  }
}

}  // namespace trajfill
