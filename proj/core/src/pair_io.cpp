#include "trajfill/pair_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "trajfill/error.hpp"

namespace trajfill {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_field(std::string_view field, std::size_t line_no) {
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorKind::kParse, fmt::format("line {}: bad number '{}'", line_no, field), line_no);
  }
  return value;
}

std::string format_opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string{};
}

struct Table {
  std::map<std::string, std::string, std::less<>> meta;
  std::vector<double> t;
  std::vector<std::optional<double>> leader_x;
  std::vector<std::optional<double>> follower_x;
  std::vector<std::optional<double>> follower_v;
  std::vector<std::optional<double>> headway;
};

Table read_table(std::istream& in) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (header_seen) continue;
      for (auto item : split(view.substr(1), ',')) {
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) continue;
        table.meta.emplace(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
      }
      continue;
    }
    if (!header_seen) {
      const auto cols = split(view, ',');
      const auto expected = split(kPairHeader, ',');
      if (cols != expected) {
        throw Error(ErrorKind::kParse,
                    fmt::format("line {}: expected header '{}'", line_no, kPairHeader), line_no);
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(view, ',');
    if (fields.size() != 5) {
      throw Error(ErrorKind::kParse,
                  fmt::format("line {}: expected 5 fields, got {}", line_no, fields.size()), line_no);
    }
    const auto t = parse_field(fields[0], line_no);
    if (!t) {
      throw Error(ErrorKind::kParse, fmt::format("line {}: time is required", line_no), line_no);
    }
    table.t.push_back(*t);
    table.leader_x.push_back(parse_field(fields[1], line_no));
    table.follower_x.push_back(parse_field(fields[2], line_no));
    table.follower_v.push_back(parse_field(fields[3], line_no));
    table.headway.push_back(parse_field(fields[4], line_no));
  }
  if (!header_seen) {
    throw Error(ErrorKind::kParse, "missing header row");
  }
  if (table.t.size() < 2) {
    throw Error(ErrorKind::kInvalidInput, "pair file needs at least 2 rows");
  }
  const double h = kSampleInterval;
  const double t0 = std::round(table.t.front() / h) * h;
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    const double expected = t0 + static_cast<double>(i) * h;
    if (std::abs(table.t[i] - expected) > 1e-6) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("row {}: t={} is off the 0.1 s grid (expected {:.3f})", i + 1,
                              table.t[i], expected),
                  i);
    }
    table.t[i] = expected;
  }
  return table;
}

std::optional<double> meta_number(const Table& table, std::string_view key) {
  const auto it = table.meta.find(key);
  if (it == table.meta.end() || it->second.empty()) return std::nullopt;
  return parse_field(it->second, 0);
}

std::string meta_string(const Table& table, std::string_view key) {
  const auto it = table.meta.find(key);
  return it == table.meta.end() ? std::string{} : it->second;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kInvalidInput, fmt::format("cannot write {}", path.string()));
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kInvalidInput, fmt::format("cannot open {}", path.string()));
  return in;
}

}  // namespace

VehiclePair read_pair(std::istream& in) {
  Table table = read_table(in);
  const std::size_t n = table.t.size();

  std::optional<double> length = meta_number(table, "leader_length_m");
  if (!length) {
    std::vector<double> implied;
    for (std::size_t i = 0; i < n; ++i) {
      if (table.leader_x[i] && table.follower_x[i] && table.headway[i]) {
        implied.push_back(*table.leader_x[i] - *table.follower_x[i] - *table.headway[i]);
      }
    }
    if (!implied.empty()) {
      std::nth_element(implied.begin(), implied.begin() + implied.size() / 2, implied.end());
      const double median = implied[implied.size() / 2];
      if (median > 0.0) length = median;
    }
  }

  std::vector<SamplePoint> leader(n);
  std::vector<SamplePoint> follower(n);
  bool any_speed = false;
  for (std::size_t i = 0; i < n; ++i) {
    leader[i] = {table.t[i], table.leader_x[i], std::nullopt};
    follower[i] = {table.t[i], table.follower_x[i], table.follower_v[i]};
    any_speed = any_speed || table.follower_v[i].has_value();
  }
  Trajectory leader_traj(std::move(leader), length, meta_string(table, "leader_id"));
  leader_traj = estimate_speed(leader_traj);
  Trajectory follower_traj(std::move(follower), std::nullopt, meta_string(table, "follower_id"));
  if (!any_speed) follower_traj = estimate_speed(follower_traj);

  HeadwaySeries headway(table.t.front(), std::move(table.headway));
  return VehiclePair(std::move(leader_traj), std::move(follower_traj), std::move(headway), 1e-4);
}

VehiclePair read_pair_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_pair(in);
}

void write_pair(std::ostream& out, const VehiclePair& pair) {
  const auto& leader = pair.leader();
  const auto& follower = pair.follower();
  if (!follower.id().empty()) out << "# follower_id=" << follower.id() << '\n';
  if (!leader.id().empty()) out << "# leader_id=" << leader.id() << '\n';
  if (leader.vehicle_length()) out << fmt::format("# leader_length_m={:.6f}\n", *leader.vehicle_length());
  out << kPairHeader << '\n';
  const auto& s = pair.headway();
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << fmt::format("{:.3f},{},{},{},{}\n", s.time_at(i), format_opt(leader[i].x),
                       format_opt(follower[i].x), format_opt(follower[i].v), format_opt(s[i]));
  }
}

void write_pair_file(const std::filesystem::path& path, const VehiclePair& pair) {
  auto out = open_output(path);
  write_pair(out, pair);
}

void write_headway(std::ostream& out, const HeadwaySeries& series, const std::string& id) {
  if (!id.empty()) out << "# id=" << id << '\n';
  out << kPairHeader << '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << fmt::format("{:.3f},,,,{}\n", series.time_at(i), format_opt(series[i]));
  }
}

void write_headway_file(const std::filesystem::path& path, const HeadwaySeries& series,
                        const std::string& id) {
  auto out = open_output(path);
  write_headway(out, series, id);
}

HeadwaySeries read_headway(std::istream& in) {
  Table table = read_table(in);
  return HeadwaySeries(table.t.front(), std::move(table.headway));
}

HeadwaySeries read_headway_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_headway(in);
}

}  // namespace trajfill
