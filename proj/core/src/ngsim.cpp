#include "trajfill/ngsim.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <string_view>
#include <unordered_map>

#include <fmt/format.h>

#include "trajfill/error.hpp"

namespace trajfill {
namespace {

constexpr std::size_t kColumns = 18;

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_sep(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool to_double(std::string_view token, double& out) {
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

std::string_view rejection_name(Rejection reason) {
  switch (reason) {
    case Rejection::kLeaderChanged: return "leader_changed";
    case Rejection::kLaneChange: return "lane_change";
    case Rejection::kExcludedLane: return "excluded_lane";
    case Rejection::kTooShort: return "too_short";
    case Rejection::kDiscontinuous: return "discontinuous";
    case Rejection::kNoOverlap: return "no_overlap";
    case Rejection::kNonPositiveHeadway: return "non_positive_headway";
  }
  return "unknown";
}

NgsimParseResult parse_ngsim(std::istream& in) {
  NgsimParseResult result;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  std::array<double, kColumns> v{};
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    bool numeric = tokens.size() >= kColumns;
    for (std::size_t c = 0; numeric && c < kColumns; ++c) numeric = to_double(tokens[c], v[c]);
    if (!numeric) {
      double probe = 0.0;
      if (first_content && !to_double(tokens.front(), probe)) {
        first_content = false;  // header row
        continue;
      }
      if (tokens.size() < kColumns) {
        throw Error(ErrorKind::kParse,
                    fmt::format("line {}: expected at least {} columns, got {}", line_no, kColumns, tokens.size()),
                    line_no);
      }
      throw Error(ErrorKind::kParse, fmt::format("line {}: non-numeric field", line_no), line_no);
    }
    first_content = false;

    NgsimRecord r;
    r.vehicle_id = static_cast<std::int64_t>(v[0]);
    r.frame_id = static_cast<std::int64_t>(v[1]);
    r.global_time_ms = static_cast<std::int64_t>(v[3]);
    r.local_x = v[4] * kFeetToMeters;
    r.local_y = v[5] * kFeetToMeters;
    r.vehicle_length = v[8] * kFeetToMeters;
    r.vehicle_class = static_cast<int>(v[10]);
    r.speed = v[11] * kFeetToMeters;
    r.acceleration = v[12] * kFeetToMeters;
    r.lane_id = static_cast<int>(v[13]);
    r.preceding_id = static_cast<std::int64_t>(v[14]);
    r.space_headway = v[16] * kFeetToMeters;
    r.time_headway = v[17];
    if (r.speed > 60.0) {
      result.warnings.push_back(
          fmt::format("line {}: speed {:.1f} m/s exceeds 60 m/s; check units", line_no, r.speed));
    }
    if (r.lane_id < 1) {
      throw Error(ErrorKind::kParse, fmt::format("line {}: lane id {} must be >= 1", line_no, r.lane_id), line_no);
    }
    result.records.push_back(r);
  }
  return result;
}

ExtractionResult extract_pairs(const std::vector<NgsimRecord>& records, const PairRules& rules) {
  std::map<std::int64_t, std::vector<const NgsimRecord*>> by_vehicle;
  for (const auto& r : records) by_vehicle[r.vehicle_id].push_back(&r);
  for (auto& [id, rows] : by_vehicle) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const NgsimRecord* a, const NgsimRecord* b) { return a->frame_id < b->frame_id; });
  }

  ExtractionResult result;
  auto& summary = result.summary;
  auto reject = [&](Rejection why) { ++summary.rejected[why]; };

  for (const auto& [follower_id, follower_rows] : by_vehicle) {
    std::vector<std::int64_t> leaders;
    for (const auto* r : follower_rows) {
      if (r->preceding_id != 0 && std::find(leaders.begin(), leaders.end(), r->preceding_id) == leaders.end()) {
        leaders.push_back(r->preceding_id);
      }
    }
    for (const std::int64_t leader_id : leaders) {
      ++summary.candidates;
      const auto leader_it = by_vehicle.find(leader_id);
      if (leader_it == by_vehicle.end()) {
        reject(Rejection::kNoOverlap);
        continue;
      }
      std::unordered_map<std::int64_t, const NgsimRecord*> leader_frames;
      for (const auto* r : leader_it->second) leader_frames.emplace(r->frame_id, r);

      std::vector<std::pair<const NgsimRecord*, const NgsimRecord*>> overlap;
      for (const auto* f : follower_rows) {
        const auto it = leader_frames.find(f->frame_id);
        if (it != leader_frames.end()) overlap.emplace_back(f, it->second);
      }
      if (overlap.size() < 2) {
        reject(Rejection::kNoOverlap);
        continue;
      }
      const bool same_leader = std::all_of(overlap.begin(), overlap.end(),
                                           [&](const auto& p) { return p.first->preceding_id == leader_id; });
      if (!same_leader) {
        reject(Rejection::kLeaderChanged);
        continue;
      }
      const int lane = overlap.front().first->lane_id;
      const bool one_lane = std::all_of(overlap.begin(), overlap.end(), [&](const auto& p) {
        return p.first->lane_id == lane && p.second->lane_id == lane;
      });
      if (!one_lane) {
        reject(Rejection::kLaneChange);
        continue;
      }
      if (rules.excluded_lanes.contains(lane) || lane >= rules.first_excluded_right_lane) {
        reject(Rejection::kExcludedLane);
        continue;
      }
      bool contiguous = true;
      for (std::size_t i = 1; i < overlap.size() && contiguous; ++i) {
        contiguous = overlap[i].first->frame_id == overlap[i - 1].first->frame_id + 1;
      }
      if (!contiguous) {
        reject(Rejection::kDiscontinuous);
        summary.diagnostics.push_back(
            fmt::format("pair {}-{}: frame discontinuity in the overlap", follower_id, leader_id));
        continue;
      }
      const double duration = static_cast<double>(overlap.size() - 1) * kSampleInterval;
      if (duration < rules.min_duration_s - 1e-9) {
        reject(Rejection::kTooShort);
        continue;
      }

      const double length = std::max(0.0, overlap.front().second->vehicle_length);
      const std::size_t n = overlap.size();
      std::vector<SamplePoint> leader_pts(n);
      std::vector<SamplePoint> follower_pts(n);
      std::vector<std::optional<double>> headway(n);
      bool positive = true;
      std::size_t mismatches = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto* f = overlap[i].first;
        const auto* l = overlap[i].second;
        const double t = static_cast<double>(f->frame_id) * kSampleInterval;
        leader_pts[i] = {t, l->local_y, std::max(0.0, l->speed)};
        follower_pts[i] = {t, f->local_y, std::max(0.0, f->speed)};
        const double s = l->local_y - f->local_y - length;
        positive = positive && s > 0.0;
        headway[i] = s;
        if (std::abs(s - (f->space_headway - length)) > rules.headway_mismatch_m) ++mismatches;
      }
      if (!positive) {
        reject(Rejection::kNonPositiveHeadway);
        continue;
      }
      if (mismatches > 0) {
        summary.headway_mismatch_rows += mismatches;
        summary.diagnostics.push_back(fmt::format(
            "pair {}-{}: {} rows disagree with Space_Headway by more than {:.2f} m", follower_id, leader_id,
            mismatches, rules.headway_mismatch_m));
      }
      const double t0 = follower_pts.front().t;
      Trajectory leader(std::move(leader_pts), length > 0.0 ? std::optional<double>(length) : std::nullopt,
                        std::to_string(leader_id));
      Trajectory follower(std::move(follower_pts), std::nullopt, std::to_string(follower_id));
      result.pairs.push_back(ExtractedPair{
          follower_id, leader_id, lane,
          VehiclePair(std::move(leader), std::move(follower), HeadwaySeries(t0, std::move(headway)))});
      ++summary.accepted;
    }
  }
  std::stable_sort(result.pairs.begin(), result.pairs.end(), [](const ExtractedPair& a, const ExtractedPair& b) {
    if (a.follower_id != b.follower_id) return a.follower_id < b.follower_id;
    return a.pair.headway().t0() < b.pair.headway().t0();
  });
  return result;
}

}  // namespace trajfill
