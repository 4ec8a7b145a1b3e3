#pragma once

// NGSIM I-80 trajectory records and leader-follower pair extraction.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "trajfill/series.hpp"

namespace trajfill {

inline constexpr double kFeetToMeters = 0.3048;

// One FHWA row, lengths and speeds already in SI units.
struct NgsimRecord {
  std::int64_t vehicle_id = 0;
  std::int64_t frame_id = 0;
  std::int64_t global_time_ms = 0;
  double local_x = 0.0;   // m
  double local_y = 0.0;   // m, front bumper along the road
  double vehicle_length = 0.0;  // m
  int vehicle_class = 0;
  double speed = 0.0;          // m/s
  double acceleration = 0.0;   // m/s^2
  int lane_id = 0;
  std::int64_t preceding_id = 0;  // 0 = none
  double space_headway = 0.0;     // m, front-to-front
  double time_headway = 0.0;      // s
};

struct NgsimParseResult {
  std::vector<NgsimRecord> records;
  std::vector<std::string> warnings;
};

// Whitespace- or comma-delimited rows of at least 18 columns in FHWA order
// (Vehicle_ID, Frame_ID, Total_Frames, Global_Time, Local_X, Local_Y,
// Global_X, Global_Y, v_Length, v_Width, v_Class, v_Vel, v_Acc, Lane_ID,
// Preceding, Following, Space_Headway, Time_Headway). A leading header row
// is skipped. Throws a parse error naming the line on malformed rows.
NgsimParseResult parse_ngsim(std::istream& in);

struct PairRules {
  double min_duration_s = 50.0;
  std::set<int> excluded_lanes = {1};  // leftmost HOV lane
  int first_excluded_right_lane = 6;   // this lane and above: rightmost / on-ramp
  double headway_mismatch_m = 1.0;     // cross-check tolerance against Space_Headway
};

enum class Rejection {
  kLeaderChanged,
  kLaneChange,
  kExcludedLane,
  kTooShort,
  kDiscontinuous,
  kNoOverlap,
  kNonPositiveHeadway,
};

std::string_view rejection_name(Rejection reason);

struct ExtractedPair {
  std::int64_t follower_id = 0;
  std::int64_t leader_id = 0;
  int lane_id = 0;
  VehiclePair pair;
};

struct ExtractionSummary {
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::map<Rejection, std::size_t> rejected;
  std::size_t headway_mismatch_rows = 0;
  std::vector<std::string> diagnostics;
};

struct ExtractionResult {
  std::vector<ExtractedPair> pairs;  // sorted by follower id, then start time
  ExtractionSummary summary;
};

// A (follower, leader) candidate is every distinct non-zero Preceding value
// of a follower. It qualifies when, over the frames both vehicles are
// recorded: the follower's Preceding equals the leader throughout, both stay
// in one lane, that lane is not excluded, frames are contiguous, and the
// span is at least min_duration_s.
ExtractionResult extract_pairs(const std::vector<NgsimRecord>& records, const PairRules& rules = {});

}  // namespace trajfill
