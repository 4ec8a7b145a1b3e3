#pragma once

// Canonical pair file: a CSV table with header
//   t_s,leader_x_m,follower_x_m,follower_v_mps,headway_m
// one row per 0.1 s sample, an empty field meaning "missing". Lines starting
// with '#' before the header carry optional `key=value` metadata
// (`id`, `leader_id`, `follower_id`, `leader_length_m`).

#include <filesystem>
#include <iosfwd>
#include <string>

#include "trajfill/series.hpp"

namespace trajfill {

inline constexpr const char* kPairHeader = "t_s,leader_x_m,follower_x_m,follower_v_mps,headway_m";

VehiclePair read_pair(std::istream& in);
VehiclePair read_pair_file(const std::filesystem::path& path);

void write_pair(std::ostream& out, const VehiclePair& pair);
void write_pair_file(const std::filesystem::path& path, const VehiclePair& pair);

// Headway-only variant of the same format; position and speed columns are
// left empty on write and ignored on read.
void write_headway(std::ostream& out, const HeadwaySeries& series, const std::string& id = {});
void write_headway_file(const std::filesystem::path& path, const HeadwaySeries& series,
                        const std::string& id = {});
HeadwaySeries read_headway(std::istream& in);
HeadwaySeries read_headway_file(const std::filesystem::path& path);

}  // namespace trajfill
