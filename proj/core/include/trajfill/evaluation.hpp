#pragma once

// Synthetic gaps, per-gap RMSE/MAPE, and min/max/average/median/std tables.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trajfill/series.hpp"

namespace trajfill {

struct GapSynthesisConfig {
  double min_length_s = 5.0;
  double max_length_s = 15.0;
  double margin_s = kDefaultContextSeconds;  // present data required on each side
  std::size_t attempts_per_gap = 1000;

  void validate() const;
};

struct PlannedGap {
  std::size_t start = 0;
  std::size_t length = 0;  // samples

  std::size_t last() const { return start + length - 1; }
  bool operator==(const PlannedGap&) const = default;
};

struct GapPlan {
  std::uint64_t seed = 0;
  std::vector<PlannedGap> gaps;  // sorted by start
};

// Rejection-samples `count` non-overlapping gaps with uniformly drawn
// lengths, each keeping `margin_s` of data clear of other gaps and of the
// series ends on both sides. Throws a capacity error after
// count * attempts_per_gap failed draws.
GapPlan synthesize_gaps(const HeadwaySeries& series, std::size_t count, std::uint64_t seed,
                        const GapSynthesisConfig& cfg = {});

HeadwaySeries hide_gaps(const HeadwaySeries& series, const GapPlan& plan);

struct GapScore {
  double rmse_m = 0.0;
  double mape_pct = 0.0;
  std::size_t samples = 0;
  std::size_t mape_excluded = 0;  // truth below kMinMapeHeadway
};

inline constexpr double kMinMapeHeadway = 0.1;

// Scores samples [gap.first, gap.last] only. Truth values under 0.1 m are
// left out of MAPE. Throws a scoring error when nothing usable remains.
GapScore score_gap(const HeadwaySeries& truth, const HeadwaySeries& reconstructed, IndexRange gap);

struct EvaluationRow {
  std::size_t gap_id = 0;
  std::string pair_id;
  std::string model;
  double gap_len_s = 0.0;
  double rmse_m = 0.0;
  double mape_pct = 0.0;
};

struct SummaryStats {
  double min = 0.0;
  double max = 0.0;
  double average = 0.0;
  double median = 0.0;
  double std = 0.0;  // sample (n - 1) form, 0 for a single value
};

SummaryStats summary_stats(std::span<const double> values);

struct SummaryRow {
  std::string model;
  std::string metric;  // "mape_pct" or "rmse_m"
  SummaryStats stats;
};

// Models in order of first appearance in `rows`, MAPE before RMSE.
std::vector<SummaryRow> summarize(std::span<const EvaluationRow> rows);

// Rounds to the 6 decimals written to the report tables, so summaries
// recomputed from a written per_gap.csv match the in-memory ones.
double report_round(double value);

void write_per_gap_csv(std::ostream& out, std::span<const EvaluationRow> rows);
std::vector<EvaluationRow> read_per_gap_csv(std::istream& in);
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

}  // namespace trajfill
