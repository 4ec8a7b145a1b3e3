#pragma once

// Gap-filling pipeline: short gaps get a straight line, longer ones a
// per-gap calibrated car-following prediction that is reconnected to the
// far edge by the smooth transition step.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajfill/calibration.hpp"
#include "trajfill/models.hpp"
#include "trajfill/series.hpp"

namespace trajfill {

enum class ModelSelection { kGipps, kIdm, kPipes, kNewell, kBestOfAll };

std::string_view selection_name(ModelSelection selection);
std::optional<ModelSelection> parse_selection(std::string_view name);
ModelSelection selection_for(ModelKind kind);

enum class BlendSchedule { kLinear };

std::string_view blend_name(BlendSchedule schedule);
std::optional<BlendSchedule> parse_blend(std::string_view name);

struct ReconstructionConfig {
  double short_gap_limit_s = kShortGapLimitSeconds;
  double context_length_s = kDefaultContextSeconds;
  double slope_threshold = 0.5;  // m/s
  BlendSchedule blend_schedule = BlendSchedule::kLinear;
  ModelSelection selection = ModelSelection::kGipps;
  PredictorOptions predictor;

  void validate() const;
};

struct BlendWeights {
  std::size_t region_start = 0;  // index into the gap samples
  std::vector<double> weights;   // one per sample in [region_start, gap end]
};

struct EdgePoint {
  double t = 0.0;
  double s = 0.0;
};

struct TransitionResult {
  std::vector<double> values;  // one per gap sample
  std::size_t reshape_start = 0;
  double line_slope = 0.0;
  BlendWeights blend;
  // No candidate met the threshold; the whole gap was blended.
  bool whole_gap_blend = false;
};

// Reconnects `predicted` (the model's values at t_first, t_first + h, ...)
// to the observed point `end` just past the gap.
//
// Lines are drawn from `end` back to each predicted point, nearest first;
// the first point whose line slope is within `threshold` of `edge_slope`
// starts the reshaped region. Over that region the output is
// w * predicted + (1 - w) * line with w falling linearly from 1 at the
// region start to 0 at the last gap sample, so the last gap sample lies on
// the line and the step into `end` has exactly the line's slope. When no
// point qualifies the whole gap is blended onto the line through `end` with
// slope `edge_slope`.
TransitionResult smooth_transition(std::span<const double> predicted, double t_first, double h,
                                   EdgePoint end, double edge_slope, double threshold,
                                   BlendSchedule schedule = BlendSchedule::kLinear);

enum class FillMethod { kLinear, kModel, kLinearFallback, kSkipped };

std::string_view method_name(FillMethod method);

struct GapReconstruction {
  std::size_t first_missing = 0;
  std::size_t last_missing = 0;
  FillMethod method = FillMethod::kSkipped;
  std::vector<double> values;  // gap samples; empty when skipped
  std::optional<ModelKind> model;
  std::vector<CalibrationResult> calibrations;
  std::optional<std::size_t> reshape_start;  // absolute sample index
  bool whole_gap_blend = false;
  double edge_slope = 0.0;
  std::string diagnostic;

  std::size_t evaluations() const;
};

// Fills one gap. `gap_index` feeds the per-gap GA seed, derived from
// ga.seed, gap_index and the model tag.
GapReconstruction reconstruct_gap(const VehiclePair& pair, const GapSpec& gap, const ReconstructionConfig& cfg,
                                  const GaConfig& ga, const BoundsTable& bounds, std::uint64_t gap_index);

struct PairReconstruction {
  VehiclePair pair;
  std::vector<GapReconstruction> gaps;
};

// Fills every gap of the pair's headway series in time order.
PairReconstruction reconstruct_pair(const VehiclePair& pair, const ReconstructionConfig& cfg, const GaConfig& ga,
                                    const BoundsTable& bounds);

}  // namespace trajfill
