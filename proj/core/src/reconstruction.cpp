#include "trajfill/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

#include "trajfill/error.hpp"
#include "trajfill/rng.hpp"

namespace trajfill {

std::string_view selection_name(ModelSelection selection) {
  switch (selection) {
    case ModelSelection::kGipps: return "gipps";
    case ModelSelection::kIdm: return "idm";
    case ModelSelection::kPipes: return "pipes";
    case ModelSelection::kNewell: return "newell";
    case ModelSelection::kBestOfAll: return "best";
  }
  return "unknown";
}

std::optional<ModelSelection> parse_selection(std::string_view name) {
  if (name == "best" || name == "best-of-all") return ModelSelection::kBestOfAll;
  if (const auto kind = parse_model(name)) return selection_for(*kind);
  return std::nullopt;
}

ModelSelection selection_for(ModelKind kind) {
  return static_cast<ModelSelection>(static_cast<int>(kind));
}

std::string_view blend_name(BlendSchedule schedule) {
  switch (schedule) {
    case BlendSchedule::kLinear: return "linear";
  }
  return "unknown";
}

std::optional<BlendSchedule> parse_blend(std::string_view name) {
  if (name == "linear") return BlendSchedule::kLinear;
  return std::nullopt;
}

std::string_view method_name(FillMethod method) {
  switch (method) {
    case FillMethod::kLinear: return "linear";
    case FillMethod::kModel: return "model";
    case FillMethod::kLinearFallback: return "linear-fallback";
    case FillMethod::kSkipped: return "skipped";
  }
  return "unknown";
}

void ReconstructionConfig::validate() const {
  if (!(short_gap_limit_s > 0.0)) throw Error(ErrorKind::kInvalidInput, "short_gap_limit must be > 0");
  if (!(context_length_s > 0.0)) throw Error(ErrorKind::kInvalidInput, "context_length must be > 0");
  if (!(slope_threshold > 0.0)) throw Error(ErrorKind::kInvalidInput, "slope_threshold must be > 0");
}

std::size_t GapReconstruction::evaluations() const {
  std::size_t total = 0;
  for (const auto& c : calibrations) total += c.evaluations;
  return total;
}

TransitionResult smooth_transition(std::span<const double> predicted, double t_first, double h, EdgePoint end,
                                   double edge_slope, double threshold, BlendSchedule schedule) {
  if (predicted.empty()) throw Error(ErrorKind::kInvalidInput, "smooth transition needs predicted values");
  if (!std::isfinite(end.s) || !std::isfinite(end.t) || !std::isfinite(edge_slope)) {
    throw Error(ErrorKind::kInvalidInput, "smooth transition edge values must be finite");
  }
  const std::size_t n = predicted.size();
  auto time_of = [&](std::size_t k) { return t_first + static_cast<double>(k) * h; };
  auto slope_from = [&](std::size_t k) { return (end.s - predicted[k]) / (end.t - time_of(k)); };

  TransitionResult out;
  bool found = false;
  for (std::size_t k = n; k-- > 0;) {
    if (std::abs(slope_from(k) - edge_slope) < threshold) {
      out.reshape_start = k;
      found = true;
      break;
    }
  }
  if (found) {
    out.line_slope = slope_from(out.reshape_start);
  } else {
    // No line qualifies: blend the whole gap onto the line through `end`
    // with the edge slope itself.
    out.reshape_start = 0;
    out.whole_gap_blend = true;
    out.line_slope = edge_slope;
  }

  out.values.assign(predicted.begin(), predicted.end());
  out.blend.region_start = out.reshape_start;
  const std::size_t span = n - 1 - out.reshape_start;
  switch (schedule) {
    case BlendSchedule::kLinear:
      for (std::size_t j = 0; j <= span; ++j) {
        const double w = span == 0 ? 1.0 : 1.0 - static_cast<double>(j) / static_cast<double>(span);
        out.blend.weights.push_back(w);
      }
      break;
  }
  for (std::size_t j = 0; j <= span; ++j) {
    const std::size_t k = out.reshape_start + j;
    const double line = end.s - out.line_slope * (end.t - time_of(k));
    const double w = out.blend.weights[j];
    out.values[k] = w * predicted[k] + (1.0 - w) * line;
  }
  return out;
}

namespace {

std::vector<ModelKind> models_for(ModelSelection selection) {
  if (selection == ModelSelection::kBestOfAll) return {kAllModels.begin(), kAllModels.end()};
  return {static_cast<ModelKind>(static_cast<int>(selection))};
}

std::vector<double> linear_values(const HeadwaySeries& series, const GapSpec& gap, double limit_s) {
  const HeadwaySeries filled = linear_fill(series, gap, limit_s);
  std::vector<double> values;
  values.reserve(gap.length());
  for (std::size_t i = gap.first_missing; i <= gap.last_missing; ++i) values.push_back(filled.at(i));
  return values;
}

}  // namespace

GapReconstruction reconstruct_gap(const VehiclePair& pair, const GapSpec& gap, const ReconstructionConfig& cfg,
                                  const GaConfig& ga, const BoundsTable& bounds, std::uint64_t gap_index) {
  cfg.validate();
  const HeadwaySeries& s = pair.headway();
  const double h = s.h();

  GapReconstruction out;
  out.first_missing = gap.first_missing;
  out.last_missing = gap.last_missing;

  if (!gap.has_edges()) {
    out.method = FillMethod::kSkipped;
    out.diagnostic = "gap touches the series boundary";
    return out;
  }
  if (gap.duration(h) < cfg.short_gap_limit_s - kGridTolerance) {
    out.method = FillMethod::kLinear;
    out.values = linear_values(s, gap, cfg.short_gap_limit_s);
    return out;
  }
  if (!gap.reconstructable) {
    out.method = FillMethod::kSkipped;
    out.diagnostic = "context windows missing or overlap another gap";
    return out;
  }

  auto fall_back = [&](std::string why) {
    out.method = FillMethod::kLinearFallback;
    out.model.reset();
    out.values = linear_values(s, gap, std::numeric_limits<double>::infinity());
    out.diagnostic = std::move(why);
    return out;
  };

  std::vector<std::string> failures;
  for (const ModelKind kind : models_for(cfg.selection)) {
    GaConfig job = ga;
    job.seed = derive_seed(ga.seed, gap_index, static_cast<std::uint64_t>(kind));
    try {
      out.calibrations.push_back(
          ga_calibrate(kind, pair, gap, bounds[kind], job, cfg.context_length_s, cfg.predictor));
    } catch (const Error& e) {
      failures.push_back(e.what());
    }
  }
  if (out.calibrations.empty()) {
    std::string why = "calibration failed";
    for (const auto& f : failures) why += "; " + f;
    return fall_back(std::move(why));
  }

  const auto best = std::min_element(out.calibrations.begin(), out.calibrations.end(),
                                     [](const CalibrationResult& a, const CalibrationResult& b) {
                                       return a.cost < b.cost;
                                     });
  std::vector<double> predicted;
  try {
    HeadwayAnchor anchor{s.at(gap.edge_before()), std::nullopt};
    if (gap.edge_before() > 0 && s.present(gap.edge_before() - 1)) anchor.previous = *s[gap.edge_before() - 1];
    predicted = predict_headway(best->params, pair.follower(), gap, anchor, cfg.predictor);
  } catch (const Error& e) {
    return fall_back(fmt::format("prediction failed: {}", e.what()));
  }

  const std::size_t end_index = gap.edge_after();
  double edge_slope = 0.0;
  if (end_index + 1 < s.size() && s.present(end_index + 1)) {
    edge_slope = (s.at(end_index + 1) - s.at(end_index)) / h;
  }
  const std::span<const double> inside(predicted.data() + 1, gap.length());
  const TransitionResult transition =
      smooth_transition(inside, s.time_at(gap.first_missing), h, EdgePoint{s.time_at(end_index), s.at(end_index)},
                        edge_slope, cfg.slope_threshold, cfg.blend_schedule);

  out.method = FillMethod::kModel;
  out.model = best->model;
  out.values = transition.values;
  for (auto& v : out.values) v = std::max(v, kMinPredictedHeadway);
  out.reshape_start = gap.first_missing + transition.reshape_start;
  out.whole_gap_blend = transition.whole_gap_blend;
  out.edge_slope = edge_slope;
  if (transition.whole_gap_blend) out.diagnostic = "no reshape start met the slope threshold";
  if (!failures.empty()) {
    for (const auto& f : failures) out.diagnostic += (out.diagnostic.empty() ? "" : "; ") + f;
  }
  return out;
}

PairReconstruction reconstruct_pair(const VehiclePair& pair, const ReconstructionConfig& cfg, const GaConfig& ga,
                                    const BoundsTable& bounds) {
  const auto gaps = detect_gaps(pair.headway(), cfg.context_length_s);
  PairReconstruction out{pair, {}};
  std::vector<std::optional<double>> values = pair.headway().values();
  for (std::size_t g = 0; g < gaps.size(); ++g) {
    GapReconstruction rec = reconstruct_gap(pair, gaps[g], cfg, ga, bounds, g);
    for (std::size_t k = 0; k < rec.values.size(); ++k) values[rec.first_missing + k] = rec.values[k];
    out.gaps.push_back(std::move(rec));
  }
  out.pair = pair.with_headway(pair.headway().with_values(std::move(values)));
  return out;
}

}  // namespace trajfill
