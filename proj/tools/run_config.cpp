#include "run_config.hpp"

#include <fstream>

#include <fmt/format.h>

#include "trajfill/error.hpp"

namespace trajfill::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::kInvalidInput, fmt::format("config key '{}': {}", key, why));
}

template <typename T>
void read(const json& obj, const std::string& scope, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    bad(scope + key, fmt::format("wrong type ({})", it->type_name()));
  }
}

void check_keys(const json& obj, const std::string& scope, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) bad(scope.empty() ? "<root>" : scope, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) bad(scope + key, "unknown key");
  }
}

std::string_view leader_speed_name(LeaderSpeedMode mode) {
  return mode == LeaderSpeedMode::kKinematic ? "kinematic" : "zero-relative";
}

}  // namespace

ordered_json to_json(const RunConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["dataset"] = cfg.dataset;
  j["inputs"] = cfg.inputs;
  j["models"] = cfg.models;
  j["gaps"] = cfg.gaps;
  j["jobs"] = cfg.jobs;
  j["synthesis"] = {{"min_length_s", cfg.synthesis.min_length_s},
                    {"max_length_s", cfg.synthesis.max_length_s},
                    {"margin_s", cfg.synthesis.margin_s},
                    {"attempts_per_gap", cfg.synthesis.attempts_per_gap}};
  const auto& rc = cfg.reconstruction;
  j["reconstruction"] = {{"model", selection_name(rc.selection)},
                         {"short_gap_limit_s", rc.short_gap_limit_s},
                         {"context_length_s", rc.context_length_s},
                         {"slope_threshold", rc.slope_threshold},
                         {"blend", blend_name(rc.blend_schedule)},
                         {"leader_speed", leader_speed_name(rc.predictor.leader_speed)},
                         {"idm_min_ratio", rc.predictor.idm_min_ratio}};
  j["ga"] = {{"population", cfg.ga.population},
             {"generations", cfg.ga.generations},
             {"crossover", cfg.ga.crossover_rate},
             {"mutation", cfg.ga.mutation_rate},
             {"elitism", cfg.ga.elitism}};
  ordered_json bounds;
  for (const auto kind : kAllModels) {
    ordered_json model;
    const auto names = parameter_names(kind);
    for (std::size_t i = 0; i < names.size(); ++i) {
      model[std::string(names[i])] = {cfg.bounds[kind][i].lo, cfg.bounds[kind][i].hi};
    }
    bounds[std::string(model_name(kind))] = model;
  }
  j["bounds"] = bounds;
  j["filter"] = {{"z_min", cfg.filter.z_min},
                 {"z_max", cfg.filter.z_max},
                 {"lane_half_width", cfg.filter.lane_half_width},
                 {"min_cluster_points", cfg.filter.min_cluster_points},
                 {"cluster_radius", cfg.filter.cluster_radius}};
  j["ingest"] = {{"min_duration_s", cfg.rules.min_duration_s},
                 {"excluded_lanes", cfg.rules.excluded_lanes},
                 {"first_excluded_right_lane", cfg.rules.first_excluded_right_lane},
                 {"headway_mismatch_m", cfg.rules.headway_mismatch_m}};
  return j;
}

void apply_json(RunConfig& cfg, const json& j) {
  check_keys(j, "", {"seed", "dataset", "inputs", "models", "gaps", "jobs", "synthesis", "reconstruction", "ga",
                     "bounds", "filter", "ingest"});
  read(j, "", "seed", cfg.seed);
  read(j, "", "dataset", cfg.dataset);
  read(j, "", "inputs", cfg.inputs);
  read(j, "", "models", cfg.models);
  read(j, "", "gaps", cfg.gaps);
  read(j, "", "jobs", cfg.jobs);

  if (const auto it = j.find("synthesis"); it != j.end()) {
    const std::string scope = "synthesis.";
    check_keys(*it, scope, {"min_length_s", "max_length_s", "margin_s", "attempts_per_gap"});
    read(*it, scope, "min_length_s", cfg.synthesis.min_length_s);
    read(*it, scope, "max_length_s", cfg.synthesis.max_length_s);
    read(*it, scope, "margin_s", cfg.synthesis.margin_s);
    read(*it, scope, "attempts_per_gap", cfg.synthesis.attempts_per_gap);
  }
  if (const auto it = j.find("reconstruction"); it != j.end()) {
    const std::string scope = "reconstruction.";
    check_keys(*it, scope, {"model", "short_gap_limit_s", "context_length_s", "slope_threshold", "blend",
                            "leader_speed", "idm_min_ratio"});
    auto& rc = cfg.reconstruction;
    std::string text;
    if (it->contains("model")) {
      read(*it, scope, "model", text);
      const auto sel = parse_selection(text);
      if (!sel) bad(scope + "model", fmt::format("unknown model '{}'", text));
      rc.selection = *sel;
    }
    read(*it, scope, "short_gap_limit_s", rc.short_gap_limit_s);
    read(*it, scope, "context_length_s", rc.context_length_s);
    read(*it, scope, "slope_threshold", rc.slope_threshold);
    if (it->contains("blend")) {
      read(*it, scope, "blend", text);
      const auto blend = parse_blend(text);
      if (!blend) bad(scope + "blend", fmt::format("unknown schedule '{}'", text));
      rc.blend_schedule = *blend;
    }
    if (it->contains("leader_speed")) {
      read(*it, scope, "leader_speed", text);
      if (text == "kinematic") {
        rc.predictor.leader_speed = LeaderSpeedMode::kKinematic;
      } else if (text == "zero-relative") {
        rc.predictor.leader_speed = LeaderSpeedMode::kZeroRelative;
      } else {
        bad(scope + "leader_speed", fmt::format("expected 'kinematic' or 'zero-relative', got '{}'", text));
      }
    }
    read(*it, scope, "idm_min_ratio", rc.predictor.idm_min_ratio);
  }
  if (const auto it = j.find("ga"); it != j.end()) {
    const std::string scope = "ga.";
    check_keys(*it, scope, {"population", "generations", "crossover", "mutation", "elitism"});
    read(*it, scope, "population", cfg.ga.population);
    read(*it, scope, "generations", cfg.ga.generations);
    read(*it, scope, "crossover", cfg.ga.crossover_rate);
    read(*it, scope, "mutation", cfg.ga.mutation_rate);
    read(*it, scope, "elitism", cfg.ga.elitism);
  }
  if (const auto it = j.find("bounds"); it != j.end()) {
    check_keys(*it, "bounds.", {"gipps", "idm", "pipes", "newell"});
    for (const auto& [model, params] : it->items()) {
      const ModelKind kind = *parse_model(model);
      const auto names = parameter_names(kind);
      const std::string scope = "bounds." + model + ".";
      if (!params.is_object()) bad(scope, "expected an object");
      for (const auto& [name, range] : params.items()) {
        const auto pos = std::find(names.begin(), names.end(), name);
        if (pos == names.end()) bad(scope + name, "unknown parameter");
        if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number()) {
          bad(scope + name, "expected [lo, hi]");
        }
        cfg.bounds[kind][static_cast<std::size_t>(pos - names.begin())] =
            ParamBound{range[0].get<double>(), range[1].get<double>()};
      }
    }
  }
  if (const auto it = j.find("filter"); it != j.end()) {
    const std::string scope = "filter.";
    check_keys(*it, scope, {"z_min", "z_max", "lane_half_width", "min_cluster_points", "cluster_radius"});
    read(*it, scope, "z_min", cfg.filter.z_min);
    read(*it, scope, "z_max", cfg.filter.z_max);
    read(*it, scope, "lane_half_width", cfg.filter.lane_half_width);
    read(*it, scope, "min_cluster_points", cfg.filter.min_cluster_points);
    read(*it, scope, "cluster_radius", cfg.filter.cluster_radius);
  }
  if (const auto it = j.find("ingest"); it != j.end()) {
    const std::string scope = "ingest.";
    check_keys(*it, scope, {"min_duration_s", "excluded_lanes", "first_excluded_right_lane", "headway_mismatch_m"});
    read(*it, scope, "min_duration_s", cfg.rules.min_duration_s);
    read(*it, scope, "excluded_lanes", cfg.rules.excluded_lanes);
    read(*it, scope, "first_excluded_right_lane", cfg.rules.first_excluded_right_lane);
    read(*it, scope, "headway_mismatch_m", cfg.rules.headway_mismatch_m);
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidInput, fmt::format("cannot open config {}", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, fmt::format("{}: {}", path.string(), e.what()));
  }
  RunConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

std::vector<ModelSelection> selections(const RunConfig& cfg) {
  std::vector<ModelSelection> out;
  for (const auto& name : cfg.models) {
    const auto sel = parse_selection(name);
    if (!sel) throw Error(ErrorKind::kInvalidInput, fmt::format("unknown model '{}'", name));
    if (std::find(out.begin(), out.end(), *sel) == out.end()) out.push_back(*sel);
  }
  return out;
}

ExperimentConfig experiment_config(const RunConfig& cfg) {
  ExperimentConfig ec;
  ec.seed = cfg.seed;
  ec.models = selections(cfg);
  ec.gap_count = cfg.gaps;
  ec.synthesis = cfg.synthesis;
  ec.reconstruction = cfg.reconstruction;
  ec.ga = cfg.ga;
  ec.ga.seed = cfg.seed;
  ec.bounds = cfg.bounds;
  ec.jobs = cfg.jobs;
  ec.validate();
  return ec;
}

}  // namespace trajfill::cli
