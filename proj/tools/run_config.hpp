#pragma once

// Full run configuration: JSON file, CLI overrides, echo into outputs.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "trajfill/experiment.hpp"
#include "trajfill/ngsim.hpp"
#include "trajfill/scan.hpp"

namespace trajfill::cli {

inline constexpr const char* kConfigEnv = "TRAJFILL_CONFIG";

struct RunConfig {
  std::uint64_t seed = 0;
  std::string dataset = "data";
  std::vector<std::string> inputs;
  std::vector<std::string> models{"gipps", "idm", "pipes", "newell"};
  std::size_t gaps = 112;
  std::size_t jobs = 1;
  GapSynthesisConfig synthesis;
  ReconstructionConfig reconstruction;
  GaConfig ga;  // seed comes from RunConfig::seed
  BoundsTable bounds = BoundsTable::defaults();
  FilterConfig filter;
  PairRules rules;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);

// Overlays the keys present in `j`; unknown keys and wrong types throw
// invalid-input errors naming the key.
void apply_json(RunConfig& cfg, const nlohmann::json& j);

RunConfig load_run_config(const std::filesystem::path& path);

std::vector<ModelSelection> selections(const RunConfig& cfg);
ExperimentConfig experiment_config(const RunConfig& cfg);

}  // namespace trajfill::cli
