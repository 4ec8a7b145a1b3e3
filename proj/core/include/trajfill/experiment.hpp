#pragma once

// Evaluation harness: synthesize gaps in complete pairs, reconstruct them
// with each selected model, score and summarize.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trajfill/calibration.hpp"
#include "trajfill/evaluation.hpp"
#include "trajfill/reconstruction.hpp"

namespace trajfill {

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::vector<ModelSelection> models{ModelSelection::kGipps, ModelSelection::kIdm, ModelSelection::kPipes,
                                     ModelSelection::kNewell};
  std::size_t gap_count = 112;
  GapSynthesisConfig synthesis;
  ReconstructionConfig reconstruction;
  GaConfig ga;
  BoundsTable bounds = BoundsTable::defaults();
  std::size_t jobs = 1;

  void validate() const;
};

struct ExperimentInput {
  std::string pair_id;
  VehiclePair pair;
};

struct DiagnosticRow {
  std::size_t gap_id = 0;
  std::string pair_id;
  std::string model;
  std::size_t first_missing = 0;
  std::size_t length = 0;
  std::string method;  // fill method, or "error"
  std::string chosen_model;
  double cost = 0.0;
  std::size_t evaluations = 0;
  std::string reshape_start;  // absolute index, empty when not reshaped
  bool whole_gap_blend = false;
  std::string note;
};

struct ExperimentResult {
  std::vector<EvaluationRow> rows;  // by gap id, then model order
  std::vector<SummaryRow> summary;
  std::vector<DiagnosticRow> diagnostics;
  std::size_t failures = 0;
};

// Gap j goes to pair j mod P. Each pair's gaps are planned together with a
// seed derived from cfg.seed and the pair index, so results do not depend
// on cfg.jobs.
ExperimentResult run_experiment(std::span<const ExperimentInput> inputs, const ExperimentConfig& cfg);

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticRow> rows);

}  // namespace trajfill
