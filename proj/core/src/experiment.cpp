#include "trajfill/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "trajfill/error.hpp"
#include "trajfill/rng.hpp"

namespace trajfill {
namespace {

constexpr std::uint64_t kPlanStream = 0x67617073;  // "gaps"

struct Job {
  std::size_t gap_id = 0;
  std::size_t input = 0;
  PlannedGap gap;
  ModelSelection model = ModelSelection::kGipps;
};

struct JobOutcome {
  std::optional<EvaluationRow> row;
  DiagnosticRow diagnostic;
};

JobOutcome run_job(const Job& job, const ExperimentInput& input, const VehiclePair& hidden,
                   const ExperimentConfig& cfg) {
  JobOutcome out;
  auto& d = out.diagnostic;
  d.gap_id = job.gap_id;
  d.pair_id = input.pair_id;
  d.model = std::string(selection_name(job.model));
  d.first_missing = job.gap.start;
  d.length = job.gap.length;
  try {
    const auto specs = detect_gaps(hidden.headway(), cfg.reconstruction.context_length_s);
    const auto spec = std::find_if(specs.begin(), specs.end(),
                                   [&](const GapSpec& g) { return g.first_missing == job.gap.start; });
    if (spec == specs.end() || spec->last_missing != job.gap.last()) {
      throw Error(ErrorKind::kInvalidInput, "planned gap not found in the hidden series", job.gap.start);
    }
    ReconstructionConfig rc = cfg.reconstruction;
    rc.selection = job.model;
    const GapReconstruction rec = reconstruct_gap(hidden, *spec, rc, cfg.ga, cfg.bounds, job.gap_id);
    d.method = std::string(method_name(rec.method));
    d.evaluations = rec.evaluations();
    d.whole_gap_blend = rec.whole_gap_blend;
    d.note = rec.diagnostic;
    if (rec.model) {
      d.chosen_model = std::string(model_name(*rec.model));
      for (const auto& c : rec.calibrations) {
        if (c.model == *rec.model) d.cost = c.cost;
      }
    }
    if (rec.reshape_start) d.reshape_start = std::to_string(*rec.reshape_start);
    if (rec.values.empty()) return out;

    auto values = hidden.headway().values();
    for (std::size_t k = 0; k < rec.values.size(); ++k) values[rec.first_missing + k] = rec.values[k];
    const GapScore score = score_gap(input.pair.headway(), hidden.headway().with_values(std::move(values)),
                                     IndexRange{job.gap.start, job.gap.last()});
    if (score.mape_excluded > 0) {
      d.note += fmt::format("{}{} samples under {} m left out of MAPE", d.note.empty() ? "" : "; ",
                            score.mape_excluded, kMinMapeHeadway);
    }
    out.row = EvaluationRow{job.gap_id,
                            input.pair_id,
                            d.model,
                            static_cast<double>(job.gap.length) * input.pair.headway().h(),
                            report_round(score.rmse_m),
                            report_round(score.mape_pct)};
  } catch (const std::exception& e) {
    d.method = "error";
    d.note = e.what();
  }
  return out;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (const char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

}  // namespace

void ExperimentConfig::validate() const {
  if (models.empty()) throw Error(ErrorKind::kInvalidInput, "no models selected");
  if (jobs == 0) throw Error(ErrorKind::kInvalidInput, "jobs must be >= 1");
  synthesis.validate();
  reconstruction.validate();
  ga.validate();
  bounds.validate();
}

ExperimentResult run_experiment(std::span<const ExperimentInput> inputs, const ExperimentConfig& cfg) {
  cfg.validate();
  if (inputs.empty()) throw Error(ErrorKind::kInvalidInput, "no pairs to evaluate");
  ExperimentResult result;

  const std::size_t pairs = inputs.size();
  std::vector<VehiclePair> hidden(pairs);
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t count = cfg.gap_count / pairs + (p < cfg.gap_count % pairs ? 1 : 0);
    if (count == 0) continue;
    GapPlan plan;
    try {
      plan = synthesize_gaps(inputs[p].pair.headway(), count, derive_seed(cfg.seed, p, kPlanStream), cfg.synthesis);
    } catch (const Error& e) {
      for (std::size_t k = 0; k < count; ++k) {
        DiagnosticRow d;
        d.gap_id = p + k * pairs;
        d.pair_id = inputs[p].pair_id;
        d.model = "-";
        d.method = "error";
        d.note = e.what();
        result.diagnostics.push_back(std::move(d));
        ++result.failures;
      }
      continue;
    }
    hidden[p] = inputs[p].pair.with_headway(hide_gaps(inputs[p].pair.headway(), plan));
    for (std::size_t k = 0; k < plan.gaps.size(); ++k) {
      for (const ModelSelection m : cfg.models) jobs.push_back(Job{p + k * pairs, p, plan.gaps[k], m});
    }
  }
  std::sort(jobs.begin(), jobs.end(), [&](const Job& a, const Job& b) {
    if (a.gap_id != b.gap_id) return a.gap_id < b.gap_id;
    const auto ia = std::find(cfg.models.begin(), cfg.models.end(), a.model);
    const auto ib = std::find(cfg.models.begin(), cfg.models.end(), b.model);
    return ia < ib;
  });

  std::vector<JobOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      outcomes[j] = run_job(jobs[j], inputs[jobs[j].input], hidden[jobs[j].input], cfg);
    }
  };
  const std::size_t threads = std::min(cfg.jobs, std::max<std::size_t>(1, jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (auto& o : outcomes) {
    if (o.row) {
      result.rows.push_back(std::move(*o.row));
    } else {
      ++result.failures;
    }
    result.diagnostics.push_back(std::move(o.diagnostic));
  }
  std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(),
                   [](const DiagnosticRow& a, const DiagnosticRow& b) { return a.gap_id < b.gap_id; });
  if (!result.rows.empty()) result.summary = summarize(result.rows);
  return result;
}

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticRow> rows) {
  out << "gap_id,pair_id,model,first_missing,length,method,chosen_model,cost,evaluations,reshape_start,"
         "whole_gap_blend,note\n";
  for (const auto& d : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{:.6f},{},{},{},{}\n", d.gap_id, csv_field(d.pair_id), d.model,
                       d.first_missing, d.length, d.method, d.chosen_model, d.cost, d.evaluations, d.reshape_start,
                       d.whole_gap_blend ? 1 : 0, csv_field(d.note));
  }
}

}  // namespace trajfill
