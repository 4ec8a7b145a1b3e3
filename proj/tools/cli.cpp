#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "run_config.hpp"
#include "trajfill/error.hpp"
#include "trajfill/pair_io.hpp"

namespace trajfill::cli {
namespace {

namespace fs = std::filesystem;

// Thrown for usage problems that map to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config;
};

struct GaFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> population;
  std::optional<std::size_t> generations;
  std::optional<double> crossover;
  std::optional<double> mutation;

  void add(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Global seed");
    cmd->add_option("--ga-pop", population, "GA population size (20)");
    cmd->add_option("--ga-gens", generations, "GA generations (50)");
    cmd->add_option("--ga-crossover", crossover, "GA crossover rate (0.7)");
    cmd->add_option("--ga-mutation", mutation, "GA mutation rate (0.1)");
  }

  void apply(RunConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (population) cfg.ga.population = *population;
    if (generations) cfg.ga.generations = *generations;
    if (crossover) cfg.ga.crossover_rate = *crossover;
    if (mutation) cfg.ga.mutation_rate = *mutation;
  }
};

RunConfig base_config(const std::string& flag_path) {
  std::string path = flag_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv); env != nullptr) path = env;
  }
  if (path.empty()) return RunConfig{};
  if (!fs::exists(path)) throw UsageError(fmt::format("config file not found: {}", path));
  return load_run_config(path);
}

void require_exists(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError(fmt::format("input not found: {}", path.string()));
}

void write_config(const fs::path& dir, const RunConfig& cfg) {
  std::ofstream out(dir / "config.json");
  out << to_json(cfg).dump(2) << '\n';
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kInvalidInput, fmt::format("cannot write {}", path.string()));
  return out;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    require_exists(in);
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  return files;
}

int cmd_ingest(const std::string& input, const std::string& out_dir, std::optional<double> min_duration,
               const CommonOptions& common, std::ostream& out, std::ostream& err) {
  RunConfig cfg = base_config(common.config);
  if (min_duration) cfg.rules.min_duration_s = *min_duration;
  cfg.inputs = {input};
  require_exists(input);

  std::ifstream in(input);
  const NgsimParseResult parsed = parse_ngsim(in);
  for (const auto& w : parsed.warnings) err << "warning: " << w << '\n';
  const ExtractionResult extracted = extract_pairs(parsed.records, cfg.rules);

  fs::create_directories(out_dir);
  nlohmann::ordered_json summary;
  summary["input"] = input;
  summary["min_duration_s"] = cfg.rules.min_duration_s;
  summary["records"] = parsed.records.size();
  summary["candidates"] = extracted.summary.candidates;
  summary["accepted"] = extracted.summary.accepted;
  nlohmann::ordered_json rejected = nlohmann::ordered_json::object();
  for (const auto& [why, count] : extracted.summary.rejected) rejected[std::string(rejection_name(why))] = count;
  summary["rejected"] = rejected;
  summary["headway_mismatch_rows"] = extracted.summary.headway_mismatch_rows;
  std::vector<std::string> files;
  for (const auto& p : extracted.pairs) {
    const std::string name = fmt::format("f{}_l{}.csv", p.follower_id, p.leader_id);
    write_pair_file(fs::path(out_dir) / name, p.pair);
    files.push_back(name);
  }
  summary["pairs"] = files;
  summary["diagnostics"] = extracted.summary.diagnostics;
  std::ofstream(fs::path(out_dir) / "extraction_summary.json") << summary.dump(2) << '\n';
  write_config(out_dir, cfg);

  out << fmt::format("{} of {} candidate pairs accepted (min duration {:.1f} s); written to {}\n",
                     extracted.summary.accepted, extracted.summary.candidates, cfg.rules.min_duration_s, out_dir);
  for (const auto& [why, count] : extracted.summary.rejected) {
    out << fmt::format("  rejected {}: {}\n", rejection_name(why), count);
  }
  return 0;
}

struct ScanFlags {
  std::optional<double> z_min;
  std::optional<double> z_max;
  std::optional<double> lane_half_width;
};

int cmd_scan2traj(const std::string& input, const std::string& output, const ScanFlags& flags,
                  const CommonOptions& common, std::ostream& out) {
  RunConfig cfg = base_config(common.config);
  if (flags.z_min) cfg.filter.z_min = *flags.z_min;
  if (flags.z_max) cfg.filter.z_max = *flags.z_max;
  if (flags.lane_half_width) cfg.filter.lane_half_width = *flags.lane_half_width;
  require_exists(input);

  const auto scans = read_scan_file(input);
  const HeadwaySeries series = scans_to_headway(scans, cfg.filter);
  auto file = open_out(output);
  write_headway(file, series, fs::path(input).stem().string());
  const auto gaps = series.missing_count() > 0 ? detect_gaps(series) : std::vector<GapSpec>{};
  out << fmt::format("{} scans, {} missing samples in {} gaps; written to {}\n", scans.size(),
                     series.missing_count(), gaps.size(), output);
  return 0;
}

struct ExperimentFlags {
  std::vector<std::string> inputs;
  std::string out_dir;
  std::vector<std::string> models;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> gaps;
  std::optional<std::string> dataset;
  GaFlags ga;
};

int cmd_experiment(const ExperimentFlags& flags, const CommonOptions& common, std::ostream& out,
                   std::ostream& err) {
  RunConfig cfg = base_config(common.config);
  flags.ga.apply(cfg);
  if (!flags.inputs.empty()) cfg.inputs = flags.inputs;
  if (!flags.models.empty()) cfg.models = flags.models;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  if (flags.gaps) cfg.gaps = *flags.gaps;
  if (flags.dataset) cfg.dataset = *flags.dataset;
  if (cfg.inputs.empty()) throw UsageError("no input pair files given");

  const ExperimentConfig ec = experiment_config(cfg);
  const auto files = expand_inputs(cfg.inputs);
  if (files.empty()) throw UsageError("no pair files found in the inputs");
  std::vector<ExperimentInput> inputs;
  for (const auto& f : files) inputs.push_back({cfg.dataset + "/" + f.stem().string(), read_pair_file(f)});

  const ExperimentResult result = run_experiment(inputs, ec);
  const fs::path dir(flags.out_dir);
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "per_gap.csv");
    write_per_gap_csv(f, result.rows);
  }
  {
    auto f = open_out(dir / "summary.csv");
    write_summary_csv(f, result.summary);
  }
  {
    auto f = open_out(dir / "diagnostics.csv");
    write_diagnostics_csv(f, result.diagnostics);
  }
  write_config(dir, cfg);

  out << fmt::format("{} pairs, {} scored rows, {} failed jobs; written to {}\n", inputs.size(),
                     result.rows.size(), result.failures, dir.string());
  if (result.rows.empty()) {
    err << "error: no gap could be scored; see diagnostics.csv\n";
    return 1;
  }
  return 0;
}

struct ReconstructFlags {
  std::string input;
  std::string output;
  std::string diagnostics;
  std::optional<std::string> model;
  GaFlags ga;
};

int cmd_reconstruct(const ReconstructFlags& flags, const CommonOptions& common, std::ostream& out) {
  RunConfig cfg = base_config(common.config);
  flags.ga.apply(cfg);
  if (flags.model) {
    const auto sel = parse_selection(*flags.model);
    if (!sel) throw UsageError(fmt::format("unknown model '{}'", *flags.model));
    cfg.reconstruction.selection = *sel;
  }
  cfg.inputs = {flags.input};
  require_exists(flags.input);
  cfg.ga.seed = cfg.seed;
  cfg.bounds.validate();

  const VehiclePair pair = read_pair_file(flags.input);
  const PairReconstruction rec = reconstruct_pair(pair, cfg.reconstruction, cfg.ga, cfg.bounds);
  {
    auto f = open_out(flags.output);
    write_pair(f, rec.pair);
  }
  fs::path diag_path = flags.diagnostics;
  if (diag_path.empty()) {
    const fs::path o(flags.output);
    diag_path = o.parent_path() / (o.stem().string() + "_diagnostics.csv");
  }
  auto diag = open_out(diag_path);
  diag << "gap_index,first_missing,last_missing,method,model,cost,evaluations,reshape_start,whole_gap_blend,note\n";
  std::size_t filled = 0;
  for (std::size_t g = 0; g < rec.gaps.size(); ++g) {
    const auto& r = rec.gaps[g];
    double cost = 0.0;
    for (const auto& c : r.calibrations) {
      if (r.model && c.model == *r.model) cost = c.cost;
    }
    if (r.method != FillMethod::kSkipped) ++filled;
    std::string note = r.diagnostic;
    std::replace(note.begin(), note.end(), ',', ';');
    diag << fmt::format("{},{},{},{},{},{:.6f},{},{},{},{}\n", g, r.first_missing, r.last_missing,
                        method_name(r.method), r.model ? model_name(*r.model) : "", cost, r.evaluations(),
                        r.reshape_start ? std::to_string(*r.reshape_start) : "", r.whole_gap_blend ? 1 : 0, note);
  }
  out << fmt::format("{} gaps, {} filled; written to {}\n", rec.gaps.size(), filled, flags.output);
  return 0;
}

int cmd_report(const std::string& input, const std::string& output, std::ostream& out) {
  require_exists(input);
  std::ifstream in(input);
  const auto rows = read_per_gap_csv(in);
  if (rows.empty()) throw Error(ErrorKind::kScoring, "per_gap.csv has no rows");
  const auto summary = summarize(rows);
  if (output.empty()) {
    write_summary_csv(out, summary);
  } else {
    auto f = open_out(output);
    write_summary_csv(f, summary);
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gap reconstruction for leader-follower headway data", "trajfill"};
  app.require_subcommand(1);
  CommonOptions common;
  app.add_option("--config", common.config, "JSON run configuration (default: $TRAJFILL_CONFIG)");

  std::string ingest_input;
  std::string ingest_out;
  std::optional<double> min_duration;
  auto* ingest = app.add_subcommand("ingest", "Extract leader-follower pairs from an NGSIM trajectory file");
  ingest->add_option("input", ingest_input, "NGSIM trajectory text file")->required();
  ingest->add_option("-o,--out-dir", ingest_out, "Directory for pair files")->required();
  ingest->add_option("--min-duration", min_duration, "Minimum pair duration in seconds (50)");

  std::string scan_input;
  std::string scan_output;
  ScanFlags scan_flags;
  auto* scan = app.add_subcommand("scan2traj", "Turn decoded LIDAR scans into a headway series");
  scan->add_option("input", scan_input, "Scan file")->required();
  scan->add_option("-o,--output", scan_output, "Headway series file")->required();
  scan->add_option("--z-min", scan_flags.z_min, "Lowest kept elevation, m");
  scan->add_option("--z-max", scan_flags.z_max, "Highest kept elevation, m");
  scan->add_option("--lane-half-width", scan_flags.lane_half_width, "Lane half width, m");

  ExperimentFlags exp_flags;
  auto* exp = app.add_subcommand("experiment", "Synthesize gaps, reconstruct, score and summarize");
  exp->add_option("inputs", exp_flags.inputs, "Pair files or directories of pair files");
  exp->add_option("-o,--out-dir", exp_flags.out_dir, "Output directory")->required();
  exp->add_option("--model", exp_flags.models, "Model to run (gipps, idm, pipes, newell, best); repeatable")
      ->delimiter(',');
  exp->add_option("--jobs", exp_flags.jobs, "Worker threads");
  exp->add_option("--gaps", exp_flags.gaps, "Number of synthetic gaps (112)");
  exp->add_option("--dataset", exp_flags.dataset, "Dataset tag used in pair ids");
  exp_flags.ga.add(exp);

  ReconstructFlags rec_flags;
  auto* rec = app.add_subcommand("reconstruct", "Fill every gap of one pair file");
  rec->add_option("input", rec_flags.input, "Pair file")->required();
  rec->add_option("-o,--output", rec_flags.output, "Filled pair file")->required();
  rec->add_option("--diagnostics", rec_flags.diagnostics, "Per-gap diagnostics CSV");
  rec->add_option("--model", rec_flags.model, "gipps, idm, pipes, newell or best");
  rec_flags.ga.add(rec);

  std::string report_input;
  std::string report_output;
  auto* report = app.add_subcommand("report", "Recompute summary statistics from per_gap.csv");
  report->add_option("input", report_input, "per_gap.csv")->required();
  report->add_option("-o,--output", report_output, "summary.csv (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(ingest_input, ingest_out, min_duration, common, out, err);
    if (scan->parsed()) return cmd_scan2traj(scan_input, scan_output, scan_flags, common, out);
    if (exp->parsed()) return cmd_experiment(exp_flags, common, out, err);
    if (rec->parsed()) return cmd_reconstruct(rec_flags, common, out);
    if (report->parsed()) return cmd_report(report_input, report_output, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (e.index()) err << fmt::format(" (at index {})", *e.index());
    err << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace trajfill::cli
