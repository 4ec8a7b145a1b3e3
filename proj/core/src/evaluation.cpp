#include "trajfill/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "trajfill/error.hpp"
#include "trajfill/rng.hpp"

namespace trajfill {

void GapSynthesisConfig::validate() const {
  if (!(min_length_s > 0.0) || !(max_length_s >= min_length_s)) {
    throw Error(ErrorKind::kInvalidInput, "gap lengths need 0 < min <= max");
  }
  if (!(margin_s >= 0.0)) throw Error(ErrorKind::kInvalidInput, "gap margin must be >= 0");
  if (attempts_per_gap == 0) throw Error(ErrorKind::kInvalidInput, "attempts_per_gap must be > 0");
}

GapPlan synthesize_gaps(const HeadwaySeries& series, std::size_t count, std::uint64_t seed,
                        const GapSynthesisConfig& cfg) {
  cfg.validate();
  if (series.missing_count() != 0) {
    throw Error(ErrorKind::kInvalidInput, "gap synthesis needs a complete series");
  }
  GapPlan plan{seed, {}};
  if (count == 0) return plan;

  const double h = series.h();
  const std::size_t margin = samples_for(cfg.margin_s, h);
  const std::size_t n = series.size();
  Rng rng(seed);

  const std::size_t max_attempts = count * cfg.attempts_per_gap;
  std::size_t attempts = 0;
  while (plan.gaps.size() < count) {
    if (attempts++ >= max_attempts) {
      throw Error(ErrorKind::kCapacity,
                  fmt::format("placed {} of {} gaps in a {:.1f} s series after {} attempts", plan.gaps.size(),
                              count, static_cast<double>(n) * h, max_attempts));
    }
    const double len_s = rng.uniform(cfg.min_length_s, cfg.max_length_s);
    const std::size_t len = std::max<std::size_t>(1, samples_for(len_s, h));
    if (n < 2 * margin + len) continue;
    const std::size_t lo = margin;
    const std::size_t hi = n - margin - len;  // inclusive start bound
    const std::size_t start = lo + rng.index(hi - lo + 1);
    const PlannedGap candidate{start, len};
    const bool clear = std::all_of(plan.gaps.begin(), plan.gaps.end(), [&](const PlannedGap& g) {
      // Other gap must sit outside [start - margin, last + margin].
      return g.last() + margin < candidate.start || candidate.last() + margin < g.start;
    });
    if (clear) plan.gaps.push_back(candidate);
  }
  std::sort(plan.gaps.begin(), plan.gaps.end(),
            [](const PlannedGap& a, const PlannedGap& b) { return a.start < b.start; });
  return plan;
}

HeadwaySeries hide_gaps(const HeadwaySeries& series, const GapPlan& plan) {
  auto values = series.values();
  for (const auto& g : plan.gaps) {
    if (g.last() >= values.size()) {
      throw Error(ErrorKind::kInvalidInput, "planned gap exceeds the series", g.start);
    }
    for (std::size_t i = g.start; i <= g.last(); ++i) values[i].reset();
  }
  return series.with_values(std::move(values));
}

GapScore score_gap(const HeadwaySeries& truth, const HeadwaySeries& reconstructed, IndexRange gap) {
  if (gap.last >= truth.size() || gap.last >= reconstructed.size() || gap.last < gap.first) {
    throw Error(ErrorKind::kScoring, "gap outside the scored series");
  }
  GapScore score;
  double sq = 0.0;
  double pct = 0.0;
  std::size_t pct_n = 0;
  for (std::size_t i = gap.first; i <= gap.last; ++i) {
    if (!truth.present(i) || !reconstructed.present(i)) {
      throw Error(ErrorKind::kScoring, fmt::format("sample {} missing in truth or reconstruction", i), i);
    }
    const double s = *truth[i];
    const double e = *reconstructed[i] - s;
    sq += e * e;
    ++score.samples;
    if (s < kMinMapeHeadway) {
      ++score.mape_excluded;
      continue;
    }
    pct += std::abs(e) / s;
    ++pct_n;
  }
  if (pct_n == 0) throw Error(ErrorKind::kScoring, "no usable samples for MAPE", gap.first);
  score.rmse_m = std::sqrt(sq / static_cast<double>(score.samples));
  score.mape_pct = 100.0 * pct / static_cast<double>(pct_n);
  return score;
}

SummaryStats summary_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kInvalidInput, "summary of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  SummaryStats st;
  st.min = sorted.front();
  st.max = sorted.back();
  st.average = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  st.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  if (n > 1) {
    double ss = 0.0;
    for (const double v : sorted) ss += (v - st.average) * (v - st.average);
    st.std = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return st;
}

std::vector<SummaryRow> summarize(std::span<const EvaluationRow> rows) {
  std::vector<std::string> models;
  for (const auto& r : rows) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
  }
  std::vector<SummaryRow> out;
  for (const auto& model : models) {
    std::vector<double> mape;
    std::vector<double> rmse;
    for (const auto& r : rows) {
      if (r.model != model) continue;
      mape.push_back(r.mape_pct);
      rmse.push_back(r.rmse_m);
    }
    out.push_back({model, "mape_pct", summary_stats(mape)});
    out.push_back({model, "rmse_m", summary_stats(rmse)});
  }
  return out;
}

double report_round(double value) {
  const std::string text = fmt::format("{:.6f}", value);
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

void write_per_gap_csv(std::ostream& out, std::span<const EvaluationRow> rows) {
  out << "gap_id,pair_id,model,gap_len_s,rmse_m,mape_pct\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{:.1f},{:.6f},{:.6f}\n", r.gap_id, r.pair_id, r.model, r.gap_len_s, r.rmse_m,
                       r.mape_pct);
  }
}

std::vector<EvaluationRow> read_per_gap_csv(std::istream& in) {
  std::vector<EvaluationRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "gap_id,pair_id,model,gap_len_s,rmse_m,mape_pct") {
        throw Error(ErrorKind::kParse, fmt::format("line {}: unexpected per_gap.csv header", line_no), line_no);
      }
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 6) {
      throw Error(ErrorKind::kParse, fmt::format("line {}: expected 6 fields", line_no), line_no);
    }
    EvaluationRow r;
    auto num = [&](const std::string& s, auto& out) {
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorKind::kParse, fmt::format("line {}: bad number '{}'", line_no, s), line_no);
      }
    };
    num(f[0], r.gap_id);
    r.pair_id = f[1];
    r.model = f[2];
    num(f[3], r.gap_len_s);
    num(f[4], r.rmse_m);
    num(f[5], r.mape_pct);
    rows.push_back(std::move(r));
  }
  if (!header) throw Error(ErrorKind::kParse, "per_gap.csv is empty");
  return rows;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "model,metric,min,max,average,median,std\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.model, r.metric, r.stats.min, r.stats.max,
                       r.stats.average, r.stats.median, r.stats.std);
  }
}

}  // namespace trajfill
