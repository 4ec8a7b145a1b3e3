#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "synthetic.hpp"
#include "trajfill/error.hpp"
#include "trajfill/evaluation.hpp"
#include "trajfill/rng.hpp"

using namespace trajfill;

TEST(SynthesizeGaps, RespectsLengthsAndMargins) {
  const auto series = synth::linear_series(20.0, 0.0, 6000);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto plan = synthesize_gaps(series, 12, seed);
    ASSERT_EQ(plan.gaps.size(), 12u);
    EXPECT_GE(plan.gaps.front().start, 50u);
    EXPECT_LE(plan.gaps.back().last(), 6000u - 51u);
    for (std::size_t g = 0; g < plan.gaps.size(); ++g) {
      EXPECT_GE(plan.gaps[g].length, 50u);
      EXPECT_LE(plan.gaps[g].length, 150u);
      if (g > 0) EXPECT_GE(plan.gaps[g].start - plan.gaps[g - 1].last() - 1, 50u);
    }
    const auto hidden = hide_gaps(series, plan);
    const auto detected = detect_gaps(hidden);
    ASSERT_EQ(detected.size(), plan.gaps.size());
    for (std::size_t g = 0; g < detected.size(); ++g) {
      EXPECT_EQ(detected[g].first_missing, plan.gaps[g].start);
      EXPECT_EQ(detected[g].length(), plan.gaps[g].length);
      EXPECT_TRUE(detected[g].reconstructable);
    }
  }
}

TEST(SynthesizeGaps, DeterministicPerSeed) {
  const auto series = synth::linear_series(20.0, 0.0, 3000);
  EXPECT_EQ(synthesize_gaps(series, 5, 77).gaps, synthesize_gaps(series, 5, 77).gaps);
  EXPECT_NE(synthesize_gaps(series, 5, 77).gaps, synthesize_gaps(series, 5, 78).gaps);
  EXPECT_TRUE(synthesize_gaps(series, 0, 1).gaps.empty());
}

TEST(SynthesizeGaps, CapacityAndInputErrors) {
  const auto tiny = synth::linear_series(20.0, 0.0, 140);
  try {
    synthesize_gaps(tiny, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapacity);
  }
  const auto crowded = synth::linear_series(20.0, 0.0, 600);
  EXPECT_THROW(synthesize_gaps(crowded, 10, 1), Error);
  EXPECT_THROW(synthesize_gaps(synth::with_missing(crowded, 10, 20), 1, 1), Error);
  GapSynthesisConfig bad;
  bad.min_length_s = 20.0;
  EXPECT_THROW(synthesize_gaps(crowded, 1, 1, bad), Error);
}

TEST(ScoreGap, RmseAndMapeExamples) {
  const HeadwaySeries truth(0.0, {10.0, 10.0, 10.0, 20.0, 10.0});
  const HeadwaySeries rec(0.0, {10.0, 15.0, 10.0, 20.0, 10.0});
  const auto score = score_gap(truth, rec, {1, 2});
  // errors {5, 0}: RMSE sqrt(25 / 2), MAPE mean{50%, 0%}
  EXPECT_NEAR(score.rmse_m, std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(score.mape_pct, 25.0, 1e-12);
  EXPECT_EQ(score.samples, 2u);
  const HeadwaySeries rec2(0.0, {10.0, 11.0, 9.0, 22.0, 10.0});
  EXPECT_NEAR(score_gap(truth, rec2, {1, 3}).mape_pct, 10.0, 1e-12);
}

TEST(ScoreGap, TinyTruthExcludedFromMapeOnly) {
  const HeadwaySeries truth(0.0, {1.0, 0.05, 2.0});
  const HeadwaySeries rec(0.0, {1.0, 1.05, 2.2});
  const auto score = score_gap(truth, rec, {1, 2});
  EXPECT_NEAR(score.rmse_m, std::sqrt((1.0 + 0.04) / 2.0), 1e-12);
  EXPECT_NEAR(score.mape_pct, 10.0, 1e-12);
  EXPECT_EQ(score.mape_excluded, 1u);
}

TEST(ScoreGap, MissingValuesAreScoringErrors) {
  const HeadwaySeries truth(0.0, {1.0, 2.0, 3.0});
  const HeadwaySeries rec(0.0, {1.0, std::nullopt, 3.0});
  try {
    score_gap(truth, rec, {1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kScoring);
  }
  EXPECT_THROW(score_gap(truth, truth, {1, 5}), Error);
}

TEST(SummaryStats, Examples) {
  const std::vector<double> two{1.0, 3.0};
  const auto st = summary_stats(two);
  EXPECT_EQ(st.min, 1.0);
  EXPECT_EQ(st.max, 3.0);
  EXPECT_EQ(st.average, 2.0);
  EXPECT_EQ(st.median, 2.0);
  EXPECT_NEAR(st.std, std::sqrt(2.0), 1e-15);
  const std::vector<double> one{4.0};
  const auto single = summary_stats(one);
  EXPECT_EQ(single.median, 4.0);
  EXPECT_EQ(single.std, 0.0);
  const std::vector<double> odd{5.0, 1.0, 9.0};
  EXPECT_EQ(summary_stats(odd).median, 5.0);
  EXPECT_THROW(summary_stats(std::vector<double>{}), Error);
}

TEST(Summarize, GroupsByModelInFirstAppearanceOrder) {
  const std::vector<EvaluationRow> rows{{0, "p", "newell", 10.0, 1.0, 10.0},
                                        {0, "p", "gipps", 10.0, 2.0, 20.0},
                                        {1, "p", "newell", 12.0, 3.0, 30.0}};
  const auto summary = summarize(rows);
  ASSERT_EQ(summary.size(), 4u);
  EXPECT_EQ(summary[0].model, "newell");
  EXPECT_EQ(summary[0].metric, "mape_pct");
  EXPECT_EQ(summary[0].stats.average, 20.0);
  EXPECT_EQ(summary[1].metric, "rmse_m");
  EXPECT_EQ(summary[1].stats.max, 3.0);
  EXPECT_EQ(summary[2].model, "gipps");
  EXPECT_EQ(summary[3].stats.std, 0.0);
}

TEST(Summarize, AverageMatchesDirectMean) {
  Rng rng(2);
  std::vector<EvaluationRow> rows;
  double sum = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const double r = rng.uniform(0.0, 5.0);
    sum += r;
    rows.push_back({i, "p", "idm", 7.0, r, 3.0 * r});
  }
  const auto summary = summarize(rows);
  EXPECT_NEAR(summary[1].stats.average, sum / 50.0, 1e-12);
  EXPECT_NEAR(summary[0].stats.average, 3.0 * sum / 50.0, 1e-9);
  EXPECT_LE(summary[1].stats.min, summary[1].stats.median);
  EXPECT_LE(summary[1].stats.median, summary[1].stats.max);
}

TEST(ReportRound, SixDecimals) {
  EXPECT_EQ(report_round(1.23456749), 1.234567);
  EXPECT_EQ(report_round(2.0), 2.0);
  EXPECT_EQ(report_round(0.0000004), 0.0);
}

TEST(PerGapCsv, RoundTrip) {
  const std::vector<EvaluationRow> rows{{0, "data/a", "gipps", 10.3, 1.25, 8.5},
                                        {1, "data/b", "newell", 5.0, 0.123456789, 1.0}};
  std::stringstream buf;
  write_per_gap_csv(buf, rows);
  const std::string text = buf.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "gap_id,pair_id,model,gap_len_s,rmse_m,mape_pct");
  EXPECT_NE(text.find("1,data/b,newell,5.0,0.123457,1.000000"), std::string::npos) << text;
  const auto back = read_per_gap_csv(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pair_id, "data/a");
  EXPECT_EQ(back[1].rmse_m, 0.123457);
  std::stringstream summary;
  write_summary_csv(summary, summarize(back));
  EXPECT_EQ(summary.str().substr(0, summary.str().find('\n')), "model,metric,min,max,average,median,std");
}
