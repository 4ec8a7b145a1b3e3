#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "synthetic.hpp"
#include "trajfill/calibration.hpp"
#include "trajfill/error.hpp"
#include "trajfill/models.hpp"
#include "trajfill/rng.hpp"

using namespace trajfill;

namespace {

Trajectory constant_leader(double v, std::size_t n, double x0 = 100.0, double length = 4.5) {
  std::vector<SamplePoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 0.1 * static_cast<double>(i);
    pts[i] = {t, x0 + v * t, v};
  }
  return Trajectory(std::move(pts), length);
}

Trajectory follower_from_speeds(const std::vector<double>& v) {
  std::vector<SamplePoint> pts(v.size());
  double x = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) x += 0.05 * (v[i - 1] + v[i]);
    pts[i] = {0.1 * static_cast<double>(i), x, v[i]};
  }
  return Trajectory(std::move(pts));
}

const GippsParams kGipps{30.0, 2.0, 1.5, 2.0, 1.0};
const IdmParams kIdm{30.0, 1.0, 1.0, 1.5, 4.0, 2.0};

}  // namespace

TEST(Gipps, SafeSpeedAndStep) {
  const double v_safe = gipps_safe_speed(kGipps, 50.0, 10.0);
  EXPECT_NEAR(v_safe, -1.5 + std::sqrt(2.25 + 100.0 + 144.0), 1e-12);
  EXPECT_NEAR(v_safe, 14.192, 1e-3);
  EXPECT_NEAR(gipps_step(kGipps, 10.0, 50.0, 10.0), 10.2, 1e-12);
}

TEST(Gipps, StopsAtMinimumSpacingBehindStoppedLeader) {
  EXPECT_NEAR(gipps_safe_speed(kGipps, kGipps.s0, 0.0), 0.0, 1e-12);
  EXPECT_EQ(gipps_step(kGipps, 3.0, kGipps.s0, 0.0), 0.0);
}

TEST(Gipps, DesiredSpeedCapBinds) {
  EXPECT_EQ(gipps_step(kGipps, kGipps.v0, 1e6, kGipps.v0), kGipps.v0);
}

TEST(Gipps, CollisionIsReported) {
  try {
    gipps_step(kGipps, 10.0, 0.0, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCollision);
  }
}

TEST(Gipps, MonotoneInSpacingAndLeaderSpeed) {
  for (double v = 0.0; v <= 30.0; v += 3.0) {
    double prev = -1.0;
    for (double s = 0.5; s < 80.0; s += 0.5) {
      const double next = gipps_step(kGipps, v, s, 12.0);
      EXPECT_GE(next, prev);
      prev = next;
    }
    prev = -1.0;
    for (double vl = 0.0; vl < 35.0; vl += 0.5) {
      const double next = gipps_step(kGipps, v, 15.0, vl);
      EXPECT_GE(next, prev);
      prev = next;
    }
  }
}

TEST(Idm, ExamplesFromHandEvaluation) {
  EXPECT_NEAR(idm_accel(kIdm, 0.0, 0.0, kIdm.s0), 0.0, 1e-12);
  EXPECT_NEAR(idm_accel(kIdm, 0.0, 0.0, 1e12), kIdm.a, 1e-12);
  EXPECT_NEAR(idm_desired_gap(kIdm, 10.0, 0.0), 12.0, 1e-12);
  EXPECT_NEAR(idm_accel(kIdm, 10.0, 0.0, 20.0), 1.0 - std::pow(1.0 / 3.0, 4.0) - 0.36, 1e-12);
  EXPECT_NEAR(idm_accel(kIdm, 10.0, 0.0, 20.0), 0.62765, 1e-5);
  EXPECT_NEAR(idm_accel(kIdm, kIdm.v0, 0.0, 1e12), 0.0, 1e-12);
  EXPECT_THROW(idm_accel(kIdm, 5.0, 0.0, -1.0), Error);
}

TEST(Idm, MonotoneInApproachRateAndSpacing) {
  double prev = std::numeric_limits<double>::infinity();
  for (double dv = -2.0; dv < 8.0; dv += 0.25) {
    const double acc = idm_accel(kIdm, 15.0, dv, 25.0);
    if (idm_desired_gap(kIdm, 15.0, dv) > kIdm.s0) EXPECT_LT(acc, prev);
    prev = acc;
  }
  prev = -std::numeric_limits<double>::infinity();
  for (double s = 1.0; s < 100.0; s += 1.0) {
    const double acc = idm_accel(kIdm, 15.0, 1.0, s);
    EXPECT_GT(acc, prev);
    prev = acc;
  }
}

TEST(Simulate, NewellIsATranslation) {
  const auto leader = constant_leader(15.0, 300);
  const auto f = simulate_follower(NewellParams{1.0, 5.0}, leader, {}, 299);
  ASSERT_EQ(f.size(), 300u);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_NEAR(*leader[i].x - *f[i].x - 4.5, 20.0, 1e-9);
    EXPECT_NEAR(*f[i].v, 15.0, 1e-9);
  }
}

TEST(Simulate, IdmStandstillFixedPoint) {
  const auto leader = constant_leader(0.0, 200);
  const FollowerState init{100.0 - 4.5 - kIdm.s0, 0.0};
  const auto f = simulate_follower(kIdm, leader, init, 199);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_NEAR(*f[i].x, init.x, 1e-9);
    EXPECT_NEAR(*f[i].v, 0.0, 1e-9);
  }
}

TEST(Simulate, GippsConvergesToSteadySpacing) {
  const auto leader = constant_leader(10.0, 601);
  const FollowerState init{100.0 - 4.5 - 30.0, 5.0};
  const auto f = simulate_follower(kGipps, leader, init, 600);
  const double s_end = *leader[600].x - *f[600].x - 4.5;
  EXPECT_NEAR(s_end, kGipps.s0 + 10.0 * kGipps.dt_r, 0.1);
  EXPECT_NEAR(*f[600].v, 10.0, 0.05);
}

TEST(Simulate, GippsSteadyStateIsExactFixedPoint) {
  const auto leader = constant_leader(10.0, 300);
  const FollowerState init{100.0 - 4.5 - 12.0, 10.0};
  const auto f = simulate_follower(kGipps, leader, init, 299);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(*leader[i].x - *f[i].x - 4.5, 12.0, 1e-9);
}

TEST(Simulate, PipesHoldsItsSpacingRule) {
  const auto leader = synth::make_leader(4);
  const PipesParams p{3.0, 1.2};
  const double v0 = *leader[0].v;
  const auto f = simulate_follower(p, leader, {*leader[0].x - 4.5 - (3.0 + 1.2 * v0), v0}, leader.size() - 1);
  for (std::size_t i = 1; i < f.size(); ++i) {
    EXPECT_NEAR(*leader[i].x - *f[i].x - 4.5, p.b_clear + p.T * *f[i].v, 1e-9);
  }
}

TEST(Simulate, CollisionCarriesStepIndex) {
  const auto leader = constant_leader(0.0, 100);
  try {
    simulate_follower(kIdm, leader, {100.0 - 4.5 - 1.0, 20.0}, 99);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCollision);
    ASSERT_TRUE(e.index().has_value());
    EXPECT_GT(*e.index(), 0u);
  }
}

TEST(Predict, PipesConstantSpeed) {
  const auto f = follower_from_speeds(std::vector<double>(50, 10.0));
  const auto s = predict_headway(PipesParams{2.0, 1.0}, f, IndexRange{0, 49}, HeadwayAnchor{12.0});
  for (const double v : s) EXPECT_NEAR(v, 12.0, 1e-12);
}

TEST(Predict, GippsInversionExample) {
  const auto f = follower_from_speeds({10.0, 9.5, 9.5});
  const auto raw = raw_headway(kGipps, f, IndexRange{0, 0});
  EXPECT_NEAR(raw[0], 2.0 + (121.0 - 2.25 - 100.0) / 3.0, 1e-12);
  EXPECT_NEAR(raw[0], 8.25, 1e-12);
}

TEST(Predict, GippsSteadySpeedGivesSteadySpacing) {
  for (const double v : {5.0, 12.0, 25.0}) {
    const auto f = follower_from_speeds(std::vector<double>(10, v));
    const auto raw = raw_headway(kGipps, f, IndexRange{0, 8});
    for (const double s : raw) EXPECT_NEAR(s, kGipps.s0 + v * kGipps.dt_r, 1e-9);
  }
}

TEST(Predict, IdmInversionExample) {
  const auto f = follower_from_speeds(std::vector<double>(5, 15.0));
  const auto raw = raw_headway(kIdm, f, IndexRange{0, 3});
  for (const double s : raw) EXPECT_NEAR(s, 17.0 / std::sqrt(0.9375), 1e-9);
  EXPECT_NEAR(raw[0], 17.557, 1e-3);
}

TEST(Predict, AnchorIsExact) {
  const auto pair = synth::make_pair(synth::make_leader(8), synth::reference_gipps());
  for (const ModelParams& p : {ModelParams{kGipps}, ModelParams{kIdm}, ModelParams{PipesParams{}},
                               ModelParams{NewellParams{}}}) {
    const auto s = predict_headway(p, pair.follower(), IndexRange{300, 400}, HeadwayAnchor{17.25, 17.2});
    EXPECT_EQ(s.front(), 17.25) << model_name(kind_of(p));
    EXPECT_EQ(s.size(), 101u);
  }
}

TEST(Predict, RoundTripAtSteadyFollowing) {
  const auto leader = constant_leader(14.0, 400);
  for (const ModelParams& p : {ModelParams{kGipps}, ModelParams{NewellParams{1.3, 4.0}}}) {
    const auto pair = synth::make_pair(leader, p);
    const auto raw = raw_headway(p, pair.follower(), IndexRange{0, 380}, PredictorOptions{LeaderSpeedMode::kZeroRelative});
    for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(raw[i], pair.headway().at(i), 0.05);
  }
}

TEST(Predict, NewellSimulatePredictAreInverse) {
  const auto leader = synth::make_leader(21);
  for (const double tau : {0.5, 1.0, 1.7}) {
    const NewellParams p{tau, 6.0};
    const auto pair = synth::make_pair(leader, p);
    const std::size_t last = pair.headway().size() - 1 - static_cast<std::size_t>(std::ceil(tau / 0.1));
    const auto raw = raw_headway(p, pair.follower(), IndexRange{0, last});
    for (std::size_t i = 0; i <= last; ++i) EXPECT_NEAR(raw[i], pair.headway().at(i), 1e-9) << tau << " " << i;
  }
}

TEST(Predict, KinematicModeTracksLaggingFollower) {
  const auto pair = synth::make_pair(synth::make_leader(2), synth::reference_gipps());
  const auto& truth = pair.headway();
  const IndexRange range{500, 600};
  const HeadwayAnchor anchor{truth.at(500), truth.at(499)};
  const auto kin = predict_headway(synth::reference_gipps(), pair.follower(), range, anchor);
  const auto zero = predict_headway(synth::reference_gipps(), pair.follower(), range, anchor,
                                    PredictorOptions{LeaderSpeedMode::kZeroRelative});
  double err_kin = 0.0;
  double err_zero = 0.0;
  for (std::size_t k = 0; k < kin.size(); ++k) {
    err_kin = std::max(err_kin, std::abs(kin[k] - truth.at(500 + k)));
    err_zero = std::max(err_zero, std::abs(zero[k] - truth.at(500 + k)));
  }
  EXPECT_LT(err_kin, 0.25);
  EXPECT_LT(err_kin, err_zero);
}

TEST(Predict, FiniteAndPositiveAcrossBounds) {
  const auto bounds = BoundsTable::defaults();
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pair = synth::make_pair(synth::make_leader(100 + trial), synth::reference_gipps());
    for (const auto kind : kAllModels) {
      std::vector<double> v;
      for (const auto& b : bounds[kind]) v.push_back(rng.uniform(b.lo, b.hi));
      const auto p = from_vector(kind, v);
      for (const auto mode : {LeaderSpeedMode::kKinematic, LeaderSpeedMode::kZeroRelative}) {
        const auto s = predict_headway(p, pair.follower(), IndexRange{200, 900}, HeadwayAnchor{pair.headway().at(200)},
                                       PredictorOptions{mode});
        for (const double x : s) {
          ASSERT_TRUE(std::isfinite(x));
          ASSERT_GT(x, 0.0);
        }
      }
    }
  }
}

TEST(Params, VectorRoundTripAndValidation) {
  const ModelParams p = IdmParams{25.0, 1.2, 0.8, 2.0, 4.0, 1.5};
  EXPECT_EQ(to_vector(from_vector(ModelKind::kIdm, to_vector(p))), to_vector(p));
  EXPECT_THROW(validate(GippsParams{70.0, 1.0, 1.0, 1.0, 1.0}), Error);
  EXPECT_THROW(validate(GippsParams{20.0, 1.0, 1.0, 1.0, 0.2}), Error);
  EXPECT_THROW(validate(IdmParams{20.0, 1.0, 1.0, 1.0, 11.0, 1.0}), Error);
  EXPECT_THROW(validate(PipesParams{0.0, 1.0}), Error);
  EXPECT_THROW(from_vector(ModelKind::kNewell, std::vector<double>{1.0}), Error);
  EXPECT_EQ(parse_model("idm"), ModelKind::kIdm);
  EXPECT_FALSE(parse_model("krauss").has_value());
}
