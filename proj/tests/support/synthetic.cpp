#include "synthetic.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <variant>

#include <fmt/format.h>

#include "trajfill/rng.hpp"

namespace trajfill::synth {
namespace {

double steady_spacing(const ModelParams& params, double v) {
  return std::visit(
      [v](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GippsParams>) {
          return p.s0 + v * p.dt_r;
        } else if constexpr (std::is_same_v<P, IdmParams>) {
          return idm_desired_gap(p, v, 0.0) / std::sqrt(1.0 - std::pow(v / p.v0, p.delta));
        } else if constexpr (std::is_same_v<P, PipesParams>) {
          return p.b_clear + p.T * v;
        } else {
          return p.d + v * p.tau;
        }
      },
      params);
}

double truncated_normal(Rng& rng, double sigma) {
  for (;;) {
    const double z = rng.normal();
    if (std::abs(z) <= 2.0) return sigma * z;
  }
}

}  // namespace

Trajectory make_leader(std::uint64_t seed, const LeaderProfile& profile) {
  Rng rng(seed);
  double amp[2];
  double omega[2];
  double phase[2];
  for (int k = 0; k < 2; ++k) {
    amp[k] = rng.uniform(profile.min_amplitude, profile.max_amplitude);
    omega[k] = 2.0 * std::numbers::pi / rng.uniform(profile.min_period_s, profile.max_period_s);
    phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  auto speed = [&](double t) {
    double v = profile.base_speed;
    for (int k = 0; k < 2; ++k) v += amp[k] * std::sin(omega[k] * t + phase[k]);
    return std::max(0.0, v);
  };
  const std::size_t n = samples_for(profile.duration_s) + 1;
  std::vector<SamplePoint> pts(n);
  double x = 100.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * kSampleInterval;
    if (i > 0) x += 0.5 * kSampleInterval * (speed(t - kSampleInterval) + speed(t));
    pts[i] = SamplePoint{t, x, speed(t)};
  }
  return Trajectory(std::move(pts), kLeaderLength, "L");
}

VehiclePair make_pair(const Trajectory& leader, const ModelParams& params) {
  const double v = *leader[0].v;
  const FollowerState init{*leader[0].x - kLeaderLength - steady_spacing(params, v), v};
  Trajectory follower = simulate_follower(params, leader, init, leader.size() - 1);
  std::vector<std::optional<double>> s(leader.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = *leader[i].x - *follower[i].x - kLeaderLength;
  const double t0 = leader.t0();
  return VehiclePair(leader, std::move(follower), HeadwaySeries(t0, std::move(s)));
}

HeadwaySeries linear_series(double a, double b, std::size_t n, double t0) {
  std::vector<std::optional<double>> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = a + b * static_cast<double>(i) * kSampleInterval;
  return HeadwaySeries(t0, std::move(s));
}

HeadwaySeries with_missing(const HeadwaySeries& series, std::size_t first, std::size_t last) {
  auto values = series.values();
  for (std::size_t i = first; i <= last; ++i) values[i].reset();
  return series.with_values(std::move(values));
}

std::vector<PointScan> make_box_scans(const std::vector<std::optional<double>>& headway, const ScanScene& scene,
                                      std::int64_t first_id) {
  Rng rng(scene.seed);
  std::vector<PointScan> scans;
  for (std::size_t i = 0; i < headway.size(); ++i) {
    PointScan scan{first_id + static_cast<std::int64_t>(i), {}};
    auto& pts = scan.points;
    // Clutter that the filter must remove: ground, overhead, adjacent lane, behind.
    for (int k = 1; k <= 20; ++k) pts.push_back({rng.uniform(-1.5, 1.5), 1.5 * k, 0.05});
    for (int k = 0; k < 6; ++k) pts.push_back({0.2 * k - 0.5, 8.0, 5.0});
    for (int k = 0; k < 8; ++k) pts.push_back({3.2, 2.0 + 0.2 * k, 1.0});
    for (int k = 0; k < 8; ++k) pts.push_back({0.1 * k, -3.0, 1.0});

    if (const auto& s = headway[i]) {
      // Sparse in-lane blob closer than the target, below the cluster size.
      pts.push_back({0.0, 0.5 * *s, 1.0});
      pts.push_back({0.1, 0.5 * *s, 1.2});
      const double half = 0.5 * scene.target_width;
      for (int k = -6; k <= 6; ++k) {
        const double x = half * k / 6.0;
        for (const double z : {0.6, 1.0, 1.4}) pts.push_back({x, *s + truncated_normal(rng, scene.sigma), z});
      }
      for (double d = 0.3; d <= scene.target_depth; d += 0.3) {
        for (const double x : {-half, half}) pts.push_back({x, *s + d + truncated_normal(rng, scene.sigma), 1.0});
      }
    }
    scans.push_back(std::move(scan));
  }
  return scans;
}

void write_ngsim(std::ostream& out, const std::vector<NgsimVehicle>& vehicles) {
  out << "Vehicle_ID Frame_ID Total_Frames Global_Time Local_X Local_Y Global_X Global_Y v_Length v_Width "
         "v_Class v_Vel v_Acc Lane_ID Preceding Following Space_Headway Time_Headway\n";
  auto find = [&](std::int64_t id) -> const NgsimVehicle* {
    for (const auto& v : vehicles) {
      if (v.id == id) return &v;
    }
    return nullptr;
  };
  auto y_at = [](const NgsimVehicle& v, std::int64_t frame) {
    return v.y0_ft + v.speed_fps * 0.1 * static_cast<double>(frame - v.first_frame);
  };
  for (const auto& v : vehicles) {
    for (std::size_t k = 0; k < v.frames; ++k) {
      const std::int64_t frame = v.first_frame + static_cast<std::int64_t>(k);
      const int lane = v.lane_change_at && k >= *v.lane_change_at ? v.lane + 1 : v.lane;
      const double y = y_at(v, frame);
      double space = 0.0;
      double time = 0.0;
      if (const auto* lead = find(v.preceding)) {
        space = y_at(*lead, frame) - y;
        time = v.speed_fps > 0.0 ? space / v.speed_fps : 0.0;
      }
      out << fmt::format("{} {} {} {} {:.3f} {:.3f} {:.3f} {:.3f} {:.1f} {:.1f} {} {:.2f} {:.2f} {} {} {} {:.2f} {:.2f}\n",
                         v.id, frame, v.frames, 1113433135300 + 100 * frame, 12.0 * lane - 6.0, y,
                         6042000.0, 2133000.0 + y, v.length_ft, 6.0, 2, v.speed_fps, 0.0, lane, v.preceding,
                         0, space, time);
    }
  }
}

}  // namespace trajfill::synth
