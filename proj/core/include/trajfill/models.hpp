#pragma once

// Car-following models: Gipps, IDM, Pipes and Newell.
//
// Each model has two faces. simulate_follower() drives a follower behind a
// known leader; predict_headway() goes the other way and produces the
// leader-follower clearance from the follower's own kinematics, which is what
// gap filling needs when the leader track is missing.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "trajfill/series.hpp"

namespace trajfill {

enum class ModelKind { kGipps, kIdm, kPipes, kNewell };

inline constexpr std::array<ModelKind, 4> kAllModels = {ModelKind::kGipps, ModelKind::kIdm,
                                                        ModelKind::kPipes, ModelKind::kNewell};

std::string_view model_name(ModelKind kind);
std::optional<ModelKind> parse_model(std::string_view name);

struct GippsParams {
  double v0 = 30.0;    // desired speed, m/s
  double a = 2.0;      // max acceleration, m/s^2
  double b = 1.5;      // comfortable deceleration (positive), m/s^2
  double s0 = 2.0;     // minimum spacing, m
  double dt_r = 1.0;   // reaction time used inside the safe speed, s
};

struct IdmParams {
  double v0 = 30.0;
  double T = 1.0;      // time gap, s
  double a = 1.0;
  double b = 1.5;
  double delta = 4.0;
  double s0 = 2.0;
};

// Standstill clearance and leader length are not separable from clearance
// data, so both live in b_clear.
struct PipesParams {
  double b_clear = 2.0;
  double T = 1.0;
};

// Newell translation. d is clearance-based: x_f(t + tau) = x_l(t) - L_l - d.
struct NewellParams {
  double tau = 1.0;
  double d = 5.0;
};

using ModelParams = std::variant<GippsParams, IdmParams, PipesParams, NewellParams>;

ModelKind kind_of(const ModelParams& params);
std::span<const std::string_view> parameter_names(ModelKind kind);
std::vector<double> to_vector(const ModelParams& params);
ModelParams from_vector(ModelKind kind, std::span<const double> values);

// Throws invalid-input when a parameter violates the model's invariants.
void validate(const ModelParams& params);

struct FollowerState {
  double x = 0.0;
  double v = 0.0;
};

// One Gipps update: min(v + a h, v0, v_safe(s, v_leader)), clamped at 0.
// Throws a collision error when s <= 0.
double gipps_safe_speed(const GippsParams& p, double s, double v_leader);
double gipps_step(const GippsParams& p, double v, double s, double v_leader, double h = kSampleInterval);

// IDM acceleration; dv is the approach rate v - v_leader.
double idm_desired_gap(const IdmParams& p, double v, double dv);
double idm_accel(const IdmParams& p, double v, double dv, double s);

// Steps the follower `horizon` times at 0.1 s behind `leader`, starting from
// `init` at the leader's first sample. The returned trajectory has
// horizon + 1 samples. Newell is fully determined by the leader and ignores
// `init`; before t0 + tau the leader is extrapolated backwards at its
// initial speed. Throws a collision error carrying the step index.
Trajectory simulate_follower(const ModelParams& params, const Trajectory& leader,
                             FollowerState init, std::size_t horizon);

enum class LeaderSpeedMode {
  // v_leader taken equal to the follower speed; closed-form per sample.
  kZeroRelative,
  // v_leader recovered each step by inverting the model at the current
  // predicted headway; headway then advances with the leader/follower
  // displacement difference. Applies to Gipps and IDM.
  kKinematic,
};

struct PredictorOptions {
  LeaderSpeedMode leader_speed = LeaderSpeedMode::kKinematic;
  double idm_min_ratio = 1e-3;
};

struct HeadwayAnchor {
  double value = 0.0;
  std::optional<double> previous;  // sample before `value`, seeds the leader speed
};

inline constexpr double kMinPredictedHeadway = 1e-3;

// Closed-form headway from follower kinematics over `range`, before
// anchoring and always with zero relative speed.
std::vector<double> raw_headway(const ModelParams& params, const Trajectory& follower,
                                IndexRange range, const PredictorOptions& options = {});

// Headway over `range`, with the first value equal to anchor.value exactly.
std::vector<double> predict_headway(const ModelParams& params, const Trajectory& follower,
                                    IndexRange range, const HeadwayAnchor& anchor,
                                    const PredictorOptions& options = {});

// Prediction spanning the gap and both edge samples; element 0 is the
// pre-gap edge (equal to the anchor) and the last element is the model's
// value at the post-gap edge.
std::vector<double> predict_headway(const ModelParams& params, const Trajectory& follower,
                                    const GapSpec& gap, const HeadwayAnchor& anchor,
                                    const PredictorOptions& options = {});

}  // namespace trajfill
