#include "trajfill/models.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "trajfill/error.hpp"

namespace trajfill {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::array<std::string_view, 5> kGippsNames = {"v0", "a", "b", "s0", "dt_r"};
constexpr std::array<std::string_view, 6> kIdmNames = {"v0", "T", "a", "b", "delta", "s0"};
constexpr std::array<std::string_view, 2> kPipesNames = {"b_clear", "T"};
constexpr std::array<std::string_view, 2> kNewellNames = {"tau", "d"};

// Resolved follower kinematics as plain arrays; missing samples stay empty.
class FollowerView {
 public:
  explicit FollowerView(const Trajectory& follower) {
    const Trajectory* source = &follower;
    Trajectory estimated;
    if (!follower.has_speed()) {
      estimated = estimate_speed(follower);
      source = &estimated;
    }
    const auto& pts = source->points();
    x_.reserve(pts.size());
    v_.reserve(pts.size());
    for (const auto& p : pts) {
      x_.push_back(p.x);
      v_.push_back(p.v);
    }
  }

  std::size_t size() const { return x_.size(); }

  double x(std::size_t i) const {
    if (i >= x_.size() || !x_[i]) missing("position", i);
    return *x_[i];
  }
  double v(std::size_t i) const {
    if (i >= v_.size() || !v_[i]) missing("speed", i);
    return *v_[i];
  }
  bool has_v(std::size_t i) const { return i < v_.size() && v_[i].has_value(); }

  // Position at fractional sample index, extrapolating past the last sample
  // at the last known speed.
  double x_at(double index) const {
    const double last = static_cast<double>(size() - 1);
    if (index >= last) {
      const std::size_t k = size() - 1;
      return x(k) + v(k) * (index - last) * kSampleInterval;
    }
    const auto k = static_cast<std::size_t>(std::floor(index));
    const double frac = index - static_cast<double>(k);
    if (frac == 0.0) return x(k);
    return x(k) + (x(k + 1) - x(k)) * frac;
  }

 private:
  [[noreturn]] static void missing(const char* what, std::size_t i) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("follower {} missing at sample {}", what, i), i);
  }

  std::vector<std::optional<double>> x_;
  std::vector<std::optional<double>> v_;
};

void check_range(const FollowerView& view, IndexRange range) {
  if (range.last < range.first || range.last >= view.size()) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("range [{}, {}] outside follower of {} samples", range.first, range.last,
                            view.size()));
  }
}

// Speed one step ahead, or the current speed at the end of the data.
double next_speed(const FollowerView& f, std::size_t n) {
  return f.has_v(n + 1) ? f.v(n + 1) : f.v(n);
}

double forward_accel(const FollowerView& f, std::size_t n) {
  if (f.has_v(n + 1)) return (f.v(n + 1) - f.v(n)) / kSampleInterval;
  if (n > 0 && f.has_v(n - 1)) return (f.v(n) - f.v(n - 1)) / kSampleInterval;
  return 0.0;
}

bool gipps_binding(const GippsParams& p, double v, double v_next) {
  return v_next < std::min(v + p.a * kSampleInterval, p.v0) - 1e-12;
}

// Gipps safe-speed term solved for s given the observed next speed.
double gipps_inverse_spacing(const GippsParams& p, double v_next, double v_leader) {
  const double bt = p.b * p.dt_r;
  const double lhs = (v_next + bt) * (v_next + bt);
  return p.s0 + (lhs - bt * bt - v_leader * v_leader) / (2.0 * p.b);
}

std::optional<double> gipps_leader_speed(const GippsParams& p, const FollowerView& f, std::size_t n,
                                         double s) {
  if (!f.has_v(n + 1)) return std::nullopt;
  const double v = f.v(n);
  const double v_next = f.v(n + 1);
  if (!gipps_binding(p, v, v_next)) return std::nullopt;
  const double bt = p.b * p.dt_r;
  const double sq = (v_next + bt) * (v_next + bt) - bt * bt - 2.0 * p.b * (s - p.s0);
  return std::sqrt(std::max(0.0, sq));
}

double idm_ratio(const IdmParams& p, double v, double accel) {
  return 1.0 - std::pow(v / p.v0, p.delta) - accel / p.a;
}

std::optional<double> idm_leader_speed(const IdmParams& p, const FollowerView& f, std::size_t n,
                                       double s, double min_ratio) {
  constexpr double kMinSpeed = 0.5;
  constexpr double kMaxRelative = 10.0;
  const double v = f.v(n);
  if (v < kMinSpeed) return std::nullopt;
  const double r = idm_ratio(p, v, forward_accel(f, n));
  if (r <= min_ratio) return std::nullopt;
  const double dynamic = s * std::sqrt(r) - p.s0;
  if (dynamic <= 0.0) return std::nullopt;
  double dv = 2.0 * std::sqrt(p.a * p.b) * (dynamic - v * p.T) / v;
  dv = std::clamp(dv, -kMaxRelative, kMaxRelative);
  return std::max(0.0, v - dv);
}

std::vector<double> gipps_raw(const GippsParams& p, const FollowerView& f, IndexRange range) {
  std::vector<double> out;
  out.reserve(range.size());
  for (std::size_t n = range.first; n <= range.last; ++n) {
    const double v = f.v(n);
    const double v_next = next_speed(f, n);
    if (gipps_binding(p, v, v_next)) {
      out.push_back(gipps_inverse_spacing(p, v_next, v));
    } else if (!out.empty()) {
      out.push_back(out.back());
    } else {
      out.push_back(p.s0 + v * p.dt_r);
    }
  }
  return out;
}

std::vector<double> idm_raw(const IdmParams& p, const FollowerView& f, IndexRange range,
                            double min_ratio) {
  std::vector<double> out;
  out.reserve(range.size());
  for (std::size_t n = range.first; n <= range.last; ++n) {
    const double v = f.v(n);
    const double r = std::max(min_ratio, idm_ratio(p, v, forward_accel(f, n)));
    out.push_back(idm_desired_gap(p, v, 0.0) / std::sqrt(r));
  }
  return out;
}

std::vector<double> pipes_raw(const PipesParams& p, const FollowerView& f, IndexRange range) {
  std::vector<double> out;
  out.reserve(range.size());
  for (std::size_t n = range.first; n <= range.last; ++n) out.push_back(p.b_clear + p.T * f.v(n));
  return out;
}

std::vector<double> newell_raw(const NewellParams& p, const FollowerView& f, IndexRange range) {
  std::vector<double> out;
  out.reserve(range.size());
  const double shift = p.tau / kSampleInterval;
  for (std::size_t n = range.first; n <= range.last; ++n) {
    const double ahead = f.x_at(static_cast<double>(n) + shift);
    out.push_back(ahead - f.x(n) + p.d);
  }
  return out;
}

template <class LeaderSpeedFn>
std::vector<double> kinematic_predict(const FollowerView& f, IndexRange range, const HeadwayAnchor& anchor,
                                      LeaderSpeedFn leader_speed) {
  const double h = kSampleInterval;
  std::vector<double> out;
  out.reserve(range.size());
  out.push_back(anchor.value);

  double held = f.v(range.first);
  if (anchor.previous && range.first > 0 && f.has_v(range.first - 1)) {
    held = std::max(0.0, 0.5 * (f.v(range.first) + f.v(range.first - 1)) +
                             (anchor.value - *anchor.previous) / h);
  }
  for (std::size_t n = range.first; n < range.last; ++n) {
    const double s = out.back();
    const double vl = leader_speed(n, s).value_or(held);
    held = vl;
    const double follower_step = f.x(n + 1) - f.x(n);
    const double s_euler = std::max(kMinPredictedHeadway, s + h * vl - follower_step);
    const double vl_next = leader_speed(n + 1, s_euler).value_or(vl);
    const double s_next = s + 0.5 * h * (vl + vl_next) - follower_step;
    out.push_back(std::max(kMinPredictedHeadway, s_next));
  }
  return out;
}

double leader_length(const Trajectory& leader) { return leader.vehicle_length().value_or(0.0); }

std::vector<double> leader_speeds(const Trajectory& leader, std::size_t count) {
  const Trajectory* source = &leader;
  Trajectory estimated;
  bool complete = true;
  for (std::size_t i = 0; i < count; ++i) complete = complete && leader[i].v.has_value();
  if (!complete) {
    estimated = estimate_speed(leader);
    source = &estimated;
  }
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(*source)[i].v) {
      throw Error(ErrorKind::kInvalidInput, fmt::format("leader speed missing at sample {}", i), i);
    }
    v[i] = *(*source)[i].v;
  }
  return v;
}

void check_spacing(double s, std::size_t step) {
  if (!(s > 0.0)) {
    throw Error(ErrorKind::kCollision, fmt::format("collision at step {} (spacing {:.3f} m)", step, s),
                step);
  }
}

Trajectory make_follower(const Trajectory& leader, std::vector<double> x, std::vector<double> v) {
  std::vector<SamplePoint> pts(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    pts[i] = {leader[i].t, x[i], v[i]};
  }
  return Trajectory(std::move(pts), std::nullopt, "follower");
}

}  // namespace

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGipps: return "gipps";
    case ModelKind::kIdm: return "idm";
    case ModelKind::kPipes: return "pipes";
    case ModelKind::kNewell: return "newell";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model(std::string_view name) {
  for (const auto kind : kAllModels) {
    if (model_name(kind) == name) return kind;
  }
  return std::nullopt;
}

ModelKind kind_of(const ModelParams& params) {
  return static_cast<ModelKind>(params.index());
}

std::span<const std::string_view> parameter_names(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGipps: return kGippsNames;
    case ModelKind::kIdm: return kIdmNames;
    case ModelKind::kPipes: return kPipesNames;
    case ModelKind::kNewell: return kNewellNames;
  }
  return {};
}

std::vector<double> to_vector(const ModelParams& params) {
  return std::visit(Overloaded{
                        [](const GippsParams& p) { return std::vector<double>{p.v0, p.a, p.b, p.s0, p.dt_r}; },
                        [](const IdmParams& p) {
                          return std::vector<double>{p.v0, p.T, p.a, p.b, p.delta, p.s0};
                        },
                        [](const PipesParams& p) { return std::vector<double>{p.b_clear, p.T}; },
                        [](const NewellParams& p) { return std::vector<double>{p.tau, p.d}; },
                    },
                    params);
}

ModelParams from_vector(ModelKind kind, std::span<const double> v) {
  const std::size_t expected = parameter_names(kind).size();
  if (v.size() != expected) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("{} takes {} parameters, got {}", model_name(kind),
                                                      expected, v.size()));
  }
  switch (kind) {
    case ModelKind::kGipps: return GippsParams{v[0], v[1], v[2], v[3], v[4]};
    case ModelKind::kIdm: return IdmParams{v[0], v[1], v[2], v[3], v[4], v[5]};
    case ModelKind::kPipes: return PipesParams{v[0], v[1]};
    case ModelKind::kNewell: return NewellParams{v[0], v[1]};
  }
  throw Error(ErrorKind::kInvalidInput, "unknown model");
}

void validate(const ModelParams& params) {
  const ModelKind kind = kind_of(params);
  const auto values = to_vector(params);
  const auto names = parameter_names(kind);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("{}.{} must be positive, got {}", model_name(kind), names[i], values[i]));
    }
  }
  if (const auto* g = std::get_if<GippsParams>(&params)) {
    if (g->v0 > 60.0) throw Error(ErrorKind::kInvalidInput, "gipps.v0 must not exceed 60 m/s");
    if (g->dt_r < 0.3 || g->dt_r > 3.0) {
      throw Error(ErrorKind::kInvalidInput, "gipps.dt_r must lie in [0.3, 3.0] s");
    }
  }
  if (const auto* m = std::get_if<IdmParams>(&params)) {
    if (m->delta < 1.0 || m->delta > 10.0) {
      throw Error(ErrorKind::kInvalidInput, "idm.delta must lie in [1, 10]");
    }
  }
}

double gipps_safe_speed(const GippsParams& p, double s, double v_leader) {
  const double bt = p.b * p.dt_r;
  const double radicand = bt * bt + v_leader * v_leader + 2.0 * p.b * (s - p.s0);
  return -bt + std::sqrt(std::max(0.0, radicand));
}

double gipps_step(const GippsParams& p, double v, double s, double v_leader, double h) {
  if (!(s > 0.0)) {
    throw Error(ErrorKind::kCollision, fmt::format("gipps step with spacing {} m", s));
  }
  const double next = std::min({v + p.a * h, p.v0, gipps_safe_speed(p, s, v_leader)});
  return std::max(0.0, next);
}

double idm_desired_gap(const IdmParams& p, double v, double dv) {
  return p.s0 + std::max(0.0, v * p.T + v * dv / (2.0 * std::sqrt(p.a * p.b)));
}

double idm_accel(const IdmParams& p, double v, double dv, double s) {
  if (!(s > 0.0)) {
    throw Error(ErrorKind::kCollision, fmt::format("idm acceleration with spacing {} m", s));
  }
  const double ratio = idm_desired_gap(p, v, dv) / s;
  return p.a * (1.0 - std::pow(v / p.v0, p.delta) - ratio * ratio);
}

Trajectory simulate_follower(const ModelParams& params, const Trajectory& leader, FollowerState init,
                             std::size_t horizon) {
  const double h = kSampleInterval;
  const std::size_t count = horizon + 1;
  if (leader.size() < count) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("leader has {} samples, horizon needs {}", leader.size(), count));
  }
  std::vector<double> xl(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!leader[i].x) {
      throw Error(ErrorKind::kInvalidInput, fmt::format("leader position missing at sample {}", i), i);
    }
    xl[i] = *leader[i].x;
  }
  if (init.v < 0.0) throw Error(ErrorKind::kInvalidInput, "initial follower speed must be >= 0");
  const double length = leader_length(leader);

  std::vector<double> x(count);
  std::vector<double> v(count);

  if (const auto* newell = std::get_if<NewellParams>(&params)) {
    const double shift = newell->tau / h;
    const double v_first = leader_speeds(leader, 1).front();
    for (std::size_t i = 0; i < count; ++i) {
      const double src = static_cast<double>(i) - shift;
      double lead = 0.0;
      if (src <= 0.0) {
        lead = xl[0] + v_first * src * h;
      } else {
        const auto k = static_cast<std::size_t>(std::floor(src));
        const double frac = src - static_cast<double>(k);
        lead = frac == 0.0 ? xl[k] : xl[k] + (xl[k + 1] - xl[k]) * frac;
      }
      x[i] = lead - length - newell->d;
      check_spacing(xl[i] - x[i] - length, i);
    }
    std::vector<SamplePoint> pts(count);
    for (std::size_t i = 0; i < count; ++i) pts[i] = {leader[i].t, x[i], std::nullopt};
    return estimate_speed(Trajectory(std::move(pts), std::nullopt, "follower"));
  }

  x[0] = init.x;
  v[0] = init.v;
  check_spacing(xl[0] - x[0] - length, 0);

  if (const auto* gipps = std::get_if<GippsParams>(&params)) {
    const auto vl = leader_speeds(leader, count);
    for (std::size_t n = 0; n < horizon; ++n) {
      const double s = xl[n] - x[n] - length;
      v[n + 1] = gipps_step(*gipps, v[n], s, vl[n], h);
      x[n + 1] = x[n] + 0.5 * h * (v[n] + v[n + 1]);
      check_spacing(xl[n + 1] - x[n + 1] - length, n + 1);
    }
  } else if (const auto* idm = std::get_if<IdmParams>(&params)) {
    const auto vl = leader_speeds(leader, count);
    for (std::size_t n = 0; n < horizon; ++n) {
      const double s = xl[n] - x[n] - length;
      const double acc = idm_accel(*idm, v[n], v[n] - vl[n], s);
      v[n + 1] = std::max(0.0, v[n] + h * acc);
      x[n + 1] = x[n] + 0.5 * h * (v[n] + v[n + 1]);
      check_spacing(xl[n + 1] - x[n + 1] - length, n + 1);
    }
  } else if (const auto* pipes = std::get_if<PipesParams>(&params)) {
    // Pipes spacing rule at n + 1 combined with the trapezoidal position update.
    for (std::size_t n = 0; n < horizon; ++n) {
      const double numer = xl[n + 1] - length - pipes->b_clear - x[n] - 0.5 * h * v[n];
      v[n + 1] = std::max(0.0, numer / (pipes->T + 0.5 * h));
      x[n + 1] = x[n] + 0.5 * h * (v[n] + v[n + 1]);
      check_spacing(xl[n + 1] - x[n + 1] - length, n + 1);
    }
  }
  return make_follower(leader, std::move(x), std::move(v));
}

std::vector<double> raw_headway(const ModelParams& params, const Trajectory& follower, IndexRange range,
                                const PredictorOptions& options) {
  const FollowerView f(follower);
  check_range(f, range);
  return std::visit(Overloaded{
                        [&](const GippsParams& p) { return gipps_raw(p, f, range); },
                        [&](const IdmParams& p) { return idm_raw(p, f, range, options.idm_min_ratio); },
                        [&](const PipesParams& p) { return pipes_raw(p, f, range); },
                        [&](const NewellParams& p) { return newell_raw(p, f, range); },
                    },
                    params);
}

std::vector<double> predict_headway(const ModelParams& params, const Trajectory& follower, IndexRange range,
                                    const HeadwayAnchor& anchor, const PredictorOptions& options) {
  if (!(anchor.value > 0.0) || !std::isfinite(anchor.value)) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("anchor headway {} is not positive", anchor.value),
                range.first);
  }
  const FollowerView f(follower);
  check_range(f, range);

  if (options.leader_speed == LeaderSpeedMode::kKinematic) {
    if (const auto* p = std::get_if<GippsParams>(&params)) {
      return kinematic_predict(f, range, anchor,
                               [&](std::size_t n, double s) { return gipps_leader_speed(*p, f, n, s); });
    }
    if (const auto* p = std::get_if<IdmParams>(&params)) {
      return kinematic_predict(f, range, anchor, [&](std::size_t n, double s) {
        return idm_leader_speed(*p, f, n, s, options.idm_min_ratio);
      });
    }
  }

  std::vector<double> raw = std::visit(Overloaded{
                                           [&](const GippsParams& p) { return gipps_raw(p, f, range); },
                                           [&](const IdmParams& p) {
                                             return idm_raw(p, f, range, options.idm_min_ratio);
                                           },
                                           [&](const PipesParams& p) { return pipes_raw(p, f, range); },
                                           [&](const NewellParams& p) { return newell_raw(p, f, range); },
                                       },
                                       params);
  const double offset = anchor.value - raw.front();
  for (auto& s : raw) {
    s = std::max(kMinPredictedHeadway, s + offset);
    if (!std::isfinite(s)) {
      throw Error(ErrorKind::kInvalidInput, "non-finite predicted headway", range.first);
    }
  }
  raw.front() = anchor.value;
  return raw;
}

std::vector<double> predict_headway(const ModelParams& params, const Trajectory& follower,
                                    const GapSpec& gap, const HeadwayAnchor& anchor,
                                    const PredictorOptions& options) {
  if (!gap.has_edges()) {
    throw Error(ErrorKind::kInvalidInput, "gap touches the series boundary", gap.first_missing);
  }
  return predict_headway(params, follower, IndexRange{gap.edge_before(), gap.edge_after()}, anchor,
                         options);
}

}  // namespace trajfill
