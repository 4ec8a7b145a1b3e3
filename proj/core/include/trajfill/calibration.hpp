#pragma once

// Per-gap calibration: tri-cube weights on the context windows, the
// weighted absolute headway error, and a real-coded genetic algorithm.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "trajfill/models.hpp"
#include "trajfill/series.hpp"

namespace trajfill {

// (1 - (d/L)^3)^3 for d < L, else 0. Throws invalid-input for L <= 0.
double tricube_weight(double d, double L);

// Weights for `samples` context samples ordered by distance from the gap
// edge: sample k sits at d = k * h.
struct WeightProfile {
  std::vector<double> weights;
};
WeightProfile make_weight_profile(std::size_t samples, double h, double window_s);

// sum_i w_i |predicted_i - observed_i|
double weighted_abs_error(std::span<const double> predicted, std::span<const double> observed,
                          std::span<const double> weights);

// Cost of `params` on the gap's two context windows. The before-window is
// predicted forward from its first sample, the after-window from the first
// post-gap sample; both use the profile ordered from the gap edge outward.
double context_cost(const ModelParams& params, const VehiclePair& pair, const GapSpec& gap,
                    const WeightProfile& profile, const PredictorOptions& options = {});

struct ParamBound {
  double lo = 0.0;
  double hi = 0.0;
};

using ModelBounds = std::vector<ParamBound>;

// Calibration bounds for all four models, indexed by ModelKind.
struct BoundsTable {
  std::array<ModelBounds, 4> by_model;

  static BoundsTable defaults();
  const ModelBounds& operator[](ModelKind kind) const { return by_model[static_cast<std::size_t>(kind)]; }
  ModelBounds& operator[](ModelKind kind) { return by_model[static_cast<std::size_t>(kind)]; }

  // Bounds finite, lo < hi, and both corners satisfy the model invariants.
  void validate() const;
};

struct GaConfig {
  std::size_t population = 20;
  std::size_t generations = 50;
  double crossover_rate = 0.7;
  double mutation_rate = 0.1;
  std::uint64_t seed = 0;
  std::size_t elitism = 1;

  void validate() const;
};

// Returns a cost >= 0. Throwing or returning a non-finite value marks the
// individual as failed (zero fitness).
using CostFunction = std::function<double(std::span<const double>)>;

struct GaResult {
  std::vector<double> best;
  double best_cost = 0.0;
  std::size_t evaluations = 0;
  std::size_t failed_evaluations = 0;
  // Best-ever cost after the initial population and after each generation.
  std::vector<double> best_cost_history;
};

// Roulette-wheel GA on fitness 1 / (1 + C), blend crossover, Gaussian
// mutation (sigma = 10% of the bound range) clipped to bounds, elitism.
// Evaluates population * (generations + 1) individuals. Deterministic in
// cfg.seed. Throws calibration-failed when no evaluation succeeds.
GaResult minimize_ga(const CostFunction& cost, std::span<const ParamBound> bounds, const GaConfig& cfg);

struct CalibrationResult {
  ModelKind model = ModelKind::kGipps;
  ModelParams params;
  double cost = 0.0;
  std::size_t evaluations = 0;
  std::uint64_t seed = 0;
  std::vector<double> best_cost_history;
};

CalibrationResult ga_calibrate(ModelKind model, const VehiclePair& pair, const GapSpec& gap,
                               std::span<const ParamBound> bounds, const GaConfig& cfg,
                               double window_s = kDefaultContextSeconds,
                               const PredictorOptions& options = {});

}  // namespace trajfill
