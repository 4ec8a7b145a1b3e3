#include "trajfill/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "trajfill/error.hpp"
#include "trajfill/rng.hpp"

namespace trajfill {

double tricube_weight(double d, double L) {
  if (!(L > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("tri-cube window length must be positive, got {}", L));
  }
  if (d < 0.0) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("tri-cube distance must be >= 0, got {}", d));
  }
  const double u = d / L;
  if (u >= 1.0) return 0.0;
  const double inner = 1.0 - u * u * u;
  return inner * inner * inner;
}

WeightProfile make_weight_profile(std::size_t samples, double h, double window_s) {
  WeightProfile profile;
  profile.weights.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    profile.weights.push_back(tricube_weight(static_cast<double>(k) * h, window_s));
  }
  return profile;
}

double weighted_abs_error(std::span<const double> predicted, std::span<const double> observed,
                          std::span<const double> weights) {
  if (predicted.size() != observed.size() || predicted.size() != weights.size()) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("cost inputs differ in length ({}, {}, {})", predicted.size(), observed.size(),
                            weights.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    total += weights[i] * std::abs(predicted[i] - observed[i]);
  }
  return total;
}

double context_cost(const ModelParams& params, const VehiclePair& pair, const GapSpec& gap,
                    const WeightProfile& profile, const PredictorOptions& options) {
  if (!gap.before_window || !gap.after_window) {
    throw Error(ErrorKind::kInvalidInput, "gap has no context windows", gap.first_missing);
  }
  const auto& s = pair.headway();
  const IndexRange before = *gap.before_window;
  const IndexRange after = *gap.after_window;
  if (before.size() != profile.weights.size() || after.size() != profile.weights.size()) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("weight profile has {} samples, windows have {} and {}", profile.weights.size(),
                            before.size(), after.size()));
  }
  const std::size_t n = profile.weights.size();
  std::vector<double> observed(n);
  std::vector<double> weights(n);

  auto anchor_at = [&](std::size_t i) {
    HeadwayAnchor anchor{s.at(i), std::nullopt};
    if (i > 0 && s.present(i - 1)) anchor.previous = *s[i - 1];
    return anchor;
  };

  double total = 0.0;
  {
    const auto predicted = predict_headway(params, pair.follower(), before, anchor_at(before.first), options);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = before.first + k;
      observed[k] = s.at(i);
      weights[k] = profile.weights[gap.first_missing - 1 - i];
    }
    total += weighted_abs_error(predicted, observed, weights);
  }
  {
    const auto predicted = predict_headway(params, pair.follower(), after, anchor_at(after.first), options);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = after.first + k;
      observed[k] = s.at(i);
      weights[k] = profile.weights[i - gap.last_missing - 1];
    }
    total += weighted_abs_error(predicted, observed, weights);
  }
  return total;
}

BoundsTable BoundsTable::defaults() {
  BoundsTable t;
  t[ModelKind::kGipps] = {{5.0, 40.0}, {0.3, 4.0}, {0.5, 5.0}, {0.5, 10.0}, {0.3, 2.5}};
  t[ModelKind::kIdm] = {{5.0, 40.0}, {0.3, 3.0}, {0.3, 4.0}, {0.5, 5.0}, {1.0, 6.0}, {0.5, 10.0}};
  t[ModelKind::kPipes] = {{0.5, 15.0}, {0.3, 3.0}};
  t[ModelKind::kNewell] = {{0.3, 3.0}, {0.5, 15.0}};
  return t;
}

void BoundsTable::validate() const {
  for (const auto kind : kAllModels) {
    const auto& bounds = (*this)[kind];
    const auto names = parameter_names(kind);
    if (bounds.size() != names.size()) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("{} needs {} bounds, got {}", model_name(kind), names.size(), bounds.size()));
    }
    std::vector<double> lo;
    std::vector<double> hi;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      const auto& b = bounds[i];
      if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
        throw Error(ErrorKind::kInvalidInput,
                    fmt::format("{}.{} bounds [{}, {}] need finite low < high", model_name(kind), names[i],
                                b.lo, b.hi));
      }
      lo.push_back(b.lo);
      hi.push_back(b.hi);
    }
    trajfill::validate(from_vector(kind, lo));
    trajfill::validate(from_vector(kind, hi));
  }
}

void GaConfig::validate() const {
  if (population < 2) throw Error(ErrorKind::kInvalidInput, "GA population must be >= 2");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0) || !(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "GA rates must lie in [0, 1]");
  }
  if (elitism > population) throw Error(ErrorKind::kInvalidInput, "GA elitism exceeds population");
}

namespace {

struct Individual {
  std::vector<double> genes;
  double cost = std::numeric_limits<double>::infinity();

  bool ok() const { return std::isfinite(cost); }
  double fitness() const { return ok() ? 1.0 / (1.0 + cost) : 0.0; }
};

std::size_t roulette(const std::vector<Individual>& pop, double total_fitness, Rng& rng) {
  if (!(total_fitness > 0.0)) return rng.index(pop.size());
  const double target = rng.uniform() * total_fitness;
  double acc = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    acc += pop[i].fitness();
    if (target < acc) return i;
  }
  // Rounding left target at the top of the wheel.
  for (std::size_t i = pop.size(); i-- > 0;) {
    if (pop[i].ok()) return i;
  }
  return pop.size() - 1;
}

}  // namespace

GaResult minimize_ga(const CostFunction& cost, std::span<const ParamBound> bounds, const GaConfig& cfg) {
  cfg.validate();
  if (bounds.empty()) throw Error(ErrorKind::kInvalidInput, "GA needs at least one parameter");
  for (const auto& b : bounds) {
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
      throw Error(ErrorKind::kInvalidInput, "GA bounds need finite low < high");
    }
  }
  const std::size_t dims = bounds.size();
  Rng rng(cfg.seed);
  GaResult result;
  Individual best;

  auto evaluate = [&](Individual& ind) {
    ++result.evaluations;
    double c = std::numeric_limits<double>::infinity();
    try {
      c = cost(ind.genes);
    } catch (const std::exception&) {
      c = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(c) || c < 0.0) {
      ++result.failed_evaluations;
      c = std::numeric_limits<double>::infinity();
    }
    ind.cost = c;
    if (ind.ok() && (!best.ok() || c < best.cost)) best = ind;
  };

  std::vector<Individual> pop(cfg.population);
  for (auto& ind : pop) {
    ind.genes.resize(dims);
    for (std::size_t j = 0; j < dims; ++j) ind.genes[j] = rng.uniform(bounds[j].lo, bounds[j].hi);
  }
  for (auto& ind : pop) evaluate(ind);
  result.best_cost_history.push_back(best.cost);

  std::vector<std::size_t> order(cfg.population);
  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pop[a].cost < pop[b].cost; });

    std::vector<Individual> next;
    next.reserve(cfg.population);
    for (std::size_t e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);

    const double total_fitness = std::accumulate(pop.begin(), pop.end(), 0.0,
                                                 [](double acc, const Individual& i) { return acc + i.fitness(); });
    while (next.size() < cfg.population) {
      const auto& p1 = pop[roulette(pop, total_fitness, rng)];
      const auto& p2 = pop[roulette(pop, total_fitness, rng)];
      Individual c1{p1.genes};
      Individual c2{p2.genes};
      if (rng.uniform() < cfg.crossover_rate) {
        for (std::size_t j = 0; j < dims; ++j) {
          const double lambda = rng.uniform();
          c1.genes[j] = lambda * p1.genes[j] + (1.0 - lambda) * p2.genes[j];
          c2.genes[j] = (1.0 - lambda) * p1.genes[j] + lambda * p2.genes[j];
        }
      }
      for (auto* child : {&c1, &c2}) {
        for (std::size_t j = 0; j < dims; ++j) {
          if (rng.uniform() < cfg.mutation_rate) {
            const double sigma = 0.1 * (bounds[j].hi - bounds[j].lo);
            child->genes[j] = std::clamp(child->genes[j] + rng.normal(0.0, sigma), bounds[j].lo, bounds[j].hi);
          }
        }
      }
      next.push_back(std::move(c1));
      if (next.size() < cfg.population) next.push_back(std::move(c2));
    }
    for (auto& ind : next) evaluate(ind);
    pop = std::move(next);
    result.best_cost_history.push_back(best.cost);
  }

  if (!best.ok()) {
    throw Error(ErrorKind::kCalibrationFailed,
                fmt::format("all {} cost evaluations failed", result.evaluations));
  }
  result.best = best.genes;
  result.best_cost = best.cost;
  return result;
}

CalibrationResult ga_calibrate(ModelKind model, const VehiclePair& pair, const GapSpec& gap,
                               std::span<const ParamBound> bounds, const GaConfig& cfg, double window_s,
                               const PredictorOptions& options) {
  if (!gap.reconstructable) {
    throw Error(ErrorKind::kInvalidInput, "gap has no valid context windows", gap.first_missing);
  }
  if (bounds.size() != parameter_names(model).size()) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("{} needs {} bounds, got {}", model_name(model), parameter_names(model).size(),
                            bounds.size()));
  }
  const WeightProfile profile = make_weight_profile(gap.before_window->size(), pair.headway().h(), window_s);
  const CostFunction cost = [&](std::span<const double> genes) {
    const ModelParams params = from_vector(model, genes);
    trajfill::validate(params);
    return context_cost(params, pair, gap, profile, options);
  };
  GaResult ga;
  try {
    ga = minimize_ga(cost, bounds, cfg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kCalibrationFailed) throw;
    throw Error(ErrorKind::kCalibrationFailed,
                fmt::format("{} calibration failed: {}", model_name(model), e.what()), gap.first_missing);
  }
  CalibrationResult out;
  out.model = model;
  out.params = from_vector(model, ga.best);
  out.cost = ga.best_cost;
  out.evaluations = ga.evaluations;
  out.seed = cfg.seed;
  out.best_cost_history = std::move(ga.best_cost_history);
  return out;
}

}  // namespace trajfill
