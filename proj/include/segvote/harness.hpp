#pragma once

// Monte Carlo experiments over the synthetic models and accuracy sweeps
// over labeled feature corpora.
//
// Every trial (or query) draws from its own generator, seeded by
// derive_seed(master, index), and results are aggregated as integer counts.
// Estimates therefore depend only on the inputs, never on `threads`.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "segvote/classifier.hpp"
#include "segvote/models.hpp"

namespace segvote {

enum class RuleKind {
  euclidean,   // c = 1
  coordinate,  // c = d
  segmented,   // explicit c, 1 < c < d
  balanced,    // c = largest divisor of d not above sqrt(d)
};

struct RuleSpec {
  RuleKind kind = RuleKind::euclidean;
  std::size_t c = 1;  // only read for `segmented`
  std::size_t k = 1;

  static RuleSpec euclidean(std::size_t k = 1) { return {RuleKind::euclidean, 1, k}; }
  static RuleSpec coordinate(std::size_t k = 1) { return {RuleKind::coordinate, 0, k}; }
  static RuleSpec segmented(std::size_t c, std::size_t k = 1) {
    return {RuleKind::segmented, c, k};
  }
  static RuleSpec balanced(std::size_t k = 1) { return {RuleKind::balanced, 0, k}; }

  /// Effective segment count for dimension d. Throws ConfigError when the
  /// rule is inconsistent with d.
  std::size_t resolve_c(std::size_t d) const;
};

const char* rule_name(RuleKind kind);
std::size_t largest_divisor_at_most_sqrt(std::size_t d);

/// Binomial proportion with a 95% Wilson score interval.
struct ProbEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double point_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;

  bool overlaps(const ProbEstimate& other) const {
    return ci_low <= other.ci_high && other.ci_low <= ci_high;
  }
};

inline constexpr double kWilsonZ95 = 1.959963984540054;

ProbEstimate wilson_estimate(std::uint64_t successes, std::uint64_t trials,
                             double z = kWilsonZ95);

/// Integer accumulators summed across workers.
struct Tally {
  std::uint64_t hits = 0;
  std::uint64_t coordinate_ops = 0;

  Tally& operator+=(const Tally& o) {
    hits += o.hits;
    coordinate_ops += o.coordinate_ops;
    return *this;
  }
};

/// Run body(i, tally) for i in [0, n) on `threads` workers and sum the
/// per-worker tallies. The first exception thrown by a body is rethrown.
Tally parallel_tally(std::uint64_t n, unsigned threads,
                     const std::function<void(std::uint64_t, Tally&)>& body);

/// One Monte Carlo trial: fresh instance, fresh dictionaries, classify the
/// query. Returns true on misclassification.
bool misclassification_trial(const ModelSpec& model, const RuleSpec& rule,
                             std::uint64_t trial_seed);

ProbEstimate estimate_misclassification(const ModelSpec& model, const RuleSpec& rule,
                                        std::uint64_t trials, std::uint64_t seed,
                                        unsigned threads = 1);

/// estimate_misclassification plus the configuration that produced it.
struct SimulationResult {
  ModelSpec model;
  RuleSpec rule;
  std::size_t c = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  ProbEstimate estimate;
};

SimulationResult simulate(const ModelSpec& model, const RuleSpec& rule, std::uint64_t trials,
                          std::uint64_t seed, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Rate slope fits

struct RatePoint {
  std::size_t d = 0;
  std::size_t c = 0;
  ProbEstimate estimate;
  bool undersampled = false;  // fewer than min_events misclassifications
  double neg_log_p = 0.0;     // -log of the point estimate (0 if undersampled)
};

struct RateSlopeResult {
  ModelAParams model;
  RuleSpec rule;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t min_events = 10;
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t fitted_points = 0;
  bool fit_ok = false;
  bool undersampled_at_largest_d = false;
  std::optional<double> predicted_rate;
};

/// Asymptotic decay rate of the misclassification probability per
/// coordinate, when one is known: I(0) for euclidean, I(0)/2 for balanced,
/// the coordinate-law rate for coordinate.
std::optional<double> predicted_rate(const ModelAParams& model, const RuleSpec& rule);

/// Estimate P(d) on each grid point and fit -log P(d) = slope * d + b by
/// unweighted least squares. Points with fewer than `min_events`
/// misclassifications are flagged and left out of the fit.
RateSlopeResult rate_slope(const ModelAParams& model, const RuleSpec& rule,
                           std::span<const std::size_t> d_grid, std::uint64_t trials,
                           std::uint64_t seed, unsigned threads = 1,
                           std::uint64_t min_events = 10);

/// start:stop:step, inclusive of stop when reached.
std::vector<std::size_t> parse_grid(const std::string& text);

// ---------------------------------------------------------------------------
// Regime reports

struct RegimeThresholds {
  double chance_band = 0.10;  // |misclassification - (1 - 1/K)| <= band
  double near_zero = 0.05;    // misclassification < near_zero
};

struct RuleEstimate {
  RuleSpec rule;
  std::size_t c = 0;
  ProbEstimate misclassification;
  double correct = 0.0;  // 1 - misclassification point estimate
};

struct RegimeVerdicts {
  bool euclid_near_chance = false;
  bool coord_near_chance = false;
  bool segmented_near_zero = false;

  bool all() const { return euclid_near_chance && coord_near_chance && segmented_near_zero; }
};

struct RegimeReport {
  ModelSpec model;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  RegimeThresholds thresholds;
  int K = 2;
  double chance_misclassification = 0.5;
  RuleEstimate euclidean;
  RuleEstimate coordinate;
  RuleEstimate segmented;  // c = d / l
  RegimeVerdicts verdicts;
  std::vector<std::string> warnings;
};

/// Notes on how far finite parameters sit from the asymptotic conditions.
std::vector<std::string> regime_warnings(const ModelSpec& model);

/// Euclidean, coordinate and c = d/l rules on a model B or C instance.
RegimeReport theorem_regime_report(const ModelSpec& model, std::uint64_t trials,
                                   std::uint64_t seed, unsigned threads = 1,
                                   RegimeThresholds thresholds = {});

// ---------------------------------------------------------------------------
// Dictionary-size sweep

struct SweepCell {
  std::size_t nu = 1;
  RuleSpec rule;
  std::size_t c = 0;
  ProbEstimate estimate;
};

struct NuSweepResult {
  ModelBParams model;
  std::vector<std::size_t> nu_grid;
  std::vector<RuleSpec> rules;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<SweepCell> cells;  // nu-major

  std::vector<ProbEstimate> series(RuleKind kind) const;
};

NuSweepResult dictionary_size_sweep(const ModelBParams& model,
                                    std::span<const std::size_t> nu_grid,
                                    std::span<const RuleSpec> rules, std::uint64_t trials,
                                    std::uint64_t seed, unsigned threads = 1);

/// True when no later estimate exceeds an earlier one by more than their
/// 95% intervals allow.
bool nonincreasing_within_ci(std::span<const ProbEstimate> series);

struct SweepThresholds {
  double chance_band = 0.10;
  double euclid_floor = 0.05;
};

/// Unset when the rule was not part of the sweep.
struct SweepVerdicts {
  std::optional<bool> segmented_nonincreasing;
  std::optional<bool> euclid_between;  // floor < p < 1/2 for every nu >= 2
  std::optional<bool> coord_near_chance;

  bool all() const {
    return segmented_nonincreasing.value_or(true) && euclid_between.value_or(true) &&
           coord_near_chance.value_or(true);
  }
};

SweepVerdicts sweep_verdicts(const NuSweepResult& sweep, SweepThresholds thresholds = {});

// ---------------------------------------------------------------------------
// Accuracy sweeps on feature corpora

struct AccuracyCell {
  std::size_t c = 1;
  std::size_t k = 1;
  double accuracy = 0.0;
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  std::uint64_t coordinate_ops = 0;
};

struct AccuracyRow {
  std::string dataset;
  std::vector<AccuracyCell> cells;
};

struct AccuracyTable {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::vector<std::size_t> c_list;
  std::vector<std::size_t> k_list;
  std::vector<AccuracyRow> rows;
  std::vector<std::string> warnings;

  const AccuracyCell* find(const std::string& dataset, std::size_t c, std::size_t k) const;
};

/// One cell per (c, k). Dictionaries for every c are built from `seed`
/// with n words per class (n = 0 means the smallest class size). A c that
/// does not divide d is skipped with a warning.
AccuracyTable accuracy_sweep(const LabeledDataset& train, const LabeledDataset& test,
                             std::span<const std::size_t> c_list,
                             std::span<const std::size_t> k_list, std::size_t n,
                             std::uint64_t seed, unsigned threads = 1,
                             const std::string& dataset_id = "dataset");

/// Labeled train/test corpora drawn from one model realization: the first
/// `train_per_class` words of every class go to train, the rest to test.
std::pair<LabeledDataset, LabeledDataset> model_corpus(const ModelSpec& model,
                                                       std::size_t train_per_class,
                                                       std::size_t test_per_class);

}  // namespace segvote
