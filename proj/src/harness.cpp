#include "segvote/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "segvote/error.hpp"
#include "segvote/rate.hpp"

namespace segvote {

std::size_t largest_divisor_at_most_sqrt(std::size_t d) {
  std::size_t best = 1;
  for (std::size_t c = 1; c * c <= d; ++c) {
    if (d % c == 0) best = c;
  }
  return best;
}

const char* rule_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::euclidean:
      return "euclidean";
    case RuleKind::coordinate:
      return "coordinate";
    case RuleKind::segmented:
      return "segmented";
    case RuleKind::balanced:
      return "balanced";
  }
  return "?";
}

std::size_t RuleSpec::resolve_c(std::size_t d) const {
  if (d == 0) throw ConfigError("dimension must be >= 1");
  if (k == 0) throw ConfigError("neighbor count k must be >= 1");
  switch (kind) {
    case RuleKind::euclidean:
      return 1;
    case RuleKind::coordinate:
      return d;
    case RuleKind::segmented:
      if (!(c > 1 && c < d && d % c == 0)) {
        throw ConfigError("segmented rule needs 1 < c < d with c | d; got c=" +
                          std::to_string(c) + ", d=" + std::to_string(d));
      }
      return c;
    case RuleKind::balanced: {
      const std::size_t b = largest_divisor_at_most_sqrt(d);
      if (!(b > 1 && b < d)) {
        throw ConfigError("d=" + std::to_string(d) + " has no divisor in (1, sqrt(d)]");
      }
      return b;
    }
  }
  throw ConfigError("unknown rule");
}

ProbEstimate wilson_estimate(std::uint64_t successes, std::uint64_t trials, double z) {
  if (successes > trials) throw ParamError("successes exceed trials");
  ProbEstimate e;
  e.successes = successes;
  e.trials = trials;
  if (trials == 0) return e;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  e.point_estimate = p;
  e.ci_low = std::clamp(center - half, 0.0, p);
  e.ci_high = std::clamp(center + half, p, 1.0);
  return e;
}

Tally parallel_tally(std::uint64_t n, unsigned threads,
                     const std::function<void(std::uint64_t, Tally&)>& body) {
  Tally total;
  if (threads <= 1 || n <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) body(i, total);
    return total;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, n));
  const std::uint64_t chunk = std::max<std::uint64_t>(1, n / (std::uint64_t{workers} * 16));
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<Tally> partial(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::uint64_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            const std::uint64_t end = std::min(n, begin + chunk);
            for (std::uint64_t i = begin; i < end; ++i) body(i, partial[w]);
          }
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          failed = true;
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  for (const auto& t : partial) total += t;
  return total;
}

// Per-trial streams: 0 = instance, 1 = dictionary sampling, 2 = tie-breaks.
bool misclassification_trial(const ModelSpec& model, const RuleSpec& rule,
                             std::uint64_t trial_seed) {
  const auto inst = generate(with_seed(model, derive_seed(trial_seed, 0)));
  const std::size_t d = model_dimension(model);
  const auto cfg = SegmentationConfig::make(d, rule.resolve_c(d));
  const auto dicts =
      build_dictionaries(inst.train, cfg, model_dictionary_size(model), derive_seed(trial_seed, 1));
  Rng rng(derive_seed(trial_seed, 2));
  return classify(inst.query, dicts, rule.k, rng).decided_class != inst.true_class;
}

ProbEstimate estimate_misclassification(const ModelSpec& model, const RuleSpec& rule,
                                        std::uint64_t trials, std::uint64_t seed,
                                        unsigned threads) {
  if (trials == 0) throw ConfigError("trials must be >= 1");
  const std::size_t d = model_dimension(model);
  rule.resolve_c(d);
  std::visit([](const auto& p) { validate(p); }, model);
  const std::size_t dict_entries =
      model_dictionary_size(model) * static_cast<std::size_t>(model_classes(model));
  if (rule.k > dict_entries) {
    throw ConfigError("k=" + std::to_string(rule.k) + " exceeds the " +
                      std::to_string(dict_entries) + " entries of each dictionary");
  }
  const Tally t = parallel_tally(trials, threads, [&](std::uint64_t i, Tally& acc) {
    if (misclassification_trial(model, rule, derive_seed(seed, i))) ++acc.hits;
  });
  return wilson_estimate(t.hits, trials);
}

SimulationResult simulate(const ModelSpec& model, const RuleSpec& rule, std::uint64_t trials,
                          std::uint64_t seed, unsigned threads) {
  SimulationResult r;
  r.model = model;
  r.rule = rule;
  r.c = rule.resolve_c(model_dimension(model));
  r.trials = trials;
  r.seed = seed;
  r.estimate = estimate_misclassification(model, rule, trials, seed, threads);
  return r;
}

// ---------------------------------------------------------------------------

std::optional<double> predicted_rate(const ModelAParams& model, const RuleSpec& rule) {
  if (model.identical_classes) return std::nullopt;
  switch (rule.kind) {
    case RuleKind::euclidean:
      return rate_zero(model_a_segment_vote_dist(model.rho)).value;
    case RuleKind::balanced:
      return rate_zero(model_a_segment_vote_dist(model.rho)).value / 2.0;
    case RuleKind::coordinate:
      return rate_zero(model_a_coordinate_dist(model.rho)).value;
    case RuleKind::segmented:
      return std::nullopt;
  }
  return std::nullopt;
}

RateSlopeResult rate_slope(const ModelAParams& model, const RuleSpec& rule,
                           std::span<const std::size_t> d_grid, std::uint64_t trials,
                           std::uint64_t seed, unsigned threads, std::uint64_t min_events) {
  if (d_grid.empty()) throw ConfigError("d grid is empty");
  for (std::size_t d : d_grid) rule.resolve_c(d);

  RateSlopeResult out;
  out.model = model;
  out.rule = rule;
  out.trials = trials;
  out.seed = seed;
  out.min_events = min_events;
  out.predicted_rate = predicted_rate(model, rule);

  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t d : d_grid) {
    ModelAParams at = model;
    at.d = d;
    RatePoint pt;
    pt.d = d;
    pt.c = rule.resolve_c(d);
    pt.estimate = estimate_misclassification(at, rule, trials, derive_seed(seed, d), threads);
    pt.undersampled = pt.estimate.successes == 0 || pt.estimate.successes < min_events;
    if (!pt.undersampled) {
      pt.neg_log_p = -std::log(pt.estimate.point_estimate);
      xs.push_back(static_cast<double>(d));
      ys.push_back(pt.neg_log_p);
    }
    out.points.push_back(pt);
  }

  const auto largest = std::max_element(out.points.begin(), out.points.end(),
                                        [](const auto& a, const auto& b) { return a.d < b.d; });
  out.undersampled_at_largest_d = largest->undersampled;
  out.fitted_points = xs.size();
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx > 0.0) {
      out.slope = sxy / sxx;
      out.intercept = my - out.slope * mx;
      out.fit_ok = true;
    }
  }
  return out;
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v < 0) throw std::invalid_argument(item);
      parts.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("bad grid component '" + item + "' in '" + text + "'");
    }
  }
  if (parts.size() != 3) throw ConfigError("grid must be start:stop:step, got '" + text + "'");
  const auto [start, stop, step] = std::tuple{parts[0], parts[1], parts[2]};
  if (step == 0 || start == 0 || stop < start) {
    throw ConfigError("grid needs 0 < start <= stop and step > 0, got '" + text + "'");
  }
  std::vector<std::size_t> grid;
  for (std::size_t d = start; d <= stop; d += step) grid.push_back(d);
  return grid;
}

// ---------------------------------------------------------------------------

namespace {

struct SpikeShape {
  std::size_t d;
  std::size_t l;
  double p;
  double amp;  // N for model B, the floor a for model C
  int K;
};

SpikeShape spike_shape(const ModelSpec& model) {
  if (const auto* b = std::get_if<ModelBParams>(&model)) {
    return {b->d, b->l, b->p, b->amp, b->K};
  }
  if (const auto* c = std::get_if<ModelCParams>(&model)) {
    return {c->d, c->l, c->p, c->a, 2};
  }
  throw ConfigError("regime reports need a model B or model C configuration");
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::string> regime_warnings(const ModelSpec& model) {
  const SpikeShape s = spike_shape(model);
  std::vector<std::string> w;
  const double d = static_cast<double>(s.d);
  const double l = static_cast<double>(s.l);
  if (l > std::pow(d, 0.25)) {
    w.push_back("l=" + fmt_double(l) + " exceeds d^(1/4)=" + fmt_double(std::pow(d, 0.25)));
  }
  if (s.p * l >= 0.5) {
    w.push_back("p*l=" + fmt_double(s.p * l) + " is not small compared to 1");
  }
  if (s.p * d < 10.0) {
    w.push_back("p*d=" + fmt_double(s.p * d) + " is not large compared to 1");
  }
  if (s.p * s.amp * s.amp * l < 10.0) {
    w.push_back("p*amp^2*l=" + fmt_double(s.p * s.amp * s.amp * l) +
                " is not large compared to 1");
  }
  if (s.K > 2) {
    const bool sqrt_form = std::sqrt(s.amp) > l;
    const bool p_form = s.p * s.amp * s.amp * l >= 10.0;
    if (sqrt_form != p_form) {
      w.push_back(std::string("multi-class euclidean condition sqrt(amp) > l is ") +
                  (sqrt_form ? "met" : "not met") +
                  " while the two-class condition p >> 1/(amp^2 l) is " +
                  (p_form ? "met" : "not met"));
    }
  }
  return w;
}

RegimeReport theorem_regime_report(const ModelSpec& model, std::uint64_t trials,
                                   std::uint64_t seed, unsigned threads,
                                   RegimeThresholds thresholds) {
  const SpikeShape s = spike_shape(model);
  RegimeReport r;
  r.model = model;
  r.trials = trials;
  r.seed = seed;
  r.thresholds = thresholds;
  r.K = s.K;
  r.chance_misclassification = 1.0 - 1.0 / static_cast<double>(s.K);
  r.warnings = regime_warnings(model);

  auto run = [&](const RuleSpec& rule) {
    RuleEstimate e;
    e.rule = rule;
    e.c = rule.resolve_c(s.d);
    e.misclassification = estimate_misclassification(model, rule, trials, seed, threads);
    e.correct = 1.0 - e.misclassification.point_estimate;
    return e;
  };
  r.euclidean = run(RuleSpec::euclidean());
  r.coordinate = run(RuleSpec::coordinate());
  r.segmented = run(RuleSpec::segmented(s.d / s.l));

  auto near_chance = [&](const RuleEstimate& e) {
    return std::abs(e.misclassification.point_estimate - r.chance_misclassification) <=
           thresholds.chance_band;
  };
  r.verdicts.euclid_near_chance = near_chance(r.euclidean);
  r.verdicts.coord_near_chance = near_chance(r.coordinate);
  r.verdicts.segmented_near_zero =
      r.segmented.misclassification.point_estimate < thresholds.near_zero;
  return r;
}

// ---------------------------------------------------------------------------

std::vector<ProbEstimate> NuSweepResult::series(RuleKind kind) const {
  std::vector<ProbEstimate> out;
  for (const auto& cell : cells) {
    if (cell.rule.kind == kind) out.push_back(cell.estimate);
  }
  return out;
}

NuSweepResult dictionary_size_sweep(const ModelBParams& model,
                                    std::span<const std::size_t> nu_grid,
                                    std::span<const RuleSpec> rules, std::uint64_t trials,
                                    std::uint64_t seed, unsigned threads) {
  if (nu_grid.empty()) throw ConfigError("nu grid is empty");
  if (rules.empty()) throw ConfigError("no rules to sweep");
  for (std::size_t nu : nu_grid) {
    if (nu == 0 || nu > model.M) {
      throw ParamError("nu=" + std::to_string(nu) + " must lie in [1, M=" +
                       std::to_string(model.M) + "]");
    }
  }
  NuSweepResult out;
  out.model = model;
  out.nu_grid.assign(nu_grid.begin(), nu_grid.end());
  out.rules.assign(rules.begin(), rules.end());
  out.trials = trials;
  out.seed = seed;
  for (std::size_t nu : nu_grid) {
    ModelBParams at = model;
    at.nu = nu;
    for (const auto& rule : rules) {
      SweepCell cell;
      cell.nu = nu;
      cell.rule = rule;
      cell.c = rule.resolve_c(model.d);
      cell.estimate = estimate_misclassification(at, rule, trials, derive_seed(seed, nu), threads);
      out.cells.push_back(cell);
    }
  }
  return out;
}

bool nonincreasing_within_ci(std::span<const ProbEstimate> series) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = i + 1; j < series.size(); ++j) {
      if (series[j].point_estimate > series[i].point_estimate && !series[j].overlaps(series[i])) {
        return false;
      }
    }
  }
  return true;
}

SweepVerdicts sweep_verdicts(const NuSweepResult& sweep, SweepThresholds thresholds) {
  SweepVerdicts v;
  const double chance = 1.0 - 1.0 / static_cast<double>(sweep.model.K);
  std::vector<ProbEstimate> seg;
  for (const auto& cell : sweep.cells) {
    const double p = cell.estimate.point_estimate;
    switch (cell.rule.kind) {
      case RuleKind::segmented:
      case RuleKind::balanced:
        seg.push_back(cell.estimate);
        break;
      case RuleKind::euclidean:
        if (cell.nu >= 2) {
          v.euclid_between =
              v.euclid_between.value_or(true) && p > thresholds.euclid_floor && p < 0.5;
        }
        break;
      case RuleKind::coordinate:
        v.coord_near_chance = v.coord_near_chance.value_or(true) &&
                              std::abs(p - chance) <= thresholds.chance_band;
        break;
    }
  }
  if (!seg.empty()) v.segmented_nonincreasing = nonincreasing_within_ci(seg);
  return v;
}

// ---------------------------------------------------------------------------

const AccuracyCell* AccuracyTable::find(const std::string& dataset, std::size_t c,
                                        std::size_t k) const {
  for (const auto& row : rows) {
    if (row.dataset != dataset) continue;
    for (const auto& cell : row.cells) {
      if (cell.c == c && cell.k == k) return &cell;
    }
  }
  return nullptr;
}

AccuracyTable accuracy_sweep(const LabeledDataset& train, const LabeledDataset& test,
                             std::span<const std::size_t> c_list,
                             std::span<const std::size_t> k_list, std::size_t n,
                             std::uint64_t seed, unsigned threads,
                             const std::string& dataset_id) {
  if (train.empty()) throw ConfigError("training set is empty");
  if (test.dim() != train.dim()) {
    throw ConfigError("train dimension " + std::to_string(train.dim()) +
                      " differs from test dimension " + std::to_string(test.dim()));
  }
  if (test.num_classes() != train.num_classes()) {
    throw ConfigError("train and test label spaces differ");
  }
  const auto counts = train.class_counts();
  if (n == 0) n = *std::min_element(counts.begin(), counts.end());

  AccuracyTable table;
  table.seed = seed;
  table.n = n;
  table.c_list.assign(c_list.begin(), c_list.end());
  table.k_list.assign(k_list.begin(), k_list.end());
  AccuracyRow row;
  row.dataset = dataset_id;

  const std::size_t d = train.dim();
  const std::size_t entries = n * static_cast<std::size_t>(train.num_classes());
  for (std::size_t c : c_list) {
    if (c == 0 || d % c != 0) {
      table.warnings.push_back("skipped c=" + std::to_string(c) + ": does not divide d=" +
                               std::to_string(d));
      continue;
    }
    const auto dicts = build_dictionaries(train, SegmentationConfig::make(d, c), n, seed);
    for (std::size_t k : k_list) {
      if (k == 0 || k > entries) {
        table.warnings.push_back("skipped k=" + std::to_string(k) + ": dictionaries hold " +
                                 std::to_string(entries) + " entries per subspace");
        continue;
      }
      const std::uint64_t cell_seed = derive_seed(derive_seed(seed, c), k);
      const Tally t = parallel_tally(test.size(), threads, [&](std::uint64_t i, Tally& acc) {
        Rng rng(derive_seed(cell_seed, i));
        CostCounter cost;
        const auto out = classify(test.row(i), dicts, k, rng, &cost);
        acc.coordinate_ops += cost.coordinate_ops;
        if (out.decided_class == test.label(i)) ++acc.hits;
      });
      AccuracyCell cell;
      cell.c = c;
      cell.k = k;
      cell.correct = t.hits;
      cell.total = test.size();
      cell.accuracy = test.empty() ? 0.0 : static_cast<double>(t.hits) / test.size();
      cell.coordinate_ops = t.coordinate_ops;
      row.cells.push_back(cell);
    }
  }
  table.rows.push_back(std::move(row));
  return table;
}

std::pair<LabeledDataset, LabeledDataset> model_corpus(const ModelSpec& model,
                                                       std::size_t train_per_class,
                                                       std::size_t test_per_class) {
  if (train_per_class == 0) throw ConfigError("train_per_class must be >= 1");
  ModelSpec sized = model;
  std::visit(
      [&](auto& p) {
        p.M = train_per_class + test_per_class;
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, ModelBParams>) {
          p.nu = std::min(p.nu, p.M);
        }
      },
      sized);
  const auto inst = generate(sized);
  const int K = inst.train.num_classes();
  LabeledDataset train(inst.train.dim(), K);
  LabeledDataset test(inst.train.dim(), K);
  train.reserve(train_per_class * static_cast<std::size_t>(K));
  test.reserve(test_per_class * static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const auto members = inst.train.class_members(k);
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto& dst = i < train_per_class ? train : test;
      dst.push_back(inst.train.row(members[i]), k);
    }
  }
  return {std::move(train), std::move(test)};
}

}  // namespace segvote
