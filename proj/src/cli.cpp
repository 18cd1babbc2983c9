#include "segvote/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "segvote/dataset_io.hpp"
#include "segvote/error.hpp"
#include "segvote/harness.hpp"
#include "segvote/results_io.hpp"

namespace segvote {

namespace {

struct ModelFlags {
  std::string model = "b";
  std::size_t d = 10000;
  double rho = 0.1;
  bool identical = false;
  std::size_t l = 10;
  double p = 0.01;
  double amp = 10.0;
  int K = 2;
  std::size_t M = 1;
  std::size_t nu = 1;
  double a = 10.0;
  std::string amp_law = "uniform";
  double amp_ratio = 2.0;
  double amp_excess = 1.0;
};

struct OutputFlags {
  std::string format = "json";
  std::string out;
};

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

void add_model_flags(CLI::App* app, ModelFlags& f, bool choose_model,
                     const std::vector<std::string>& allowed) {
  if (choose_model) {
    app->add_option("--model", f.model, "Synthetic model family")
        ->check(CLI::IsMember(allowed));
  }
  app->add_option("--d", f.d, "Dimension");
  if (std::find(allowed.begin(), allowed.end(), "a") != allowed.end()) {
    app->add_option("--rho", f.rho, "Model A flip probability, in (0, 1/2)");
    app->add_flag("--identical", f.identical, "Model A: both classes share one base vector");
  }
  const bool spikes = std::find(allowed.begin(), allowed.end(), "b") != allowed.end() ||
                      std::find(allowed.begin(), allowed.end(), "c") != allowed.end();
  if (spikes) {
    app->add_option("--l", f.l, "Spike spacing (models B, C)");
    app->add_option("--p", f.p, "Perturbation / support probability (models B, C)");
  }
  if (std::find(allowed.begin(), allowed.end(), "b") != allowed.end()) {
    app->add_option("--amp", f.amp, "Model B perturbation amplitude N");
    app->add_option("--K", f.K, "Model B class count, 2 <= K <= l+1");
    app->add_option("--nu", f.nu, "Model B dictionary segments per class");
  }
  if (std::find(allowed.begin(), allowed.end(), "c") != allowed.end()) {
    app->add_option("--a", f.a, "Model C amplitude floor");
    app->add_option("--amp-law", f.amp_law, "Model C amplitude law")
        ->check(CLI::IsMember({"uniform", "constant", "exp"}));
    app->add_option("--amp-ratio", f.amp_ratio, "Model C uniform law upper bound, as a multiple of a");
    app->add_option("--amp-excess", f.amp_excess,
                    "Model C exponential law mean excess, as a multiple of a");
  }
  app->add_option("--M", f.M, "Words per class");
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--threads", c.threads, "Worker threads (does not change results)")
      ->check(CLI::PositiveNumber);
}

void add_output(CLI::App* app, OutputFlags& o) {
  app->add_option("--format", o.format, "Result format")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--out", o.out, "Write results to this file instead of stdout");
}

ModelSpec build_model(const ModelFlags& f, std::uint64_t seed) {
  if (f.model == "a") {
    return ModelAParams{f.d, f.rho, f.M, seed, f.identical};
  }
  if (f.model == "b") {
    return ModelBParams{f.d, f.l, f.p, f.amp, f.K, f.M, f.nu, seed};
  }
  AmplitudeLaw law;
  if (f.amp_law == "constant") {
    law.kind = AmplitudeLaw::Kind::constant;
  } else if (f.amp_law == "exp") {
    law.kind = AmplitudeLaw::Kind::shifted_exponential;
  }
  law.upper_ratio = f.amp_ratio;
  law.excess_mean = f.amp_excess;
  return ModelCParams{f.d, f.l, f.p, f.a, law, f.M, seed};
}

RuleKind parse_rule(const std::string& s) {
  static const std::map<std::string, RuleKind> names{
      {"euclid", RuleKind::euclidean},   {"euclidean", RuleKind::euclidean},
      {"coord", RuleKind::coordinate},   {"coordinate", RuleKind::coordinate},
      {"seg", RuleKind::segmented},      {"segmented", RuleKind::segmented},
      {"balanced", RuleKind::balanced},  {"sqrt", RuleKind::balanced}};
  const auto it = names.find(s);
  if (it == names.end()) throw ConfigError("unknown rule '" + s + "'");
  return it->second;
}

class Echo {
public:
  Echo(std::ostream& out, const std::string& command) : out_(out) {
    out_ << "# segvote " << command << "\n";
  }
  template <typename T>
  Echo& operator()(const std::string& key, const T& value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    out_ << "# " << key << ": " << os.str() << "\n";
    return *this;
  }
  Echo& list(const std::string& key, const std::vector<std::size_t>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + std::to_string(values[i]);
    return (*this)(key, s);
  }

private:
  std::ostream& out_;
};

void echo_model(Echo& e, const ModelSpec& model) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ModelAParams>) {
          e("model", "a")("d", p.d)("rho", p.rho)("M", p.M)("identical", p.identical_classes);
        } else if constexpr (std::is_same_v<T, ModelBParams>) {
          e("model", "b")("d", p.d)("l", p.l)("p", p.p)("amp", p.amp)("K", p.K)("M", p.M)(
              "nu", p.nu);
        } else {
          const char* law = p.amplitude_law.kind == AmplitudeLaw::Kind::uniform    ? "uniform"
                            : p.amplitude_law.kind == AmplitudeLaw::Kind::constant ? "constant"
                                                                                   : "exp";
          e("model", "c")("d", p.d)("l", p.l)("p", p.p)("a", p.a)("amp_law", law)(
              "amp_ratio", p.amplitude_law.upper_ratio)("amp_excess",
                                                        p.amplitude_law.excess_mean)("M", p.M);
        }
      },
      model);
}

template <typename Result>
void emit(const Result& r, const OutputFlags& o, std::ostream& out) {
  const auto format = o.format == "csv" ? ResultFormat::csv : ResultFormat::json;
  const std::string text = render(r, format);
  if (o.out.empty()) {
    out << text;
  } else {
    write_text(o.out, text);
    out << "# wrote " << o.out << "\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& log) {
  CLI::App app{"Segmented nearest-neighbor voting workbench", "segvote"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());

  // simulate
  ModelFlags sim_model;
  Common sim_common{0, hw};
  OutputFlags sim_out;
  std::string sim_rule = "seg";
  std::size_t sim_c = 1000;
  std::size_t sim_k = 1;
  std::uint64_t sim_trials = 1000;
  auto* sim = app.add_subcommand("simulate", "Estimate one rule's misclassification probability");
  add_model_flags(sim, sim_model, true, {"a", "b", "c"});
  sim->add_option("--rule", sim_rule, "euclid | coord | seg | balanced");
  sim->add_option("--c", sim_c, "Segment count for --rule seg");
  sim->add_option("--k", sim_k, "Neighbors per segment");
  sim->add_option("--trials", sim_trials, "Monte Carlo trials");
  add_common(sim, sim_common);
  add_output(sim, sim_out);

  // rate
  ModelFlags rate_model;
  rate_model.model = "a";
  rate_model.rho = 0.3;
  Common rate_common{0, hw};
  OutputFlags rate_out;
  std::string rate_rule = "euclid";
  std::size_t rate_c = 2;
  std::string rate_grid = "300:2400:300";
  std::uint64_t rate_trials = 200000;
  std::uint64_t rate_min_events = 10;
  bool rate_assert = false;
  double rate_tol = 0.30;
  auto* rate = app.add_subcommand("rate", "Fit the misclassification decay rate over a d grid");
  rate->add_option("--model", rate_model.model, "Synthetic model family")
      ->check(CLI::IsMember({"a"}));
  add_model_flags(rate, rate_model, false, {"a"});
  rate->add_option("--rule", rate_rule, "euclid | coord | seg | balanced");
  rate->add_option("--c", rate_c, "Segment count for --rule seg");
  rate->add_option("--d-grid", rate_grid, "Dimensions as start:stop:step");
  rate->add_option("--trials", rate_trials, "Monte Carlo trials per grid point");
  rate->add_option("--min-events", rate_min_events,
                   "Grid points with fewer misclassifications are left out of the fit");
  rate->add_flag("--assert", rate_assert,
                 "Exit 3 unless the slope is within --tolerance of the predicted rate");
  rate->add_option("--tolerance", rate_tol, "Relative slope tolerance for --assert");
  add_common(rate, rate_common);
  add_output(rate, rate_out);

  // regimes
  ModelFlags reg_model;
  Common reg_common{0, hw};
  OutputFlags reg_out;
  std::uint64_t reg_trials = 1000;
  RegimeThresholds reg_thr;
  bool reg_assert = false;
  auto* reg = app.add_subcommand("regimes", "Euclidean, coordinate and c=d/l rules side by side");
  add_model_flags(reg, reg_model, true, {"b", "c"});
  reg->add_option("--trials", reg_trials, "Monte Carlo trials per rule");
  reg->add_option("--chance-band", reg_thr.chance_band,
                  "Near-chance verdict: |misclassification - (1 - 1/K)| <= band");
  reg->add_option("--near-zero", reg_thr.near_zero, "Near-zero verdict: misclassification < value");
  reg->add_flag("--assert", reg_assert, "Exit 3 unless every verdict holds");
  add_common(reg, reg_common);
  add_output(reg, reg_out);

  // sweep-nu
  ModelFlags nu_model;
  nu_model.M = 0;
  Common nu_common{0, hw};
  OutputFlags nu_out;
  std::vector<std::size_t> nu_grid{1, 2, 4, 8};
  std::vector<std::string> nu_rules{"seg", "euclid", "coord"};
  std::uint64_t nu_trials = 500;
  SweepThresholds nu_thr;
  bool nu_assert = false;
  auto* nu = app.add_subcommand("sweep-nu", "Misclassification against dictionary size (model B)");
  add_model_flags(nu, nu_model, false, {"b"});
  nu->add_option("--nu-grid", nu_grid, "Dictionary sizes")->delimiter(',');
  nu->add_option("--rules", nu_rules, "Rules (seg uses c = d/l)")->delimiter(',');
  nu->add_option("--trials", nu_trials, "Monte Carlo trials per cell");
  nu->add_option("--chance-band", nu_thr.chance_band, "Coordinate-rule near-chance band");
  nu->add_option("--euclid-floor", nu_thr.euclid_floor,
                 "Euclidean misclassification must stay above this for nu >= 2");
  nu->add_flag("--assert", nu_assert, "Exit 3 unless every verdict holds");
  add_common(nu, nu_common);
  add_output(nu, nu_out);
  nu->get_option("--M")->description("Words per class (0 = largest nu)");

  // bench
  std::string bench_train;
  std::string bench_test;
  std::vector<std::size_t> bench_segments{1, 4, 16, 64, 256};
  std::vector<std::size_t> bench_k{1};
  std::size_t bench_n = 0;
  std::string bench_name;
  Common bench_common{0, hw};
  OutputFlags bench_out;
  bench_out.format = "csv";
  auto* bench = app.add_subcommand("bench", "Accuracy over (c, k) on a feature corpus");
  bench->add_option("--train", bench_train, "Training corpus (SEGF or CSV)")->required();
  bench->add_option("--test", bench_test, "Test corpus (SEGF or CSV)")->required();
  bench->add_option("--segments", bench_segments, "Segment counts c")->delimiter(',');
  bench->add_option("--k", bench_k, "Neighbors per segment")->delimiter(',');
  bench->add_option("--n", bench_n, "Dictionary words per class (0 = smallest class)");
  bench->add_option("--dataset", bench_name, "Row label (default: test file stem)");
  add_common(bench, bench_common);
  add_output(bench, bench_out);

  // split
  std::string split_input;
  double split_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::string split_train;
  std::string split_test;
  auto* split = app.add_subcommand("split", "Stratified train/test split of a corpus");
  split->add_option("--input", split_input, "Corpus to split")->required();
  split->add_option("--test-fraction", split_fraction, "Fraction of each class sent to test");
  split->add_option("--seed", split_seed, "Seed");
  split->add_option("--train-out", split_train, "Train output (.csv for CSV, else SEGF)")
      ->required();
  split->add_option("--test-out", split_test, "Test output (.csv for CSV, else SEGF)")->required();

  // generate
  ModelFlags gen_model;
  std::size_t gen_train = 10;
  std::size_t gen_test = 10;
  std::uint64_t gen_seed = 0;
  std::string gen_train_out;
  std::string gen_test_out;
  auto* gen = app.add_subcommand("generate", "Export a synthetic corpus as train/test files");
  add_model_flags(gen, gen_model, true, {"a", "b", "c"});
  gen->get_option("--M")->description("Ignored; sizes come from --train-per-class/--test-per-class");
  gen->add_option("--train-per-class", gen_train, "Training words per class");
  gen->add_option("--test-per-class", gen_test, "Test words per class");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--train-out", gen_train_out, "Train output (.csv for CSV, else SEGF)")
      ->required();
  gen->add_option("--test-out", gen_test_out, "Test output (.csv for CSV, else SEGF)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream err;
    const int rc = app.exit(e, out, err);
    log << err.str();
    return rc == 0 ? kExitOk : kExitConfig;
  }

  const auto started = std::chrono::steady_clock::now();
  auto log_done = [&](unsigned threads) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    log << "segvote: threads=" << threads << " elapsed_ms=" << ms << "\n";
  };

  try {
    if (sim->parsed()) {
      const ModelSpec model = build_model(sim_model, sim_common.seed);
      RuleSpec rule{parse_rule(sim_rule), sim_c, sim_k};
      Echo e(out, "simulate");
      echo_model(e, model);
      e("rule", rule_name(rule.kind))("c", rule.resolve_c(model_dimension(model)))("k", rule.k)(
          "trials", sim_trials)("seed", sim_common.seed)("format", sim_out.format);
      const auto r = simulate(model, rule, sim_trials, sim_common.seed, sim_common.threads);
      emit(r, sim_out, out);
      log_done(sim_common.threads);
      return kExitOk;
    }

    if (rate->parsed()) {
      const auto model = std::get<ModelAParams>(build_model(rate_model, rate_common.seed));
      RuleSpec rule{parse_rule(rate_rule), rate_c, 1};
      const auto grid = parse_grid(rate_grid);
      Echo e(out, "rate");
      echo_model(e, model);
      e("rule", rule_name(rule.kind)).list("d_grid", grid)("trials", rate_trials)(
          "min_events", rate_min_events)("seed", rate_common.seed)("assert", rate_assert)(
          "tolerance", rate_tol)("format", rate_out.format);
      const auto r = rate_slope(model, rule, grid, rate_trials, rate_common.seed,
                                rate_common.threads, rate_min_events);
      emit(r, rate_out, out);
      log_done(rate_common.threads);
      if (rate_assert) {
        if (!r.predicted_rate) throw ConfigError("--assert: no predicted rate for this rule");
        const double rel = r.fit_ok ? std::abs(r.slope - *r.predicted_rate) / *r.predicted_rate
                                    : std::numeric_limits<double>::infinity();
        if (!(rel <= rate_tol)) return kExitVerdict;
      }
      return kExitOk;
    }

    if (reg->parsed()) {
      const ModelSpec model = build_model(reg_model, reg_common.seed);
      Echo e(out, "regimes");
      echo_model(e, model);
      e("trials", reg_trials)("seed", reg_common.seed)("chance_band", reg_thr.chance_band)(
          "near_zero", reg_thr.near_zero)("assert", reg_assert)("format", reg_out.format);
      const auto r =
          theorem_regime_report(model, reg_trials, reg_common.seed, reg_common.threads, reg_thr);
      emit(r, reg_out, out);
      for (const auto& w : r.warnings) log << "segvote: warning: " << w << "\n";
      log_done(reg_common.threads);
      return reg_assert && !r.verdicts.all() ? kExitVerdict : kExitOk;
    }

    if (nu->parsed()) {
      auto model = std::get<ModelBParams>(build_model(nu_model, nu_common.seed));
      if (model.M == 0) {
        model.M = nu_grid.empty() ? 1 : *std::max_element(nu_grid.begin(), nu_grid.end());
      }
      model.nu = 1;
      std::vector<RuleSpec> rules;
      for (const auto& name : nu_rules) {
        const RuleKind kind = parse_rule(name);
        rules.push_back(RuleSpec{kind, kind == RuleKind::segmented ? model.d / model.l : 1, 1});
      }
      Echo e(out, "sweep-nu");
      echo_model(e, model);
      std::string rule_list;
      for (const auto& r : rules) rule_list += (rule_list.empty() ? "" : ",") + std::string(rule_name(r.kind));
      e.list("nu_grid", nu_grid)("rules", rule_list)("trials", nu_trials)("seed", nu_common.seed)(
          "chance_band", nu_thr.chance_band)("euclid_floor", nu_thr.euclid_floor)(
          "assert", nu_assert)("format", nu_out.format);
      const auto r =
          dictionary_size_sweep(model, nu_grid, rules, nu_trials, nu_common.seed, nu_common.threads);
      emit(r, nu_out, out);
      log_done(nu_common.threads);
      return nu_assert && !sweep_verdicts(r, nu_thr).all() ? kExitVerdict : kExitOk;
    }

    if (bench->parsed()) {
      const std::string name =
          bench_name.empty() ? std::filesystem::path(bench_test).stem().string() : bench_name;
      Echo e(out, "bench");
      e("train", bench_train)("test", bench_test).list("segments", bench_segments).list(
          "k", bench_k)("n", bench_n)("dataset", name)("seed", bench_common.seed)(
          "format", bench_out.format);
      const auto train = load_dataset(bench_train);
      const auto test = load_dataset(bench_test);
      const auto table = accuracy_sweep(train, test, bench_segments, bench_k, bench_n,
                                        bench_common.seed, bench_common.threads, name);
      for (const auto& w : table.warnings) log << "segvote: warning: " << w << "\n";
      emit(table, bench_out, out);
      log_done(bench_common.threads);
      return kExitOk;
    }

    if (split->parsed()) {
      Echo e(out, "split");
      e("input", split_input)("test_fraction", split_fraction)("seed", split_seed)(
          "train_out", split_train)("test_out", split_test);
      const auto ds = load_dataset(split_input);
      const auto [train, test] = train_test_split(ds, split_fraction, split_seed);
      save_dataset(train, split_train);
      save_dataset(test, split_test);
      out << "# train_rows: " << train.size() << "\n# test_rows: " << test.size() << "\n";
      return kExitOk;
    }

    if (gen->parsed()) {
      const ModelSpec model = build_model(gen_model, gen_seed);
      Echo e(out, "generate");
      echo_model(e, model);
      e("train_per_class", gen_train)("test_per_class", gen_test)("seed", gen_seed)(
          "train_out", gen_train_out)("test_out", gen_test_out);
      const auto [train, test] = model_corpus(model, gen_train, gen_test);
      save_dataset(train, gen_train_out);
      save_dataset(test, gen_test_out);
      out << "# train_rows: " << train.size() << "\n# test_rows: " << test.size() << "\n";
      return kExitOk;
    }
  } catch (const IoError& e) {
    log << "segvote: io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    log << "segvote: config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace segvote
