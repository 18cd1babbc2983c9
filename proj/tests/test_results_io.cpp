#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "segvote/error.hpp"
#include "segvote/results_io.hpp"

using namespace segvote;
using nlohmann::json;

TEST_CASE("simulation JSON has config and results") {
  const auto r = simulate(ModelAParams{30, 0.3, 1, 0, false}, RuleSpec::segmented(5), 200, 8);
  const auto j = json::parse(render(r, ResultFormat::json));
  CHECK(j.size() == 2);
  CHECK(j["config"]["params"]["model"] == "a");
  CHECK(j["config"]["rule"]["c"] == 5);
  CHECK(j["config"]["seed"] == 8);
  CHECK(j["results"]["estimate"]["trials"] == 200);
  CHECK(j["results"]["estimate"]["misclassified"] == r.estimate.successes);
  CHECK(render(r, ResultFormat::json) == render(r, ResultFormat::json));

  const auto csv = render(r, ResultFormat::csv);
  CHECK(csv.rfind("model,rule,c,k,trials,misclassified,p_hat,ci_low,ci_high\n", 0) == 0);
  CHECK(csv.find("\na,segmented,5,1,200,") != std::string::npos);
}

TEST_CASE("rate JSON reports the fit and each point") {
  const std::size_t grid[] = {20, 40};
  const auto r = rate_slope(ModelAParams{0, 0.3, 1, 0, false}, RuleSpec::euclidean(), grid, 500, 1);
  const auto j = json::parse(render(r, ResultFormat::json));
  CHECK(j["config"]["d_grid"] == json::array({20, 40}));
  CHECK(j["results"]["points"].size() == 2);
  CHECK(j["results"]["fit_ok"] == r.fit_ok);
  CHECK(j["results"]["predicted_rate"].get<double>() == doctest::Approx(*r.predicted_rate));
  CHECK(j["results"].contains("relative_error"));
  const auto csv = render(r, ResultFormat::csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("regime, sweep and accuracy renderings") {
  ModelBParams b;
  b.d = 100;
  b.l = 10;
  b.p = 0.05;
  const auto reg = theorem_regime_report(b, 20, 0);
  const auto rj = json::parse(render(reg, ResultFormat::json));
  CHECK(rj["results"]["rules"]["segmented"]["c"] == 10);
  CHECK(rj["results"]["verdicts"].size() == 3);
  CHECK(rj["config"]["thresholds"]["chance_band"] == 0.1);
  CHECK(render(reg, ResultFormat::csv).rfind("rule,c,trials,misclassified,p_hat,ci_low,ci_high,correct\n", 0) == 0);

  b.M = 2;
  const std::size_t nus[] = {1, 2};
  const RuleSpec rules[] = {RuleSpec::segmented(10)};
  const auto sweep = dictionary_size_sweep(b, nus, rules, 10, 0);
  const auto sj = json::parse(render(sweep, ResultFormat::json));
  CHECK(sj["results"]["cells"].size() == 2);
  CHECK(sj["results"]["verdicts"]["coord_near_chance"].is_null());

  LabeledDataset ds(2, 2);
  ds.push_back(std::vector<double>{0, 0}, 0);
  ds.push_back(std::vector<double>{1, 1}, 1);
  const std::size_t cs[] = {1, 2};
  const std::size_t ks[] = {1};
  const auto table = accuracy_sweep(ds, ds, cs, ks, 1, 0, 1, "toy");
  CHECK(render(table, ResultFormat::csv) == "dataset,c,k,accuracy\ntoy,1,1,1\ntoy,2,1,1\n");
  const auto tj = json::parse(render(table, ResultFormat::json));
  CHECK(tj["results"]["rows"][0]["cells"][1]["coordinate_ops"] == 8);  // 2 queries x 2 entries x d=2
}

TEST_CASE("write_text") {
  const auto path = oracle::tmp_dir() / "results_text.json";
  write_text(path, "{}\n");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "{}\n");
  CHECK_THROWS_AS(write_text(oracle::tmp_dir() / "missing_dir" / "x.json", "x"), WriteError);
}
