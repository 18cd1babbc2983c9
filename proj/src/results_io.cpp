#include "segvote/results_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "segvote/error.hpp"

namespace segvote {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const char* amplitude_law_name(AmplitudeLaw::Kind kind) {
  switch (kind) {
    case AmplitudeLaw::Kind::uniform:
      return "uniform";
    case AmplitudeLaw::Kind::constant:
      return "constant";
    case AmplitudeLaw::Kind::shifted_exponential:
      return "shifted_exponential";
  }
  return "?";
}

Json model_json(const ModelAParams& p) {
  return Json{{"model", "a"},     {"d", p.d},       {"rho", p.rho},
              {"M", p.M},         {"seed", p.seed}, {"identical_classes", p.identical_classes}};
}

Json model_json(const ModelBParams& p) {
  return Json{{"model", "b"}, {"d", p.d},   {"l", p.l},   {"p", p.p},        {"amp", p.amp},
              {"K", p.K},     {"M", p.M},   {"nu", p.nu}, {"seed", p.seed}};
}

Json model_json(const ModelCParams& p) {
  Json law{{"kind", amplitude_law_name(p.amplitude_law.kind)}};
  if (p.amplitude_law.kind == AmplitudeLaw::Kind::uniform) {
    law["upper_ratio"] = p.amplitude_law.upper_ratio;
  } else if (p.amplitude_law.kind == AmplitudeLaw::Kind::shifted_exponential) {
    law["excess_mean"] = p.amplitude_law.excess_mean;
  }
  return Json{{"model", "c"}, {"d", p.d}, {"l", p.l},   {"p", p.p},
              {"a", p.a},     {"amplitude_law", law},   {"M", p.M},
              {"seed", p.seed}};
}

Json model_json(const ModelSpec& m) {
  return std::visit([](const auto& p) { return model_json(p); }, m);
}

Json rule_json(const RuleSpec& rule, std::size_t c) {
  return Json{{"kind", rule_name(rule.kind)}, {"c", c}, {"k", rule.k}};
}

Json estimate_json(const ProbEstimate& e) {
  return Json{{"misclassified", e.successes},
              {"trials", e.trials},
              {"p_hat", e.point_estimate},
              {"ci_low", e.ci_low},
              {"ci_high", e.ci_high}};
}

std::string estimate_csv(const ProbEstimate& e) {
  return std::to_string(e.trials) + "," + std::to_string(e.successes) + "," +
         num(e.point_estimate) + "," + num(e.ci_low) + "," + num(e.ci_high);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json optional_bool(const std::optional<bool>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string render(const SimulationResult& r, ResultFormat format) {
  if (format == ResultFormat::csv) {
    return "model,rule,c,k,trials,misclassified,p_hat,ci_low,ci_high\n" +
           std::string(model_name(r.model)) + "," + rule_name(r.rule.kind) + "," +
           std::to_string(r.c) + "," + std::to_string(r.rule.k) + "," + estimate_csv(r.estimate) +
           "\n";
  }
  Json j;
  j["config"] = Json{{"command", "simulate"},
                     {"params", model_json(r.model)},
                     {"rule", rule_json(r.rule, r.c)},
                     {"trials", r.trials},
                     {"seed", r.seed}};
  j["results"] = Json{{"estimate", estimate_json(r.estimate)}};
  return dump(j);
}

std::string render(const RateSlopeResult& r, ResultFormat format) {
  if (format == ResultFormat::csv) {
    std::string out = "d,c,trials,misclassified,p_hat,ci_low,ci_high,undersampled,neg_log_p\n";
    for (const auto& pt : r.points) {
      out += std::to_string(pt.d) + "," + std::to_string(pt.c) + "," + estimate_csv(pt.estimate) +
             "," + (pt.undersampled ? "1" : "0") + "," +
             (pt.undersampled ? std::string() : num(pt.neg_log_p)) + "\n";
    }
    return out;
  }
  Json grid = Json::array();
  for (const auto& pt : r.points) grid.push_back(pt.d);
  Json j;
  j["config"] = Json{{"command", "rate"},
                     {"params", model_json(r.model)},
                     {"rule", Json{{"kind", rule_name(r.rule.kind)}, {"k", r.rule.k}}},
                     {"d_grid", grid},
                     {"trials", r.trials},
                     {"seed", r.seed},
                     {"min_events", r.min_events}};
  Json points = Json::array();
  for (const auto& pt : r.points) {
    Json p{{"d", pt.d}, {"c", pt.c}};
    p["estimate"] = estimate_json(pt.estimate);
    p["undersampled"] = pt.undersampled;
    p["neg_log_p"] = pt.undersampled ? Json(nullptr) : Json(pt.neg_log_p);
    points.push_back(p);
  }
  Json res;
  res["slope"] = r.fit_ok ? Json(r.slope) : Json(nullptr);
  res["intercept"] = r.fit_ok ? Json(r.intercept) : Json(nullptr);
  res["fitted_points"] = r.fitted_points;
  res["fit_ok"] = r.fit_ok;
  res["undersampled_at_largest_d"] = r.undersampled_at_largest_d;
  res["predicted_rate"] = r.predicted_rate ? Json(*r.predicted_rate) : Json(nullptr);
  res["relative_error"] = (r.fit_ok && r.predicted_rate && *r.predicted_rate != 0.0)
                              ? Json((r.slope - *r.predicted_rate) / *r.predicted_rate)
                              : Json(nullptr);
  res["points"] = points;
  j["results"] = res;
  return dump(j);
}

std::string render(const RegimeReport& r, ResultFormat format) {
  const std::pair<const char*, const RuleEstimate*> rules[] = {
      {"euclidean", &r.euclidean}, {"coordinate", &r.coordinate}, {"segmented", &r.segmented}};
  if (format == ResultFormat::csv) {
    std::string out = "rule,c,trials,misclassified,p_hat,ci_low,ci_high,correct\n";
    for (const auto& [name, e] : rules) {
      out += std::string(name) + "," + std::to_string(e->c) + "," +
             estimate_csv(e->misclassification) + "," + num(e->correct) + "\n";
    }
    return out;
  }
  Json j;
  j["config"] = Json{{"command", "regimes"},
                     {"params", model_json(r.model)},
                     {"trials", r.trials},
                     {"seed", r.seed},
                     {"thresholds", Json{{"chance_band", r.thresholds.chance_band},
                                         {"near_zero", r.thresholds.near_zero}}}};
  Json rj;
  for (const auto& [name, e] : rules) {
    Json entry = rule_json(e->rule, e->c);
    entry["misclassification"] = estimate_json(e->misclassification);
    entry["correct"] = e->correct;
    rj[name] = entry;
  }
  Json res;
  res["K"] = r.K;
  res["chance_misclassification"] = r.chance_misclassification;
  res["rules"] = rj;
  res["verdicts"] = Json{{"euclid_near_chance", r.verdicts.euclid_near_chance},
                         {"coord_near_chance", r.verdicts.coord_near_chance},
                         {"segmented_near_zero", r.verdicts.segmented_near_zero}};
  res["warnings"] = r.warnings;
  j["results"] = res;
  return dump(j);
}

std::string render(const NuSweepResult& r, ResultFormat format) {
  if (format == ResultFormat::csv) {
    std::string out = "nu,rule,c,trials,misclassified,p_hat,ci_low,ci_high\n";
    for (const auto& cell : r.cells) {
      out += std::to_string(cell.nu) + "," + rule_name(cell.rule.kind) + "," +
             std::to_string(cell.c) + "," + estimate_csv(cell.estimate) + "\n";
    }
    return out;
  }
  Json rules = Json::array();
  for (const auto& rule : r.rules) {
    rules.push_back(rule_json(rule, rule.resolve_c(r.model.d)));
  }
  Json j;
  j["config"] = Json{{"command", "sweep-nu"},
                     {"params", model_json(r.model)},
                     {"nu_grid", r.nu_grid},
                     {"rules", rules},
                     {"trials", r.trials},
                     {"seed", r.seed}};
  Json cells = Json::array();
  for (const auto& cell : r.cells) {
    Json c{{"nu", cell.nu}, {"rule", rule_name(cell.rule.kind)}, {"c", cell.c}};
    c["estimate"] = estimate_json(cell.estimate);
    cells.push_back(c);
  }
  const auto v = sweep_verdicts(r);
  Json res;
  res["cells"] = cells;
  res["verdicts"] = Json{{"segmented_nonincreasing", optional_bool(v.segmented_nonincreasing)},
                         {"euclid_between", optional_bool(v.euclid_between)},
                         {"coord_near_chance", optional_bool(v.coord_near_chance)}};
  j["results"] = res;
  return dump(j);
}

std::string render(const AccuracyTable& r, ResultFormat format) {
  if (format == ResultFormat::csv) {
    std::string out = "dataset,c,k,accuracy\n";
    for (const auto& row : r.rows) {
      for (const auto& cell : row.cells) {
        out += row.dataset + "," + std::to_string(cell.c) + "," + std::to_string(cell.k) + "," +
               num(cell.accuracy) + "\n";
      }
    }
    return out;
  }
  Json j;
  j["config"] = Json{{"command", "bench"},
                     {"segments", r.c_list},
                     {"k", r.k_list},
                     {"n", r.n},
                     {"seed", r.seed}};
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json cells = Json::array();
    for (const auto& cell : row.cells) {
      cells.push_back(Json{{"c", cell.c},
                           {"k", cell.k},
                           {"accuracy", cell.accuracy},
                           {"correct", cell.correct},
                           {"total", cell.total},
                           {"coordinate_ops", cell.coordinate_ops}});
    }
    rows.push_back(Json{{"dataset", row.dataset}, {"cells", cells}});
  }
  j["results"] = Json{{"rows", rows}, {"warnings", r.warnings}};
  return dump(j);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WriteError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw WriteError("failed writing " + path.string());
}

}  // namespace segvote
