// itsurv: causal survival analysis of treatment initiation timing.
//
// Subcommands: fit-weights, fit, predict, contrast, simulate, bootstrap.
// Exit codes: 0 success, 1 numerical failure, 2 configuration or I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "itsurv/causal.hpp"
#include "itsurv/data.hpp"
#include "itsurv/errors.hpp"
#include "itsurv/inference.hpp"
#include "itsurv/parallel.hpp"
#include "itsurv/pipeline.hpp"
#include "itsurv/serialize.hpp"
#include "itsurv/simlab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
  throw CliError{code, message};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(2, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) fail(2, "cannot write '" + path.string() + "'");
  out << content;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    fail(2, "config '" + path + "': " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

itsurv::DataSchema schema_from_config(const json& cfg,
                                      const std::string& schema_flag,
                                      const std::string& strata_flag,
                                      std::optional<double> t_max_flag) {
  itsurv::DataSchema schema;
  if (cfg.contains("schema")) {
    const json& js = cfg.at("schema");
    schema.id = js.value("id", schema.id);
    schema.start = js.value("start", schema.start);
    schema.stop = js.value("stop", schema.stop);
    schema.initiation = js.value("initiation", schema.initiation);
    schema.initiation_event = js.value("initiation_event", schema.initiation_event);
    schema.death = js.value("death", schema.death);
    schema.death_event = js.value("death_event", schema.death_event);
    schema.stratum = js.value("stratum", schema.stratum);
    if (js.contains("covariates")) {
      schema.covariates = js.at("covariates").get<std::vector<std::string>>();
    }
    if (js.contains("delimiter")) {
      const std::string d = js.at("delimiter").get<std::string>();
      if (d.size() != 1) fail(2, "schema delimiter must be one character");
      schema.delimiter = d[0];
    }
    if (js.contains("t_max")) schema.t_max = js.at("t_max").get<double>();
  }
  // Flag form: key=value pairs, covariates separated by '+'.
  for (const auto& pair : split_list(schema_flag, ',')) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) fail(2, "--schema entries must be key=value");
    const std::string key = pair.substr(0, eq);
    const std::string value = pair.substr(eq + 1);
    if (key == "id") schema.id = value;
    else if (key == "start") schema.start = value;
    else if (key == "stop") schema.stop = value;
    else if (key == "initiation") schema.initiation = value;
    else if (key == "initiation_event") schema.initiation_event = value;
    else if (key == "death") schema.death = value;
    else if (key == "death_event") schema.death_event = value;
    else if (key == "stratum") schema.stratum = value;
    else if (key == "covariates") schema.covariates = split_list(value, '+');
    else fail(2, "unknown --schema key '" + key + "'");
  }
  if (!strata_flag.empty()) schema.stratum = strata_flag;
  if (t_max_flag) schema.t_max = *t_max_flag;
  return schema;
}

itsurv::HazardSpec hazard_spec_from_config(const json& cfg, const char* key,
                                           bool default_treatment_history) {
  itsurv::HazardSpec spec;
  spec.include_treatment_history = default_treatment_history;
  if (cfg.contains(key)) {
    const json& js = cfg.at(key);
    if (js.contains("covariates")) {
      spec.covariates = js.at("covariates").get<std::vector<std::string>>();
    }
    spec.include_treatment_history =
        js.value("include_treatment_history", default_treatment_history);
  }
  return spec;
}

itsurv::SplineBasis basis_from_knot_string(const std::string& value) {
  std::vector<double> knots;
  for (const auto& tok : split_list(value, ',')) {
    knots.push_back(itsurv::parse_double_token(tok));
  }
  if (knots.size() < 2) fail(2, "--knots needs at least boundary lo,hi");
  const double lo = knots.front();
  const double hi = knots.back();
  return itsurv::SplineBasis({knots.begin() + 1, knots.end() - 1}, {lo, hi});
}

std::optional<itsurv::StructuralDesign> design_from_options(
    const json& cfg, const std::vector<std::string>& knot_flags) {
  std::optional<itsurv::SplineBasis> b1, b2, b3;
  if (cfg.contains("knots")) {
    const json& jk = cfg.at("knots");
    auto from_json = [&](const char* key) -> std::optional<itsurv::SplineBasis> {
      if (!jk.contains(key)) return std::nullopt;
      const auto boundary = jk.at(key).at("boundary").get<std::vector<double>>();
      if (boundary.size() != 2) fail(2, "knots boundary must be [lo, hi]");
      return itsurv::SplineBasis(
          jk.at(key).at("interior").get<std::vector<double>>(),
          {boundary[0], boundary[1]});
    };
    b1 = from_json("g1");
    b2 = from_json("g2");
    b3 = from_json("g3");
  }
  for (const auto& flag : knot_flags) {
    const auto eq = flag.find('=');
    if (eq == std::string::npos) fail(2, "--knots must look like g1=lo,...,hi");
    const std::string which = flag.substr(0, eq);
    const itsurv::SplineBasis basis = basis_from_knot_string(flag.substr(eq + 1));
    if (which == "g1") b1 = basis;
    else if (which == "g2") b2 = basis;
    else if (which == "g3") b3 = basis;
    else fail(2, "unknown --knots block '" + which + "'");
  }
  if (!b1 && !b2 && !b3) return std::nullopt;
  if (!(b1 && b2 && b3)) {
    fail(2, "knot overrides must cover all of g1, g2, g3");
  }
  return itsurv::StructuralDesign(*b1, *b2, *b3);
}

std::vector<double> parse_a_list(const std::string& flag) {
  std::vector<double> out;
  for (const auto& tok : split_list(flag, ',')) {
    out.push_back(itsurv::parse_double_token(tok));
  }
  return out;
}

std::pair<double, double> parse_interval(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) fail(2, "--interval must look like t1:t2");
  return {itsurv::parse_double_token(s.substr(0, colon)),
          itsurv::parse_double_token(s.substr(colon + 1))};
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const json& extra) {
  json manifest;
  manifest["tool"] = "itsurv";
  manifest["version"] = "0.1.0";
  manifest["command"] = command;
  manifest["settings"] = extra;
  spill(out_dir / "manifest.json", manifest.dump(2));
}

void write_weight_report(const fs::path& path,
                         const std::vector<itsurv::PipelineResult>& results) {
  std::ostringstream os;
  os << "stratum,family,min,max,mean,count\n";
  for (const auto& res : results) {
    const std::string label = res.fit.stratum.value_or("");
    auto row = [&](const char* family, const itsurv::WeightFamilySummary& s) {
      os << label << "," << family << "," << itsurv::format_double(s.min) << ","
         << itsurv::format_double(s.max) << "," << itsurv::format_double(s.mean)
         << "," << s.count << "\n";
    };
    row("w1", res.weights.diagnostics.w1);
    row("w2", res.weights.diagnostics.w2);
    row("wc", res.weights.diagnostics.wc);
  }
  spill(path, os.str());
}

struct CommonOptions {
  std::string data_path;
  std::string config_path;
  std::string schema_flag;
  std::string strata_flag;
  std::string out_dir = ".";
  std::vector<std::string> knot_flags;
  std::optional<double> t_max;
  std::optional<double> truncate;
  std::uint64_t seed = 0;
};

itsurv::Dataset load_data(const CommonOptions& opt, const json& cfg) {
  if (opt.data_path.empty()) fail(2, "--data is required");
  const itsurv::DataSchema schema =
      schema_from_config(cfg, opt.schema_flag, opt.strata_flag, opt.t_max);
  return itsurv::load_dataset(opt.data_path, schema);
}

itsurv::PipelineConfig pipeline_from_config(const CommonOptions& opt, const json& cfg) {
  itsurv::PipelineConfig pipe;
  pipe.treatment_model = hazard_spec_from_config(cfg, "treatment_model", false);
  pipe.censoring_model = hazard_spec_from_config(cfg, "censoring_model", true);
  pipe.design = design_from_options(cfg, opt.knot_flags);
  pipe.truncate_quantile = opt.truncate;
  if (!opt.truncate && cfg.contains("truncate_weights")) {
    pipe.truncate_quantile = cfg.at("truncate_weights").get<double>();
  }
  return pipe;
}

fs::path ensure_out_dir(const CommonOptions& opt) {
  fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(2, "cannot create output directory '" + dir.string() + "'");
  return dir;
}

int cmd_fit_weights(const CommonOptions& opt) {
  const json cfg = load_config(opt.config_path);
  const itsurv::Dataset ds = load_data(opt, cfg);
  const itsurv::PipelineConfig pipe = pipeline_from_config(opt, cfg);
  const fs::path out = ensure_out_dir(opt);

  std::vector<itsurv::PipelineResult> results;
  const auto labels = ds.strata_labels();
  auto fit_one = [&](const itsurv::Dataset& subset,
                     const std::optional<std::string>& label) {
    itsurv::PipelineResult res;
    res.treatment_marginal =
        itsurv::process_marginal(subset, itsurv::CountingProcess::Initiation);
    res.censoring_marginal =
        itsurv::process_marginal(subset, itsurv::CountingProcess::Censoring);
    res.treatment_model =
        pipe.treatment_model.dim() > 0
            ? itsurv::fit_cox(subset, pipe.treatment_model,
                              itsurv::CountingProcess::Initiation)
            : itsurv::null_hazard_model(subset, itsurv::CountingProcess::Initiation);
    res.censoring_model =
        pipe.censoring_model.dim() > 0
            ? itsurv::fit_cox(subset, pipe.censoring_model,
                              itsurv::CountingProcess::Censoring)
            : itsurv::null_hazard_model(subset, itsurv::CountingProcess::Censoring);
    res.weights = itsurv::weights_from_models(subset, res);
    if (pipe.truncate_quantile) {
      res.weights = itsurv::truncate_weights(res.weights, pipe.truncate_quantile);
    }
    res.fit.stratum = label;
    const std::string suffix = label ? "_" + *label : "";
    spill(out / ("treatment_model" + suffix + ".json"),
          itsurv::write_hazard_model(*res.treatment_model));
    spill(out / ("censoring_model" + suffix + ".json"),
          itsurv::write_hazard_model(*res.censoring_model));
    results.push_back(std::move(res));
  };
  if (labels.empty()) {
    fit_one(ds, std::nullopt);
  } else {
    for (const auto& label : labels) fit_one(ds.stratum_subset(label), label);
  }
  write_weight_report(out / "weights_report.csv", results);
  write_manifest(out, "fit-weights",
                 {{"data", opt.data_path}, {"strata", labels}});
  return 0;
}

int cmd_fit(const CommonOptions& opt) {
  const json cfg = load_config(opt.config_path);
  const itsurv::Dataset ds = load_data(opt, cfg);
  const itsurv::PipelineConfig pipe = pipeline_from_config(opt, cfg);
  const fs::path out = ensure_out_dir(opt);

  const std::vector<itsurv::PipelineResult> results =
      itsurv::run_pipeline_stratified(ds, pipe);

  itsurv::FitDocument doc;
  doc.seed = opt.seed;
  for (const auto& res : results) {
    doc.strata.push_back(res.fit);
    doc.diagnostics.push_back(res.weights.diagnostics);
  }
  spill(out / "fit.json", itsurv::write_fit_document(doc));
  write_weight_report(out / "weights_report.csv", results);
  write_manifest(out, "fit",
                 {{"data", opt.data_path},
                  {"weighted", pipe.weighted},
                  {"strata", ds.strata_labels()},
                  {"seed", opt.seed}});
  std::cout << "fit: " << results.size() << " stratum block(s) -> "
            << (out / "fit.json").string() << "\n";
  return 0;
}

int cmd_predict(const CommonOptions& opt, const std::string& fit_path,
                const std::string& a_list_flag, double t0,
                const std::vector<std::string>& interval_flags,
                const std::string& theta_grid_flag) {
  if (fit_path.empty()) fail(2, "--fit is required");
  const itsurv::FitDocument doc = itsurv::read_fit_document(slurp(fit_path));
  const fs::path out = ensure_out_dir(opt);

  const std::vector<double> a_list = parse_a_list(a_list_flag);
  for (const auto& fit : doc.strata) {
    const std::string suffix = fit.stratum ? "_" + *fit.stratum : "";
    if (!a_list.empty()) {
      std::vector<itsurv::SurvivalCurve> curves;
      for (double a : a_list) curves.push_back(itsurv::survival_curve(fit, a));
      std::ostringstream os;
      itsurv::write_curve_table(os, curves);
      spill(out / ("curves" + suffix + ".csv"), os.str());
    }
    if (!theta_grid_flag.empty()) {
      const auto parts = split_list(theta_grid_flag, ':');
      if (parts.size() != 3) fail(2, "--theta-grid must look like start:step:end");
      const double start = itsurv::parse_double_token(parts[0]);
      const double step = itsurv::parse_double_token(parts[1]);
      const double end = itsurv::parse_double_token(parts[2]);
      if (step <= 0) fail(2, "--theta-grid step must be positive");
      std::vector<double> grid;
      for (double a = start; a <= end + 1e-12; a += step) grid.push_back(a);
      const itsurv::OptimalInitiation opt_init = itsurv::optimal_initiation(
          fit, itsurv::Endpoint::survival_at(t0), grid);
      std::ostringstream os;
      itsurv::write_theta_table(os, opt_init.grid);
      spill(out / ("theta" + suffix + ".csv"), os.str());
      std::cout << "stratum" << suffix << ": a_opt = " << opt_init.a_opt
                << " theta = " << opt_init.theta << "\n";
    }
    if (!interval_flags.empty()) {
      std::ostringstream os;
      os << "t1,t2,t0,mortality\n";
      for (const auto& flag : interval_flags) {
        const auto [t1, t2] = parse_interval(flag);
        os << itsurv::format_double(t1) << "," << itsurv::format_double(t2)
           << "," << itsurv::format_double(t0) << ","
           << itsurv::format_double(itsurv::interval_mortality(fit, t1, t2, t0))
           << "\n";
      }
      spill(out / ("intervals" + suffix + ".csv"), os.str());
    }
  }
  write_manifest(out, "predict",
                 {{"fit", fit_path}, {"a_list", a_list_flag}, {"t0", t0}});
  return 0;
}

int cmd_contrast(const CommonOptions& opt, const std::string& fit_path,
                 double a, double a_prime, double t0) {
  if (fit_path.empty()) fail(2, "--fit is required");
  const itsurv::FitDocument doc = itsurv::read_fit_document(slurp(fit_path));
  const fs::path out = ensure_out_dir(opt);
  std::ostringstream os;
  os << "stratum,a,a_prime,t0,difference,ratio\n";
  for (const auto& fit : doc.strata) {
    const itsurv::MortalityContrast c = itsurv::contrast(fit, a, a_prime, t0);
    os << fit.stratum.value_or("") << "," << itsurv::format_double(a) << ","
       << itsurv::format_double(a_prime) << "," << itsurv::format_double(t0)
       << "," << itsurv::format_double(c.difference) << ","
       << itsurv::format_double(c.ratio) << "\n";
  }
  spill(out / "contrast.csv", os.str());
  std::cout << os.str();
  return 0;
}

itsurv::SimConfig sim_from_json(const json& js) {
  itsurv::SimConfig sim;
  sim.n = js.value("n", sim.n);
  sim.lambda_inf = js.value("lambda_inf", sim.lambda_inf);
  auto effect = [&](const char* key, itsurv::EffectSpec fallback) {
    if (!js.contains(key)) return fallback;
    return itsurv::EffectSpec{js.at(key).value("constant", 0.0),
                              js.at(key).value("slope", 0.0)};
  };
  sim.g1 = effect("g1", sim.g1);
  sim.g2 = effect("g2", sim.g2);
  sim.g3 = effect("g3", sim.g3);
  sim.treatment_rate = js.value("treatment_rate", sim.treatment_rate);
  sim.gamma = js.value("gamma", sim.gamma);
  sim.censoring_rate = js.value("censoring_rate", sim.censoring_rate);
  sim.censoring_gamma = js.value("censoring_gamma", sim.censoring_gamma);
  sim.confounder_observed = js.value("confounder_observed", sim.confounder_observed);
  sim.frailty_quantile = js.value("frailty_quantile", sim.frailty_quantile);
  sim.t_max = js.value("t_max", sim.t_max);
  sim.seed = js.value("seed", sim.seed);
  return sim;
}

int cmd_simulate(const CommonOptions& opt, int scenario, int runs,
                 int replicates, const std::string& emit_data, int threads) {
  const json cfg = load_config(opt.config_path);
  const json sim_json = cfg.contains("simulation") ? cfg.at("simulation") : json::object();

  itsurv::StudyConfig study;
  study.sim = sim_from_json(sim_json);
  if (opt.seed != 0) study.sim.seed = opt.seed;
  study.runs = runs;
  study.threads = threads;
  study.truncate_quantile = opt.truncate;
  if (sim_json.contains("eval_a")) {
    study.eval_a = sim_json.at("eval_a").get<std::vector<double>>();
  }
  study.t0 = sim_json.value("t0", study.t0);

  // Defaults for the simulation exercise: an effect inside the model class.
  if (!sim_json.contains("g1") && !sim_json.contains("g2")) {
    study.sim.g1 = {0.0, 0.02};
    study.sim.g2 = {0.0, -0.015};
  }

  std::vector<std::pair<std::string, itsurv::StudyConfig>> studies;
  switch (scenario) {
    case 1:
      study.sim.gamma = 0.0;
      study.sim.confounder_observed = true;
      study.estimators = {itsurv::EstimatorKind::Weighted,
                          itsurv::EstimatorKind::Unweighted};
      study.bootstrap_replicates = replicates;
      studies.emplace_back("scenario1", study);
      break;
    case 2:
      study.sim.gamma = sim_json.value("gamma", 1.0);
      study.sim.confounder_observed = true;
      study.estimators = {itsurv::EstimatorKind::Weighted,
                          itsurv::EstimatorKind::Unweighted};
      studies.emplace_back("scenario2", study);
      break;
    case 3: {
      study.sim.confounder_observed = false;
      study.estimators = {itsurv::EstimatorKind::Weighted};
      for (double gamma : {0.0, 0.5, 1.0}) {
        itsurv::StudyConfig variant = study;
        variant.sim.gamma = gamma;
        std::ostringstream name;
        name << "scenario3_gamma" << gamma;
        studies.emplace_back(name.str(), variant);
      }
      break;
    }
    default:
      fail(2, "unknown scenario " + std::to_string(scenario) +
                  " (expected 1, 2 or 3)");
  }

  const fs::path out = ensure_out_dir(opt);

  if (!emit_data.empty()) {
    const itsurv::Dataset ds = itsurv::simulate_dataset(studies.front().second.sim);
    itsurv::DataSchema schema;
    schema.covariates = ds.covariate_names;
    std::ofstream df(emit_data);
    if (!df) fail(2, "cannot write '" + emit_data + "'");
    itsurv::write_dataset(ds, df, schema);
  }

  json summary;
  summary["runs"] = runs;
  summary["seed"] = studies.front().second.sim.seed;
  for (const auto& [name, config] : studies) {
    const itsurv::SimReport report = itsurv::run_study(config);
    std::ostringstream os;
    itsurv::write_sim_report(os, report);
    spill(out / (name + ".csv"), os.str());
    json rows = json::array();
    for (const auto& row : report.rows) {
      rows.push_back({{"estimator", row.estimator},
                      {"a", row.a},
                      {"truth", row.truth},
                      {"mean_bias", row.mean_bias},
                      {"sd", row.sd},
                      {"coverage", row.coverage},
                      {"runs_used", row.runs_used},
                      {"runs_failed", row.runs_failed}});
    }
    summary[name] = {{"gamma", config.sim.gamma}, {"rows", rows}};
    std::cout << name << ": written\n";
  }
  spill(out / "simulation_summary.json", summary.dump(2));
  write_manifest(out, "simulate",
                 {{"scenario", scenario},
                  {"runs", runs},
                  {"replicates", replicates},
                  {"seed", studies.front().second.sim.seed}});
  return 0;
}

int cmd_bootstrap(const CommonOptions& opt, int replicates,
                  const std::string& a_list_flag, double t0,
                  const std::vector<std::string>& interval_flags, int threads,
                  bool no_refit_weights) {
  const json cfg = load_config(opt.config_path);
  const itsurv::Dataset ds = load_data(opt, cfg);
  const itsurv::PipelineConfig pipe = pipeline_from_config(opt, cfg);
  const fs::path out = ensure_out_dir(opt);

  itsurv::BootstrapPlan plan;
  plan.replicates = replicates;
  plan.seed = opt.seed;
  plan.threads = threads;
  plan.refit_weights = !no_refit_weights;
  for (double a : parse_a_list(a_list_flag)) {
    plan.functionals.push_back(itsurv::mortality_functional(a, t0));
  }
  for (const auto& flag : interval_flags) {
    const auto [t1, t2] = parse_interval(flag);
    plan.functionals.push_back(itsurv::interval_mortality_functional(t1, t2, t0));
  }
  if (plan.functionals.empty()) {
    fail(2, "bootstrap needs --a-list or --interval functionals");
  }

  const itsurv::BootstrapResult result = itsurv::bootstrap(ds, pipe, plan);
  std::ostringstream os;
  os << "functional,estimate,se,ci_lo,ci_hi,n_failed\n";
  for (const auto& f : result.functionals) {
    os << f.name << "," << itsurv::format_double(f.estimate) << ","
       << (f.se ? itsurv::format_double(*f.se) : std::string("NA")) << ","
       << itsurv::format_double(f.ci_lo) << "," << itsurv::format_double(f.ci_hi)
       << "," << f.replicate_failures << "\n";
  }
  spill(out / "bootstrap.csv", os.str());
  std::cout << os.str();
  write_manifest(out, "bootstrap",
                 {{"data", opt.data_path},
                  {"replicates", replicates},
                  {"seed", opt.seed},
                  {"refit_weights", plan.refit_weights}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal survival analysis of treatment initiation timing"};
  app.require_subcommand(1);

  CommonOptions opt;
  int scenario = 1;
  int runs = 100;
  int replicates = 200;
  int threads = 0;
  double t0 = 52.0;
  double a = 0.0, a_prime = 8.0;
  std::string fit_path, a_list = "0,8,24,inf", theta_grid, emit_data;
  std::vector<std::string> intervals;
  bool no_refit_weights = false;

  auto add_common = [&](CLI::App* sub, bool with_data) {
    if (with_data) sub->add_option("--data", opt.data_path, "input data file");
    sub->add_option("--config", opt.config_path, "JSON configuration file");
    sub->add_option("--schema", opt.schema_flag,
                    "column mapping, e.g. id=pid,covariates=cd4+age");
    sub->add_option("--strata", opt.strata_flag, "stratification column");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--t-max", opt.t_max, "administrative horizon (weeks)");
    sub->add_option("--knots", opt.knot_flags,
                    "knot override, e.g. g1=0,7.5,13,18.5,40 (lo,...,hi)");
    sub->add_option("--truncate-weights", opt.truncate,
                    "weight truncation quantile in (0.5, 1]");
    sub->add_option("--threads", threads, "worker threads (0 = auto)");
  };

  CLI::App* fw = app.add_subcommand("fit-weights", "fit the treatment and censoring models");
  add_common(fw, true);

  CLI::App* fit = app.add_subcommand("fit", "run the full weighted structural fit");
  add_common(fit, true);

  CLI::App* predict = app.add_subcommand("predict", "survival curves and theta grids from a fit");
  add_common(predict, false);
  predict->add_option("--fit", fit_path, "fit.json produced by the fit subcommand");
  predict->add_option("--a-list", a_list, "initiation times, e.g. 0,8,24,inf");
  predict->add_option("--t0", t0, "endpoint horizon (weeks)");
  predict->add_option("--interval", intervals, "uniform-allocation interval t1:t2");
  predict->add_option("--theta-grid", theta_grid, "theta grid start:step:end");

  CLI::App* con = app.add_subcommand("contrast", "mortality difference and ratio between two regimes");
  add_common(con, false);
  con->add_option("--fit", fit_path, "fit.json");
  con->add_option("--a", a, "first initiation time");
  con->add_option("--a-prime", a_prime, "second initiation time");
  con->add_option("--t0", t0, "endpoint horizon (weeks)");

  CLI::App* sim = app.add_subcommand("simulate", "run a simulation study");
  add_common(sim, false);
  sim->add_option("--scenario", scenario, "1 = randomized, 2 = measured confounding, 3 = unmeasured");
  sim->add_option("--runs", runs, "simulation runs");
  sim->add_option("--replicates", replicates, "bootstrap replicates per run (scenario 1)");
  sim->add_option("--emit-data", emit_data, "also write one simulated dataset to this CSV");

  CLI::App* boot = app.add_subcommand("bootstrap", "bootstrap confidence intervals for causal functionals");
  add_common(boot, true);
  boot->add_option("--replicates", replicates, "bootstrap replicates");
  boot->add_option("--a-list", a_list, "mortality functionals at these initiation times");
  boot->add_option("--t0", t0, "endpoint horizon (weeks)");
  boot->add_option("--interval", intervals, "interval-mortality functional t1:t2");
  boot->add_flag("--no-refit-weights", no_refit_weights,
                 "reuse full-data weight models inside replicates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fw->parsed()) return cmd_fit_weights(opt);
    if (fit->parsed()) return cmd_fit(opt);
    if (predict->parsed()) {
      return cmd_predict(opt, fit_path, a_list, t0, intervals, theta_grid);
    }
    if (con->parsed()) return cmd_contrast(opt, fit_path, a, a_prime, t0);
    if (sim->parsed()) {
      return cmd_simulate(opt, scenario, runs, replicates, emit_data, threads);
    }
    if (boot->parsed()) {
      return cmd_bootstrap(opt, replicates, a_list, t0, intervals, threads,
                           no_refit_weights);
    }
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const itsurv::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const itsurv::ValidationError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const itsurv::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
