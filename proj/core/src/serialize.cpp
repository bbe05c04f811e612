#include "itsurv/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "itsurv/errors.hpp"

namespace itsurv {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double_token(const std::string& token) {
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("malformed numeric token '" + token + "'");
  }
}

namespace {

json step_to_json(const StepFunction& f) {
  json j;
  j["time"] = f.times();
  j["mass"] = f.masses();
  if (f.initial_value() != 0.0) j["initial"] = f.initial_value();
  return j;
}

StepFunction step_from_json(const json& j) {
  return StepFunction::from_jumps(j.at("time").get<std::vector<double>>(),
                                  j.at("mass").get<std::vector<double>>(),
                                  j.value("initial", 0.0));
}

json basis_to_json(const SplineBasis& b) {
  json j;
  j["interior"] = b.interior_knots();
  j["boundary"] = {b.boundary_knots().first, b.boundary_knots().second};
  return j;
}

SplineBasis basis_from_json(const json& j) {
  const auto boundary = j.at("boundary").get<std::vector<double>>();
  if (boundary.size() != 2) throw ValidationError("fit document: bad boundary knots");
  return SplineBasis(j.at("interior").get<std::vector<double>>(),
                     {boundary[0], boundary[1]});
}

json diagnostics_to_json(const FitDiagnostics& d) {
  return {{"loglik", d.loglik},
          {"iterations", d.iterations},
          {"converged", d.converged},
          {"score_norm", d.score_norm}};
}

FitDiagnostics diagnostics_from_json(const json& j) {
  return {j.at("loglik").get<double>(), j.at("iterations").get<int>(),
          j.at("converged").get<bool>(), j.at("score_norm").get<double>()};
}

json family_to_json(const WeightFamilySummary& s) {
  return {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"count", s.count}};
}

WeightFamilySummary family_from_json(const json& j) {
  WeightFamilySummary s;
  s.min = j.at("min").get<double>();
  s.max = j.at("max").get<double>();
  s.mean = j.at("mean").get<double>();
  s.count = j.at("count").get<std::size_t>();
  return s;
}

std::vector<double> eigen_to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd std_to_eigen(const std::vector<double>& v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[static_cast<int>(k)] = v[k];
  return out;
}

json stratum_to_json(const StructuralFit& fit, const WeightDiagnostics& wd) {
  json j;
  if (fit.stratum) j["stratum"] = *fit.stratum;
  j["design"] = {{"g1", basis_to_json(fit.design.basis1())},
                 {"g2", basis_to_json(fit.design.basis2())},
                 {"g3", basis_to_json(fit.design.basis3())}};
  j["beta"] = {{"g1", eigen_to_std(fit.beta_block(1))},
               {"g2", eigen_to_std(fit.beta_block(2))},
               {"g3", eigen_to_std(fit.beta_block(3))}};
  j["baseline"] = step_to_json(fit.baseline);
  j["t_max"] = fit.t_max;
  j["convergence"] = diagnostics_to_json(fit.diagnostics);
  j["weight_diagnostics"] = {{"w1", family_to_json(wd.w1)},
                             {"w2", family_to_json(wd.w2)},
                             {"wc", family_to_json(wd.wc)}};
  return j;
}

}  // namespace

std::string write_fit_document(const FitDocument& doc) {
  if (doc.strata.size() != doc.diagnostics.size()) {
    throw ConfigError("fit document: strata and diagnostics differ in length");
  }
  json j;
  j["kind"] = "itsurv_fit";
  j["version"] = 1;
  j["seed"] = doc.seed;
  j["strata"] = json::array();
  for (std::size_t k = 0; k < doc.strata.size(); ++k) {
    j["strata"].push_back(stratum_to_json(doc.strata[k], doc.diagnostics[k]));
  }
  return j.dump(2);
}

FitDocument read_fit_document(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("fit document: ") + e.what());
  }
  if (j.value("kind", "") != "itsurv_fit") {
    throw ValidationError("fit document: unrecognized kind");
  }
  FitDocument doc;
  doc.seed = j.value("seed", 0ULL);
  for (const auto& js : j.at("strata")) {
    StructuralDesign design(basis_from_json(js.at("design").at("g1")),
                            basis_from_json(js.at("design").at("g2")),
                            basis_from_json(js.at("design").at("g3")));
    std::vector<double> beta;
    for (const char* block : {"g1", "g2", "g3"}) {
      for (double v : js.at("beta").at(block).get<std::vector<double>>()) {
        beta.push_back(v);
      }
    }
    if (static_cast<int>(beta.size()) != design.dim()) {
      throw ValidationError("fit document: beta length does not match design");
    }
    StructuralFit fit{std_to_eigen(beta),
                      design,
                      step_from_json(js.at("baseline")),
                      std::nullopt,
                      diagnostics_from_json(js.at("convergence")),
                      js.at("t_max").get<double>()};
    if (js.contains("stratum")) fit.stratum = js.at("stratum").get<std::string>();
    doc.strata.push_back(std::move(fit));
    WeightDiagnostics wd;
    const auto& jw = js.at("weight_diagnostics");
    wd.w1 = family_from_json(jw.at("w1"));
    wd.w2 = family_from_json(jw.at("w2"));
    wd.wc = family_from_json(jw.at("wc"));
    doc.diagnostics.push_back(wd);
  }
  return doc;
}

std::string write_hazard_model(const FittedHazardModel& model) {
  json j;
  j["kind"] = "itsurv_hazard_model";
  j["version"] = 1;
  j["covariates"] = model.spec.covariates;
  j["include_treatment_history"] = model.spec.include_treatment_history;
  j["covariate_indices"] = model.covariate_indices;
  j["coefficient_names"] = model.coefficient_names;
  j["coefficients"] = eigen_to_std(model.coefficients);
  j["baseline"] = step_to_json(model.baseline_cumhaz);
  j["convergence"] = diagnostics_to_json(model.diagnostics);
  return j.dump(2);
}

FittedHazardModel read_hazard_model(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("hazard model document: ") + e.what());
  }
  if (j.value("kind", "") != "itsurv_hazard_model") {
    throw ValidationError("hazard model document: unrecognized kind");
  }
  FittedHazardModel model;
  model.spec.covariates = j.at("covariates").get<std::vector<std::string>>();
  model.spec.include_treatment_history = j.at("include_treatment_history").get<bool>();
  model.covariate_indices = j.at("covariate_indices").get<std::vector<std::size_t>>();
  model.coefficient_names = j.at("coefficient_names").get<std::vector<std::string>>();
  model.coefficients = std_to_eigen(j.at("coefficients").get<std::vector<double>>());
  model.baseline_cumhaz = step_from_json(j.at("baseline"));
  model.diagnostics = diagnostics_from_json(j.at("convergence"));
  return model;
}

void write_curve_table(std::ostream& os, const std::vector<SurvivalCurve>& curves) {
  os << "a,t,survival\n";
  for (const auto& c : curves) {
    const std::string a = format_double(c.a);
    for (std::size_t k = 0; k < c.grid.size(); ++k) {
      os << a << "," << format_double(c.grid[k]) << ","
         << format_double(c.survival[k]) << "\n";
    }
  }
}

std::vector<SurvivalCurve> read_curve_table(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "a,t,survival") {
    throw ValidationError("curve table: missing header");
  }
  std::vector<SurvivalCurve> curves;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a_tok, t_tok, s_tok;
    if (!std::getline(ss, a_tok, ',') || !std::getline(ss, t_tok, ',') ||
        !std::getline(ss, s_tok)) {
      throw ValidationError("curve table: malformed row '" + line + "'");
    }
    const double a = parse_double_token(a_tok);
    if (curves.empty() || curves.back().a != a) {
      curves.push_back(SurvivalCurve{a, {}, {}});
    }
    curves.back().grid.push_back(parse_double_token(t_tok));
    curves.back().survival.push_back(parse_double_token(s_tok));
  }
  return curves;
}

void write_theta_table(std::ostream& os, const ThetaGrid& grid) {
  os << "a,theta\n";
  for (std::size_t k = 0; k < grid.a.size(); ++k) {
    os << format_double(grid.a[k]) << "," << format_double(grid.theta[k]) << "\n";
  }
}

ThetaGrid read_theta_table(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "a,theta") {
    throw ValidationError("theta table: missing header");
  }
  ThetaGrid grid;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ValidationError("theta table: malformed row '" + line + "'");
    }
    grid.a.push_back(parse_double_token(line.substr(0, comma)));
    grid.theta.push_back(parse_double_token(line.substr(comma + 1)));
  }
  return grid;
}

void write_sim_report(std::ostream& os, const SimReport& report) {
  os << "estimator,a,truth,mean_bias,sd,coverage,runs_used,runs_failed\n";
  for (const auto& r : report.rows) {
    os << r.estimator << "," << format_double(r.a) << ","
       << format_double(r.truth) << "," << format_double(r.mean_bias) << ","
       << format_double(r.sd) << ","
       << (r.coverage < 0 ? std::string("NA") : format_double(r.coverage))
       << "," << r.runs_used << "," << r.runs_failed << "\n";
  }
}

}  // namespace itsurv
