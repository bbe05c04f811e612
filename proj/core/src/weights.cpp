#include "itsurv/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "itsurv/errors.hpp"

namespace itsurv {

namespace {

constexpr double kPositivityFloor = 1e-12;
// exp(-x) < 1e-12 over this cumulative-hazard level.
const double kHazardCeiling = -std::log(kPositivityFloor);

WeightFamilySummary summarize(const std::vector<double>& sample) {
  WeightFamilySummary s;
  if (sample.empty()) return s;
  s.count = sample.size();
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double v : sample) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(sample.size());
  return s;
}

void collect_trajectory_values(const std::vector<StepFunction>& fns,
                               std::vector<double>* out) {
  for (const auto& f : fns) {
    for (std::size_t k = 0; k < f.size(); ++k) out->push_back(f.cumulative(k));
  }
}

// Empirical quantile: smallest sample value v with F(v) >= p.
double empirical_quantile(std::vector<double> sample, double p) {
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  const double raw = std::ceil(static_cast<double>(n) * p - 1e-12);
  std::size_t idx = raw <= 1.0 ? 0 : static_cast<std::size_t>(raw) - 1;
  if (idx >= n) idx = n - 1;
  return sample[idx];
}

StepFunction capped(const StepFunction& f, double cap) {
  if (f.empty()) return f;
  std::vector<double> values(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    values[k] = std::min(f.cumulative(k), cap);
  }
  return StepFunction::from_values(f.times(), values, f.initial_value());
}

}  // namespace

FittedHazardModel null_hazard_model(const Dataset& ds, CountingProcess process) {
  std::vector<double> times;
  std::vector<std::uint8_t> events;
  for (const auto& s : ds.subjects) {
    const ProcessPoint pt = process_point(s, process, ds.t_max);
    times.push_back(pt.exit);
    events.push_back(pt.event ? 1 : 0);
  }
  FittedHazardModel model;
  model.coefficients = Eigen::VectorXd::Zero(0);
  model.baseline_cumhaz = nelson_aalen(times, events);
  model.diagnostics = {0.0, 0, true, 0.0};
  return model;
}

WeightSet WeightSet::unit(std::size_t n) {
  WeightSet ws;
  ws.w1_at_a.assign(n, 1.0);
  ws.w2.assign(n, StepFunction::from_jumps({}, {}, 1.0));
  ws.wc.assign(n, StepFunction::from_jumps({}, {}, 1.0));
  return ws;
}

double WeightSet::structural_weight(const SubjectRecord& s, std::size_t i,
                                    double t) const {
  const double treat = (s.delta_a && s.a_star < t) ? w1_at_a[i] : w2[i].value(t);
  return wc[i].value(t) * treat;
}

TreatmentWeights estimate_treatment_weights(const Dataset& ds,
                                            const FittedHazardModel& treatment_model,
                                            const MarginalLaw& marginal) {
  const StepFunction& base = treatment_model.baseline_cumhaz;
  TreatmentWeights out;
  out.w1_at_a.assign(ds.size(), std::numeric_limits<double>::quiet_NaN());
  out.w2.reserve(ds.size());

  for (std::size_t i = 0; i < ds.size(); ++i) {
    const SubjectRecord& s = ds.subjects[i];
    std::vector<double> times, values;
    double lambda_cond = 0.0;
    for (std::size_t k = 0; k < base.size(); ++k) {
      const double u = base.times()[k];
      if (u > s.a_star) break;
      const double r = treatment_model.risk_score(s, u);
      if (s.delta_a && u == s.a_star) {
        // Own initiation time: density-mass ratio with left-limit survivals.
        const double cond_mass = r * base.masses()[k] * std::exp(-lambda_cond);
        if (cond_mass < kPositivityFloor) {
          throw PositivityError("positivity violation for subject '" + s.id +
                                "' at time " + std::to_string(u) +
                                " (conditional initiation density underflow)");
        }
        out.w1_at_a[i] = marginal.density_mass(u) / cond_mass;
      }
      lambda_cond += r * base.masses()[k];
      if (lambda_cond > kHazardCeiling) {
        throw PositivityError("positivity violation for subject '" + s.id +
                              "' at time " + std::to_string(u) +
                              " (conditional initiation survival underflow)");
      }
      times.push_back(u);
      values.push_back(std::exp(lambda_cond - marginal.cumhaz.cumulative(k)));
    }
    if (s.delta_a && std::isnan(out.w1_at_a[i])) {
      throw Error("treatment model baseline has no jump at subject '" + s.id +
                  "' initiation time; was the model fit on this dataset?");
    }
    out.w2.push_back(StepFunction::from_values(times, values, 1.0));
  }
  return out;
}

std::vector<StepFunction> estimate_censoring_weights(const Dataset& ds,
                                                     const FittedHazardModel& censoring_model,
                                                     const MarginalLaw& marginal) {
  const StepFunction& base = censoring_model.baseline_cumhaz;
  std::vector<StepFunction> out;
  out.reserve(ds.size());
  for (const auto& s : ds.subjects) {
    std::vector<double> times, values;
    double lambda_cond = 0.0;
    for (std::size_t k = 0; k < base.size(); ++k) {
      const double u = base.times()[k];
      if (u > s.t_star) break;
      lambda_cond += censoring_model.risk_score(s, u) * base.masses()[k];
      if (lambda_cond > kHazardCeiling) {
        throw PositivityError("positivity violation for subject '" + s.id +
                              "' at time " + std::to_string(u) +
                              " (conditional censoring survival underflow)");
      }
      times.push_back(u);
      values.push_back(std::exp(lambda_cond - marginal.cumhaz.cumulative(k)));
    }
    out.push_back(StepFunction::from_values(times, values, 1.0));
  }
  return out;
}

WeightSet assemble_weights(TreatmentWeights treatment,
                           std::vector<StepFunction> censoring) {
  if (treatment.w1_at_a.size() != censoring.size()) {
    throw ConfigError("assemble_weights: family sizes differ");
  }
  WeightSet ws;
  ws.w1_at_a = std::move(treatment.w1_at_a);
  ws.w2 = std::move(treatment.w2);
  ws.wc = std::move(censoring);

  std::vector<double> sample;
  for (double v : ws.w1_at_a) {
    if (!std::isnan(v)) sample.push_back(v);
  }
  ws.diagnostics.w1 = summarize(sample);
  sample.clear();
  collect_trajectory_values(ws.w2, &sample);
  ws.diagnostics.w2 = summarize(sample);
  sample.clear();
  collect_trajectory_values(ws.wc, &sample);
  ws.diagnostics.wc = summarize(sample);
  return ws;
}

WeightSet truncate_weights(const WeightSet& ws, std::optional<double> quantile) {
  if (!quantile) return ws;
  if (!(*quantile > 0.5) || !(*quantile <= 1.0)) {
    throw ConfigError("truncation quantile must lie in (0.5, 1]");
  }
  WeightSet out;
  out.w1_at_a = ws.w1_at_a;
  out.w2 = ws.w2;
  out.wc = ws.wc;

  std::vector<double> sample;
  for (double v : ws.w1_at_a) {
    if (!std::isnan(v)) sample.push_back(v);
  }
  if (!sample.empty()) {
    const double cap = empirical_quantile(sample, *quantile);
    for (double& v : out.w1_at_a) {
      if (!std::isnan(v)) v = std::min(v, cap);
    }
  }

  sample.clear();
  collect_trajectory_values(ws.w2, &sample);
  if (!sample.empty()) {
    const double cap = empirical_quantile(sample, *quantile);
    for (auto& f : out.w2) f = capped(f, cap);
  }

  sample.clear();
  collect_trajectory_values(ws.wc, &sample);
  if (!sample.empty()) {
    const double cap = empirical_quantile(sample, *quantile);
    for (auto& f : out.wc) f = capped(f, cap);
  }

  TreatmentWeights tw{std::move(out.w1_at_a), std::move(out.w2)};
  return assemble_weights(std::move(tw), std::move(out.wc));
}

}  // namespace itsurv
