#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "itsurv/data.hpp"
#include "itsurv/pipeline.hpp"

namespace itsurv {

// Constant-plus-linear effect function g(x) = constant + slope * x; the only
// forms with a closed-form inverse for event-time sampling.
struct EffectSpec {
  double constant = 0.0;
  double slope = 0.0;

  double operator()(double x) const { return constant + slope * x; }
  bool is_zero() const { return constant == 0.0 && slope == 0.0; }
};

// Generative model: potential outcomes are drawn directly from the
// structural hazard (constant reference hazard lambda_inf, effect functions
// g1/g2/g3), so the marginal law of T_a is known in closed form. The
// baseline confounder L is the indicator that the subject's untreated death
// time falls below a quantile of its law, which ties L to mortality without
// leaving the structural model class; initiation hazard is
// treatment_rate * exp(gamma * L), so gamma > 0 makes frail subjects
// initiate sooner. Censoring is exponential, optionally depending on L.
struct SimConfig {
  int n = 500;
  double lambda_inf = 0.01;  // per week
  EffectSpec g1, g2, g3;
  double treatment_rate = 0.08;
  double gamma = 0.0;
  double censoring_rate = 0.01;
  double censoring_gamma = 0.0;
  bool confounder_observed = true;
  double frailty_quantile = 0.5;
  double t_max = 78.0;
  std::uint64_t seed = 1;
};

// Latent per-subject values, before any censoring; exposed so generator
// oracles can be checked independently of the estimator.
struct SimTruth {
  double a = 0.0;           // latent initiation time
  double t = 0.0;           // death time under initiation at a (may be +inf)
  double c = 0.0;           // censoring time (may be +inf)
  double confounder = 0.0;  // L
};

Dataset simulate_dataset(const SimConfig& cfg,
                         std::vector<SimTruth>* truth = nullptr);

// Closed-form Lambda_a(t) and one-year-style mortality under the configured
// truth; a may be +inf.
double true_cumulative_hazard(const SimConfig& cfg, double a, double t);
double true_mortality(const SimConfig& cfg, double a, double t0);

enum class EstimatorKind { Weighted, Unweighted };

struct StudyConfig {
  SimConfig sim;
  int runs = 500;
  std::vector<double> eval_a = {0.0, 8.0};
  double t0 = 52.0;
  std::vector<EstimatorKind> estimators = {EstimatorKind::Weighted};
  int bootstrap_replicates = 0;  // CI coverage recorded when > 0
  bool bootstrap_weighted_only = true;
  std::optional<double> truncate_quantile;
  int threads = 0;
};

struct SimReportRow {
  std::string estimator;
  double a = 0.0;
  double truth = 0.0;
  double mean_bias = 0.0;
  double sd = 0.0;
  double coverage = -1.0;  // negative when CIs were not produced
  int runs_used = 0;
  int runs_failed = 0;
};

struct SimReport {
  std::vector<SimReportRow> rows;
  int runs = 0;
  std::uint64_t seed = 0;

  const SimReportRow& row(EstimatorKind kind, double a) const;
};

// simulate -> fit -> evaluate, repeated; aggregates bias, spread and CI
// coverage against the closed-form truth.
SimReport run_study(const StudyConfig& cfg);

}  // namespace itsurv
