#include "itsurv/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "itsurv/causal.hpp"
#include "itsurv/errors.hpp"
#include "itsurv/inference.hpp"
#include "itsurv/parallel.hpp"
#include "itsurv/rng.hpp"

namespace itsurv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_config(const SimConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("simulate: n must be >= 1");
  if (!(cfg.lambda_inf > 0.0)) throw ConfigError("simulate: lambda_inf must be positive");
  if (!(cfg.treatment_rate > 0.0)) throw ConfigError("simulate: treatment rate must be positive");
  if (cfg.censoring_rate < 0.0) throw ConfigError("simulate: censoring rate must be nonnegative");
  if (!(cfg.t_max > 0.0)) throw ConfigError("simulate: t_max must be positive");
  if (!(cfg.frailty_quantile > 0.0) || !(cfg.frailty_quantile < 1.0)) {
    throw ConfigError("simulate: frailty quantile must lie in (0, 1)");
  }
}

// Post-initiation log hazard ratio at duration d: alpha(a) + slope(a) * d.
struct PostInitiation {
  double alpha;
  double slope;
};

PostInitiation post_initiation(const SimConfig& cfg, double a) {
  return {cfg.g1(a) + cfg.g2.constant + cfg.g3.constant,
          cfg.g2.slope + cfg.g3.slope * a};
}

// Death time solving Lambda_a(T) = e, given the unit-exponential draw e.
double invert_death_time(const SimConfig& cfg, double a, double e) {
  const double lam = cfg.lambda_inf;
  if (std::isinf(a) || e <= lam * a) return e / lam;
  const PostInitiation post = post_initiation(cfg, a);
  const double residual = (e - lam * a) / lam;  // integral of exp(alpha+slope*d)
  if (post.slope == 0.0) {
    return a + residual * std::exp(-post.alpha);
  }
  const double arg = post.slope * residual * std::exp(-post.alpha);
  if (arg <= -1.0) return kInf;  // hazard integrates to less than e
  return a + std::log1p(arg) / post.slope;
}

}  // namespace

double true_cumulative_hazard(const SimConfig& cfg, double a, double t) {
  const double lam = cfg.lambda_inf;
  if (std::isinf(a) || t <= a) return lam * t;
  const PostInitiation post = post_initiation(cfg, a);
  const double d = t - a;
  double integral;  // of exp(alpha + slope*s) ds over (0, d]
  if (post.slope == 0.0) {
    integral = std::exp(post.alpha) * d;
  } else {
    integral = std::exp(post.alpha) * std::expm1(post.slope * d) / post.slope;
  }
  return lam * a + lam * integral;
}

double true_mortality(const SimConfig& cfg, double a, double t0) {
  return -std::expm1(-true_cumulative_hazard(cfg, a, t0));
}

Dataset simulate_dataset(const SimConfig& cfg, std::vector<SimTruth>* truth) {
  check_config(cfg);
  Rng rng(cfg.seed);
  Dataset ds;
  ds.t_max = cfg.t_max;
  if (cfg.confounder_observed) ds.covariate_names = {"L"};
  ds.subjects.reserve(cfg.n);
  if (truth) {
    truth->clear();
    truth->reserve(cfg.n);
  }

  // L = I(T_inf < threshold): the frailty_quantile-fraction most at risk
  // under no treatment.
  const double threshold =
      -std::log1p(-cfg.frailty_quantile) / cfg.lambda_inf;

  for (int i = 0; i < cfg.n; ++i) {
    const double e = rng.exponential(1.0);
    const double t_inf = e / cfg.lambda_inf;
    const double confounder = t_inf < threshold ? 1.0 : 0.0;
    const double a_latent =
        rng.exponential(cfg.treatment_rate * std::exp(cfg.gamma * confounder));
    const double t_latent = invert_death_time(cfg, a_latent, e);
    const double c_latent =
        cfg.censoring_rate > 0.0
            ? rng.exponential(cfg.censoring_rate *
                              std::exp(cfg.censoring_gamma * confounder))
            : kInf;
    if (truth) truth->push_back({a_latent, t_latent, c_latent, confounder});

    const double t_star_raw = std::min(t_latent, c_latent);
    bool delta_t = t_latent < c_latent;
    bool delta_a = a_latent < t_star_raw;
    const double a_star_raw = std::min(a_latent, t_star_raw);

    SubjectRecord rec;
    rec.id = "s" + std::to_string(i);
    // Administrative censoring at t_max.
    if (t_star_raw > cfg.t_max) {
      rec.t_star = cfg.t_max;
      rec.delta_t = false;
    } else {
      rec.t_star = t_star_raw;
      rec.delta_t = delta_t;
    }
    if (a_star_raw >= cfg.t_max) {
      rec.a_star = cfg.t_max;
      rec.delta_a = false;
    } else {
      rec.a_star = a_star_raw;
      rec.delta_a = delta_a;
    }
    std::vector<double> values;
    if (cfg.confounder_observed) values.push_back(confounder);
    rec.covariates = CovariatePath({{0.0, rec.t_star, values}});
    ds.subjects.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

const SimReportRow& SimReport::row(EstimatorKind kind, double a) const {
  const std::string label = kind == EstimatorKind::Weighted ? "weighted" : "unweighted";
  for (const auto& r : rows) {
    if (r.estimator == label && r.a == a) return r;
  }
  throw ConfigError("SimReport: no row for estimator '" + label + "' at a=" +
                    std::to_string(a));
}

SimReport run_study(const StudyConfig& cfg) {
  if (cfg.runs < 1) throw ConfigError("run_study: runs must be >= 1");
  if (cfg.eval_a.empty()) throw ConfigError("run_study: no evaluation times");
  if (cfg.estimators.empty()) throw ConfigError("run_study: no estimators");
  check_config(cfg.sim);

  const std::size_t n_est = cfg.estimators.size();
  const std::size_t n_a = cfg.eval_a.size();
  const std::size_t runs = static_cast<std::size_t>(cfg.runs);

  struct RunCell {
    double estimate = std::numeric_limits<double>::quiet_NaN();
    int covered = -1;  // -1: no CI, 0/1 otherwise
    bool failed = false;
  };
  std::vector<std::vector<RunCell>> cells(
      runs, std::vector<RunCell>(n_est * n_a));

  std::vector<double> truths(n_a);
  for (std::size_t j = 0; j < n_a; ++j) {
    truths[j] = true_mortality(cfg.sim, cfg.eval_a[j], cfg.t0);
  }

  parallel_for(runs, cfg.threads, [&](std::size_t run) {
    SimConfig sim = cfg.sim;
    sim.seed = Rng::stream(cfg.sim.seed, run + 1).next_u64();
    const Dataset ds = simulate_dataset(sim);

    for (std::size_t e = 0; e < n_est; ++e) {
      const EstimatorKind kind = cfg.estimators[e];
      PipelineConfig pipe;
      pipe.weighted = kind == EstimatorKind::Weighted;
      if (pipe.weighted && cfg.sim.confounder_observed) {
        pipe.treatment_model.covariates = {"L"};
        if (cfg.sim.censoring_gamma != 0.0) {
          pipe.censoring_model.covariates = {"L"};
        }
      }
      pipe.truncate_quantile = cfg.truncate_quantile;

      const bool want_ci =
          cfg.bootstrap_replicates > 0 &&
          (!cfg.bootstrap_weighted_only || kind == EstimatorKind::Weighted);
      try {
        if (want_ci) {
          BootstrapPlan plan;
          plan.replicates = cfg.bootstrap_replicates;
          plan.seed = Rng::stream(cfg.sim.seed ^ 0xB00757ULL, run + 1).next_u64();
          plan.threads = 1;  // runs are already parallel
          for (double a : cfg.eval_a) {
            plan.functionals.push_back(mortality_functional(a, cfg.t0));
          }
          const BootstrapResult boot = bootstrap(ds, pipe, plan);
          for (std::size_t j = 0; j < n_a; ++j) {
            RunCell& cell = cells[run][e * n_a + j];
            const FunctionalSummary& s = boot.functionals[j];
            cell.estimate = s.estimate;
            cell.covered =
                (s.ci_lo <= truths[j] && truths[j] <= s.ci_hi) ? 1 : 0;
          }
        } else {
          const PipelineResult res = run_pipeline(ds, pipe);
          for (std::size_t j = 0; j < n_a; ++j) {
            cells[run][e * n_a + j].estimate =
                mortality_at(res.fit, cfg.eval_a[j], cfg.t0);
          }
        }
      } catch (const Error&) {
        for (std::size_t j = 0; j < n_a; ++j) {
          cells[run][e * n_a + j].failed = true;
        }
      }
    }
  });

  SimReport report;
  report.runs = cfg.runs;
  report.seed = cfg.sim.seed;
  for (std::size_t e = 0; e < n_est; ++e) {
    for (std::size_t j = 0; j < n_a; ++j) {
      SimReportRow row;
      row.estimator =
          cfg.estimators[e] == EstimatorKind::Weighted ? "weighted" : "unweighted";
      row.a = cfg.eval_a[j];
      row.truth = truths[j];

      std::vector<double> estimates;
      int covered = 0, with_ci = 0, failed = 0;
      for (std::size_t run = 0; run < runs; ++run) {
        const RunCell& cell = cells[run][e * n_a + j];
        if (cell.failed) {
          ++failed;
          continue;
        }
        estimates.push_back(cell.estimate);
        if (cell.covered >= 0) {
          ++with_ci;
          covered += cell.covered;
        }
      }
      row.runs_used = static_cast<int>(estimates.size());
      row.runs_failed = failed;
      if (!estimates.empty()) {
        double mean = 0.0;
        for (double v : estimates) mean += v;
        mean /= static_cast<double>(estimates.size());
        row.mean_bias = mean - row.truth;
        if (estimates.size() >= 2) {
          double ss = 0.0;
          for (double v : estimates) ss += (v - mean) * (v - mean);
          row.sd = std::sqrt(ss / static_cast<double>(estimates.size() - 1));
        }
      }
      row.coverage = with_ci > 0
                         ? static_cast<double>(covered) / static_cast<double>(with_ci)
                         : -1.0;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace itsurv
