#include "itsurv/inference.hpp"

#include <algorithm>
#include <cmath>

#include "itsurv/errors.hpp"
#include "itsurv/parallel.hpp"
#include "itsurv/rng.hpp"
#include "itsurv/splines.hpp"

namespace itsurv {

Functional mortality_functional(double a, double t0) {
  const std::string name = std::isinf(a)
                               ? "mortality(a=inf,t0=" + std::to_string(t0) + ")"
                               : "mortality(a=" + std::to_string(a) +
                                     ",t0=" + std::to_string(t0) + ")";
  return {name, [a, t0](const StructuralFit& fit) {
            return mortality_at(fit, a, t0);
          }};
}

Functional contrast_difference_functional(double a, double a_prime, double t0) {
  return {"contrast(a=" + std::to_string(a) + ",a'=" + std::to_string(a_prime) +
              ",t0=" + std::to_string(t0) + ")",
          [a, a_prime, t0](const StructuralFit& fit) {
            return contrast(fit, a, a_prime, t0).difference;
          }};
}

Functional interval_mortality_functional(double t1, double t2, double t0,
                                         int grid_points, bool normalized) {
  return {"interval_mortality([" + std::to_string(t1) + "," +
              std::to_string(t2) + "),t0=" + std::to_string(t0) + ")",
          [t1, t2, t0, grid_points, normalized](const StructuralFit& fit) {
            return interval_mortality(fit, t1, t2, t0, grid_points, normalized);
          }};
}

namespace {

Dataset resample(const Dataset& ds, Rng& rng) {
  Dataset out;
  out.t_max = ds.t_max;
  out.covariate_names = ds.covariate_names;
  const std::size_t n = ds.size();
  out.subjects.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.subjects.push_back(ds.subjects[rng.uniform_index(n)]);
  }
  return out;
}

}  // namespace

BootstrapResult bootstrap(const Dataset& ds, const PipelineConfig& config,
                          const BootstrapPlan& plan) {
  if (plan.replicates < 1) throw ConfigError("bootstrap: replicates must be >= 1");
  if (plan.functionals.empty()) throw ConfigError("bootstrap: no functionals");

  PipelineResult full = run_pipeline(ds, config);

  // Freeze the knot placement and warm-start replicates at the full-data
  // solution.
  PipelineConfig replicate_config = config;
  replicate_config.design = full.fit.design;
  replicate_config.solver.start = full.fit.beta;

  const std::size_t n_fn = plan.functionals.size();
  const std::size_t reps = static_cast<std::size_t>(plan.replicates);
  std::vector<std::vector<double>> values(reps);
  std::vector<char> failed(reps, 0);

  parallel_for(reps, plan.threads, [&](std::size_t rep) {
    Rng rng = Rng::stream(plan.seed, rep + 1);
    Dataset sample = resample(ds, rng);
    try {
      StructuralFit fit;
      if (plan.refit_weights) {
        fit = run_pipeline(sample, replicate_config).fit;
      } else {
        WeightSet ws = config.weighted ? weights_from_models(sample, full)
                                       : WeightSet::unit(sample.size());
        if (config.truncate_quantile) {
          ws = truncate_weights(ws, config.truncate_quantile);
        }
        fit = fit_structural(sample, *replicate_config.design, ws,
                             replicate_config.solver);
      }
      std::vector<double> row(n_fn);
      for (std::size_t f = 0; f < n_fn; ++f) {
        row[f] = plan.functionals[f].eval(fit);
      }
      values[rep] = std::move(row);
    } catch (const Error&) {
      failed[rep] = 1;
    }
  });

  int n_failed = 0;
  for (char f : failed) n_failed += f;
  if (10 * n_failed > plan.replicates) {
    throw Error("bootstrap unstable: " + std::to_string(n_failed) + " of " +
                std::to_string(plan.replicates) + " replicates failed");
  }

  BootstrapResult result;
  result.replicates = plan.replicates;
  for (std::size_t f = 0; f < n_fn; ++f) {
    FunctionalSummary summary;
    summary.name = plan.functionals[f].name;
    summary.estimate = plan.functionals[f].eval(full.fit);
    summary.replicate_failures = n_failed;

    std::vector<double> draws;
    draws.reserve(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      if (!failed[rep]) draws.push_back(values[rep][f]);
    }
    if (draws.empty()) throw Error("bootstrap: all replicates failed");
    if (draws.size() >= 2) {
      double mean = 0.0;
      for (double v : draws) mean += v;
      mean /= static_cast<double>(draws.size());
      double ss = 0.0;
      for (double v : draws) ss += (v - mean) * (v - mean);
      summary.se = std::sqrt(ss / static_cast<double>(draws.size() - 1));
    }
    summary.ci_lo = quantile(draws, 0.025);
    summary.ci_hi = quantile(draws, 0.975);
    result.functionals.push_back(std::move(summary));
  }
  return result;
}

}  // namespace itsurv
