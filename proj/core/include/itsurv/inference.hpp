#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "itsurv/causal.hpp"
#include "itsurv/pipeline.hpp"

namespace itsurv {

struct Functional {
  std::string name;
  std::function<double(const StructuralFit&)> eval;
};

Functional mortality_functional(double a, double t0);
Functional contrast_difference_functional(double a, double a_prime, double t0);
Functional interval_mortality_functional(double t1, double t2, double t0,
                                         int grid_points = 64,
                                         bool normalized = true);

struct BootstrapPlan {
  int replicates = 1000;
  std::uint64_t seed = 0;
  std::vector<Functional> functionals;
  bool refit_weights = true;  // refit the weight models inside each replicate
  int threads = 0;            // 0 = ITSURV_THREADS or hardware default
};

struct FunctionalSummary {
  std::string name;
  double estimate = 0.0;              // full-data point estimate
  std::optional<double> se;           // absent when replicates == 1
  double ci_lo = 0.0, ci_hi = 0.0;    // percentile 2.5 / 97.5
  int replicate_failures = 0;
};

struct BootstrapResult {
  std::vector<FunctionalSummary> functionals;
  int replicates = 0;
};

// Resamples subjects with replacement (whole paths), reruns the pipeline per
// replicate, and summarizes each functional. Spline knots are frozen at
// their full-data placement so coefficients stay comparable across
// replicates. Failed replicates (non-convergence, positivity) are dropped
// and counted; more than 10% failures aborts.
BootstrapResult bootstrap(const Dataset& ds, const PipelineConfig& config,
                          const BootstrapPlan& plan);

}  // namespace itsurv
