#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "itsurv/coxfit.hpp"
#include "itsurv/data.hpp"
#include "itsurv/step_function.hpp"
#include "itsurv/survcore.hpp"

namespace itsurv {

// A hazard model with no regressors: unit risk score, Nelson-Aalen baseline.
// Weight ratios against the matching marginal are exactly one.
FittedHazardModel null_hazard_model(const Dataset& ds, CountingProcess process);

struct WeightFamilySummary {
  double min = 1.0;
  double max = 1.0;
  double mean = 1.0;
  std::size_t count = 0;
};

struct WeightDiagnostics {
  WeightFamilySummary w1;
  WeightFamilySummary w2;
  WeightFamilySummary wc;
};

// Stabilized inverse-probability weights per subject. w1_at_a is the
// treatment density ratio at the subject's own initiation time (NaN when
// initiation was not observed); w2 and wc are trajectories with initial
// value 1 jumping at the corresponding model's baseline event times.
struct WeightSet {
  std::vector<double> w1_at_a;
  std::vector<StepFunction> w2;
  std::vector<StepFunction> wc;
  WeightDiagnostics diagnostics;

  std::size_t size() const { return w1_at_a.size(); }

  static WeightSet unit(std::size_t n);

  // W^C(t) * { I(A < t) W1(A) + I(A >= t) W2(t) }: the Y** multiplier and,
  // at the subject's own death time, the estimating-equation event weight.
  double structural_weight(const SubjectRecord& s, std::size_t i, double t) const;
};

struct TreatmentWeights {
  std::vector<double> w1_at_a;
  std::vector<StepFunction> w2;
};

TreatmentWeights estimate_treatment_weights(const Dataset& ds,
                                            const FittedHazardModel& treatment_model,
                                            const MarginalLaw& marginal);

std::vector<StepFunction> estimate_censoring_weights(const Dataset& ds,
                                                     const FittedHazardModel& censoring_model,
                                                     const MarginalLaw& marginal);

WeightSet assemble_weights(TreatmentWeights treatment, std::vector<StepFunction> censoring);

// Caps each weight family at the empirical quantile of its observed values
// (smallest value with cdf >= quantile); absent quantile is the identity.
WeightSet truncate_weights(const WeightSet& ws, std::optional<double> quantile);

}  // namespace itsurv
