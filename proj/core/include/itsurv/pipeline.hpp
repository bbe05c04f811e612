#pragma once

#include <optional>
#include <vector>

#include "itsurv/coxfit.hpp"
#include "itsurv/data.hpp"
#include "itsurv/structural.hpp"
#include "itsurv/survcore.hpp"
#include "itsurv/weights.hpp"

namespace itsurv {

// Full estimation pipeline: weight models -> stabilized weights ->
// structural fit. An empty covariate list for either weight model falls
// back to the null (marginal) model, whose weights are exactly one.
struct PipelineConfig {
  HazardSpec treatment_model;
  HazardSpec censoring_model;
  bool weighted = true;  // false = unit weights throughout
  std::optional<StructuralDesign> design;  // default: knots from the data
  std::optional<double> truncate_quantile;
  SolverOptions solver = structural_solver_defaults();
  SolverOptions weight_solver;
};

struct PipelineResult {
  std::optional<FittedHazardModel> treatment_model;
  MarginalLaw treatment_marginal;
  std::optional<FittedHazardModel> censoring_model;
  MarginalLaw censoring_marginal;
  WeightSet weights;
  StructuralFit fit;
};

PipelineResult run_pipeline(const Dataset& ds, const PipelineConfig& config);

// Weight trajectories for ds computed from already-fitted models (used when
// bootstrap replicates reuse the full-data weight models).
WeightSet weights_from_models(const Dataset& ds, const PipelineResult& models);

// One pipeline per stratum label; a dataset without strata yields one fit.
std::vector<PipelineResult> run_pipeline_stratified(const Dataset& ds,
                                                    const PipelineConfig& config);

}  // namespace itsurv
