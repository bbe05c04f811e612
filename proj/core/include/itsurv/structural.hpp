#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "itsurv/coxfit.hpp"
#include "itsurv/data.hpp"
#include "itsurv/splines.hpp"
#include "itsurv/step_function.hpp"
#include "itsurv/weights.hpp"

namespace itsurv {

// Design matrix X(a,t) of the structural hazard-ratio model: the stacked
// natural-spline evaluations [b1(a), b2(t-a), b3(a(t-a))] gated by I(a < t).
class StructuralDesign {
 public:
  StructuralDesign() : StructuralDesign(SplineBasis(), SplineBasis(), SplineBasis()) {}
  StructuralDesign(SplineBasis basis1, SplineBasis basis2, SplineBasis basis3);

  int dim() const { return dim_; }
  const SplineBasis& basis1() const { return basis1_; }
  const SplineBasis& basis2() const { return basis2_; }
  const SplineBasis& basis3() const { return basis3_; }

  // Writes the K-vector X(a,t); zero when a >= t (including the +inf
  // sentinel for never-initiated subjects).
  void row(double a, double t, double* out) const;
  Eigen::VectorXd row(double a, double t) const;

  // g1[0..K1), g2[...), g3[...) column labels.
  std::vector<std::string> labels() const;

 private:
  SplineBasis basis1_, basis2_, basis3_;
  int dim_ = 0;
};

Eigen::VectorXd design_row(const StructuralDesign& design, double a, double t);

// Knot placement from the data: g1 over uncensored A*, g2 over T*-A* and
// g3 over A*(T*-A*) among subjects with both events observed (pattern I).
StructuralDesign design_from_data(const Dataset& ds);

struct StructuralFit {
  Eigen::VectorXd beta;
  StructuralDesign design;
  StepFunction baseline;  // weighted Breslow cumulative hazard
  std::optional<std::string> stratum;
  FitDiagnostics diagnostics;
  double t_max = 0.0;

  Eigen::VectorXd beta_block(int which) const;  // 1, 2, or 3
};

// Solves the weighted estimating equation: each death contributes its
// structural weight times {X(A_i, t) - weighted risk-set average}, with
// risk-set indicators multiplied by W^C(t) { I(A<t) W1(A) + I(A>=t) W2(t) }.
StructuralFit fit_structural(const Dataset& ds, const StructuralDesign& design,
                             const WeightSet& ws, const SolverOptions& options = {});

StepFunction breslow_baseline(const Dataset& ds, const StructuralDesign& design,
                              const WeightSet& ws, const Eigen::VectorXd& beta);

// Estimating function U_n(beta) and its negative Jacobian; exposed for
// derivative checks and diagnostics.
ScoreEvaluation evaluate_structural_score(const Dataset& ds,
                                          const StructuralDesign& design,
                                          const WeightSet& ws,
                                          const Eigen::VectorXd& beta);

SolverOptions structural_solver_defaults();

}  // namespace itsurv
