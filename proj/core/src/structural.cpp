#include "itsurv/structural.hpp"

#include <algorithm>
#include <cmath>

#include "itsurv/errors.hpp"

namespace itsurv {

StructuralDesign::StructuralDesign(SplineBasis basis1, SplineBasis basis2,
                                   SplineBasis basis3)
    : basis1_(std::move(basis1)),
      basis2_(std::move(basis2)),
      basis3_(std::move(basis3)) {
  dim_ = basis1_.dim() + basis2_.dim() + basis3_.dim();
}

void StructuralDesign::row(double a, double t, double* out) const {
  if (!(a < t)) {
    std::fill(out, out + dim_, 0.0);
    return;
  }
  const double d = t - a;
  basis1_.evaluate(a, out);
  basis2_.evaluate(d, out + basis1_.dim());
  basis3_.evaluate(a * d, out + basis1_.dim() + basis2_.dim());
}

Eigen::VectorXd StructuralDesign::row(double a, double t) const {
  Eigen::VectorXd v(dim_);
  row(a, t, v.data());
  return v;
}

std::vector<std::string> StructuralDesign::labels() const {
  std::vector<std::string> out;
  for (int block = 1; block <= 3; ++block) {
    const int k = block == 1 ? basis1_.dim() : block == 2 ? basis2_.dim() : basis3_.dim();
    for (int j = 0; j < k; ++j) {
      out.push_back("g" + std::to_string(block) + "[" + std::to_string(j) + "]");
    }
  }
  return out;
}

Eigen::VectorXd design_row(const StructuralDesign& design, double a, double t) {
  return design.row(a, t);
}

StructuralDesign design_from_data(const Dataset& ds) {
  std::vector<double> a_values, d_values, p_values;
  for (const auto& s : ds.subjects) {
    if (s.delta_a) a_values.push_back(s.a_star);
    if (s.delta_a && s.delta_t) {
      const double d = s.t_star - s.a_star;
      d_values.push_back(d);
      p_values.push_back(s.a_star * d);
    }
  }
  const KnotSelection k1 = select_knots(a_values);
  const KnotSelection k2 = select_knots(d_values);
  const KnotSelection k3 = select_knots(p_values);
  return StructuralDesign(SplineBasis(k1.interior, k1.boundary),
                          SplineBasis(k2.interior, k2.boundary),
                          SplineBasis(k3.interior, k3.boundary));
}

Eigen::VectorXd StructuralFit::beta_block(int which) const {
  const int k1 = design.basis1().dim();
  const int k2 = design.basis2().dim();
  const int k3 = design.basis3().dim();
  switch (which) {
    case 1: return beta.segment(0, k1);
    case 2: return beta.segment(k1, k2);
    case 3: return beta.segment(k1 + k2, k3);
    default: throw ConfigError("beta_block: block must be 1, 2 or 3");
  }
}

SolverOptions structural_solver_defaults() {
  SolverOptions opts;
  opts.tolerance = 1e-8;
  opts.max_iterations = 25;
  opts.extra_damped_iterations = 10;
  return opts;
}

namespace {

PartialLikelihoodProblem structural_problem(const Dataset& ds,
                                            const StructuralDesign& design,
                                            const WeightSet& ws) {
  if (ws.size() != ds.size()) {
    throw ConfigError("fit_structural: weight set size mismatch");
  }
  PartialLikelihoodProblem problem;
  problem.dim = design.dim();
  problem.n_subjects = ds.size();
  problem.labels = design.labels();
  problem.exit_time = [&ds](std::size_t i) { return ds.subjects[i].t_star; };
  problem.is_event = [&ds](std::size_t i) { return ds.subjects[i].delta_t; };
  problem.covariate_row = [&ds, &design](std::size_t i, double t, double* out) {
    design.row(ds.subjects[i].initiation_or_inf(), t, out);
  };
  problem.weight = [&ds, &ws](std::size_t i, double t) {
    return ws.structural_weight(ds.subjects[i], i, t);
  };
  return problem;
}

}  // namespace

StructuralFit fit_structural(const Dataset& ds, const StructuralDesign& design,
                             const WeightSet& ws, const SolverOptions& options) {
  const bool any_death =
      std::any_of(ds.subjects.begin(), ds.subjects.end(),
                  [](const SubjectRecord& s) { return s.delta_t; });
  if (!any_death) throw Error("fit_structural: no deaths in dataset");

  const PartialLikelihoodProblem problem = structural_problem(ds, design, ws);
  const PartialLikelihoodFit raw = solve_partial_likelihood(problem, options);

  StructuralFit fit{raw.beta, design, raw.baseline, std::nullopt,
                    raw.diagnostics, ds.t_max};
  return fit;
}

StepFunction breslow_baseline(const Dataset& ds, const StructuralDesign& design,
                              const WeightSet& ws, const Eigen::VectorXd& beta) {
  const PartialLikelihoodProblem problem = structural_problem(ds, design, ws);
  PartialLikelihood pl(problem);
  return pl.breslow(beta);
}

ScoreEvaluation evaluate_structural_score(const Dataset& ds,
                                          const StructuralDesign& design,
                                          const WeightSet& ws,
                                          const Eigen::VectorXd& beta) {
  const PartialLikelihoodProblem problem = structural_problem(ds, design, ws);
  PartialLikelihood pl(problem);
  return pl.evaluate(beta);
}

}  // namespace itsurv
