#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "itsurv/data.hpp"
#include "itsurv/step_function.hpp"
#include "itsurv/survcore.hpp"

namespace itsurv {

// Generic weighted partial-likelihood problem over counting-process data.
// Covariates and observation weights may vary with time; the solver only
// evaluates them at event times. Risk sets are closed at the exit time and
// events precede censorings in the tie convention.
struct PartialLikelihoodProblem {
  int dim = 0;
  std::size_t n_subjects = 0;
  std::vector<std::string> labels;  // one per column, used in error messages
  std::function<double(std::size_t)> exit_time;
  std::function<bool(std::size_t)> is_event;
  std::function<void(std::size_t, double, double*)> covariate_row;
  std::function<double(std::size_t, double)> weight;  // empty = unit weights
};

struct SolverOptions {
  double tolerance = 1e-8;        // max-norm of the score
  int max_iterations = 25;
  int extra_damped_iterations = 0;  // half-step fallback rounds after max
  double separation_bound = 15.0;
  std::optional<Eigen::VectorXd> start;  // warm start; default 0
  std::size_t row_cache_budget = 24u * 1000u * 1000u;  // doubles
};

struct ScoreEvaluation {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;  // negative Jacobian of the score
};

struct FitDiagnostics {
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double score_norm = 0.0;
};

// Precomputed risk-set structure; reusable across evaluations at different
// coefficient values. Covariate rows at (subject, event time) pairs are
// cached when they fit the budget and recomputed on the fly otherwise.
class PartialLikelihood {
 public:
  explicit PartialLikelihood(const PartialLikelihoodProblem& problem,
                             std::size_t row_cache_budget = 24u * 1000u * 1000u);

  int dim() const { return dim_; }
  std::size_t n_events() const { return n_events_; }
  std::size_t n_event_times() const { return groups_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  ScoreEvaluation evaluate(const Eigen::VectorXd& beta) const;
  // Weighted Breslow baseline: jump at u of (sum of event weights at u) /
  // (weighted risk-set sum of exp(x'beta)).
  StepFunction breslow(const Eigen::VectorXd& beta) const;

 private:
  struct EventGroup {
    double time = 0.0;
    std::size_t risk_begin = 0;   // suffix of order_ at risk
    std::size_t pair_offset = 0;  // into weight/row caches
    double weight_sum = 0.0;      // sum of event weights
    Eigen::VectorXd wx_sum;       // sum of weight * covariate row over events
  };

  void risk_statistics(const EventGroup& g, const Eigen::VectorXd& beta,
                       double* s0, double* s1, double* s2_upper) const;

  int dim_ = 0;
  std::size_t n_ = 0;
  std::size_t n_events_ = 0;
  std::vector<std::string> labels_;
  std::vector<std::size_t> order_;     // subjects sorted by exit time
  std::vector<double> sorted_exit_;
  std::vector<EventGroup> groups_;
  std::vector<double> pair_weight_;    // per (group, at-risk subject)
  std::vector<double> pair_rows_;      // cached rows, empty in lazy mode
  bool rows_cached_ = false;
  std::function<void(std::size_t, double, double*)> covariate_row_;
};

struct PartialLikelihoodFit {
  Eigen::VectorXd beta;
  StepFunction baseline;
  FitDiagnostics diagnostics;
};

PartialLikelihoodFit solve_partial_likelihood(const PartialLikelihoodProblem& problem,
                                              const SolverOptions& options = {});

// Feature specification for the treatment / censoring hazard models:
// named covariate columns, optionally the treatment-history indicator
// N^A(t-) = I(A < t, initiation observed).
struct HazardSpec {
  std::vector<std::string> covariates;
  bool include_treatment_history = false;

  int dim() const {
    return static_cast<int>(covariates.size()) + (include_treatment_history ? 1 : 0);
  }
  std::vector<std::string> column_labels() const;
};

struct FittedHazardModel {
  HazardSpec spec;
  std::vector<std::size_t> covariate_indices;  // resolved dataset columns
  std::vector<std::string> coefficient_names;
  Eigen::VectorXd coefficients;
  StepFunction baseline_cumhaz;
  FitDiagnostics diagnostics;

  // exp(alpha' x(subject, t)) with x evaluated from the covariate path.
  double risk_score(const SubjectRecord& subject, double t) const;
};

FittedHazardModel fit_cox(const Dataset& ds, const HazardSpec& spec,
                          CountingProcess process,
                          const std::vector<StepFunction>* weights = nullptr,
                          const SolverOptions& options = {});

// Log partial likelihood, score and information at beta; exposed for
// derivative checks.
ScoreEvaluation evaluate_cox_score(const Dataset& ds, const HazardSpec& spec,
                                   CountingProcess process,
                                   const std::vector<StepFunction>* weights,
                                   const Eigen::VectorXd& beta);

// exp(-integral of risk_score d Lambda_0) over (0, t].
double conditional_survival(const FittedHazardModel& model,
                            const SubjectRecord& subject, double t);

// risk_score(u) * dLambda_0(u) * conditional survival at u-.
double conditional_density_mass(const FittedHazardModel& model,
                                const SubjectRecord& subject, double u);

}  // namespace itsurv
