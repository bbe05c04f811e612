#include "itsurv/coxfit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "itsurv/errors.hpp"

namespace itsurv {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

// Columns loading on a near-null eigenvector of the information matrix.
std::vector<std::string> aliased_columns(const Eigen::MatrixXd& info,
                                         const std::vector<std::string>& labels) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  std::vector<std::string> cols;
  for (int k = 0; k < info.rows(); ++k) {
    if (es.eigenvalues()[k] > 1e-10 * scale) continue;
    const Eigen::VectorXd v = es.eigenvectors().col(k);
    for (int j = 0; j < v.size(); ++j) {
      if (std::abs(v[j]) > 0.1) {
        std::string name = j < static_cast<int>(labels.size())
                               ? labels[j]
                               : "column " + std::to_string(j);
        if (std::find(cols.begin(), cols.end(), name) == cols.end()) {
          cols.push_back(name);
        }
      }
    }
  }
  return cols;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out += ", ";
    out += parts[k];
  }
  return out;
}

}  // namespace

PartialLikelihood::PartialLikelihood(const PartialLikelihoodProblem& problem,
                                     std::size_t row_cache_budget)
    : dim_(problem.dim),
      n_(problem.n_subjects),
      labels_(problem.labels),
      covariate_row_(problem.covariate_row) {
  if (dim_ <= 0) throw ConfigError("partial likelihood: dimension must be positive");
  if (n_ == 0) throw ConfigError("partial likelihood: no subjects");

  order_.resize(n_);
  std::iota(order_.begin(), order_.end(), 0);
  std::vector<double> exits(n_);
  std::vector<char> events(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    exits[i] = problem.exit_time(i);
    events[i] = problem.is_event(i) ? 1 : 0;
    if (!std::isfinite(exits[i]) || exits[i] < 0.0) {
      throw ConfigError("partial likelihood: invalid exit time");
    }
  }
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (exits[a] != exits[b]) return exits[a] < exits[b];
                     return events[a] > events[b];
                   });
  sorted_exit_.resize(n_);
  for (std::size_t j = 0; j < n_; ++j) sorted_exit_[j] = exits[order_[j]];

  // Distinct event times, ascending.
  std::vector<double> utimes;
  for (std::size_t j = 0; j < n_; ++j) {
    if (events[order_[j]] && (utimes.empty() || utimes.back() != sorted_exit_[j])) {
      if (!utimes.empty() && sorted_exit_[j] < utimes.back()) continue;
      utimes.push_back(sorted_exit_[j]);
    }
  }
  if (utimes.empty()) throw Error("partial likelihood: no events");

  const bool unit_weights = !problem.weight;
  std::vector<double> row(dim_);

  std::size_t total_pairs = 0;
  groups_.reserve(utimes.size());
  for (double u : utimes) {
    EventGroup g;
    g.time = u;
    g.risk_begin = static_cast<std::size_t>(
        std::lower_bound(sorted_exit_.begin(), sorted_exit_.end(), u) -
        sorted_exit_.begin());
    g.pair_offset = total_pairs;
    total_pairs += n_ - g.risk_begin;
    groups_.push_back(std::move(g));
  }
  pair_weight_.resize(total_pairs);
  rows_cached_ = total_pairs * static_cast<std::size_t>(dim_) <= row_cache_budget;
  if (rows_cached_) pair_rows_.resize(total_pairs * static_cast<std::size_t>(dim_));

  for (auto& g : groups_) {
    g.wx_sum = Eigen::VectorXd::Zero(dim_);
    std::size_t p = g.pair_offset;
    for (std::size_t j = g.risk_begin; j < n_; ++j, ++p) {
      const std::size_t subj = order_[j];
      const double w = unit_weights ? 1.0 : problem.weight(subj, g.time);
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw PositivityError("nonpositive observation weight for subject index " +
                              std::to_string(subj) + " at time " +
                              std::to_string(g.time));
      }
      pair_weight_[p] = w;
      double* dst = rows_cached_ ? &pair_rows_[p * dim_] : row.data();
      covariate_row_(subj, g.time, dst);
      if (events[subj] && sorted_exit_[j] == g.time) {
        ++n_events_;
        g.weight_sum += w;
        for (int a = 0; a < dim_; ++a) g.wx_sum[a] += w * dst[a];
      }
    }
  }
}

void PartialLikelihood::risk_statistics(const EventGroup& g,
                                        const Eigen::VectorXd& beta,
                                        double* s0, double* s1,
                                        double* s2_upper) const {
  const int d = dim_;
  *s0 = 0.0;
  std::fill(s1, s1 + d, 0.0);
  if (s2_upper) std::fill(s2_upper, s2_upper + d * d, 0.0);
  std::vector<double> buf;
  if (!rows_cached_) buf.resize(d);
  std::size_t p = g.pair_offset;
  for (std::size_t j = g.risk_begin; j < n_; ++j, ++p) {
    const double* x;
    if (rows_cached_) {
      x = &pair_rows_[p * d];
    } else {
      covariate_row_(order_[j], g.time, buf.data());
      x = buf.data();
    }
    double xb = 0.0;
    for (int a = 0; a < d; ++a) xb += x[a] * beta[a];
    const double e = pair_weight_[p] * std::exp(xb);
    *s0 += e;
    for (int a = 0; a < d; ++a) s1[a] += e * x[a];
    if (s2_upper) {
      for (int a = 0; a < d; ++a) {
        const double ex = e * x[a];
        double* rowp = s2_upper + a * d;
        for (int b = a; b < d; ++b) rowp[b] += ex * x[b];
      }
    }
  }
}

ScoreEvaluation PartialLikelihood::evaluate(const Eigen::VectorXd& beta) const {
  const int d = dim_;
  ScoreEvaluation ev;
  ev.score = Eigen::VectorXd::Zero(d);
  ev.information = Eigen::MatrixXd::Zero(d, d);
  std::vector<double> s1(d), s2(static_cast<std::size_t>(d) * d);
  for (const auto& g : groups_) {
    double s0 = 0.0;
    risk_statistics(g, beta, &s0, s1.data(), s2.data());
    if (!(s0 > 0.0)) {
      throw PositivityError("positivity: empty weighted risk set at time " +
                            std::to_string(g.time));
    }
    ev.loglik += g.wx_sum.dot(beta) - g.weight_sum * std::log(s0);
    for (int a = 0; a < d; ++a) {
      const double xbar_a = s1[a] / s0;
      ev.score[a] += g.wx_sum[a] - g.weight_sum * xbar_a;
      for (int b = a; b < d; ++b) {
        ev.information(a, b) +=
            g.weight_sum * (s2[a * d + b] / s0 - xbar_a * (s1[b] / s0));
      }
    }
  }
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) ev.information(b, a) = ev.information(a, b);
  }
  return ev;
}

StepFunction PartialLikelihood::breslow(const Eigen::VectorXd& beta) const {
  std::vector<double> times, masses;
  times.reserve(groups_.size());
  masses.reserve(groups_.size());
  std::vector<double> s1(dim_);
  for (const auto& g : groups_) {
    double s0 = 0.0;
    risk_statistics(g, beta, &s0, s1.data(), nullptr);
    if (!(s0 > 0.0)) {
      throw PositivityError("positivity: empty weighted risk set at time " +
                            std::to_string(g.time));
    }
    times.push_back(g.time);
    masses.push_back(g.weight_sum / s0);
  }
  return StepFunction::from_jumps(std::move(times), std::move(masses));
}

PartialLikelihoodFit solve_partial_likelihood(const PartialLikelihoodProblem& problem,
                                              const SolverOptions& options) {
  PartialLikelihood pl(problem, options.row_cache_budget);
  const int d = pl.dim();
  Eigen::VectorXd beta =
      options.start ? *options.start : Eigen::VectorXd::Zero(d);
  if (beta.size() != d) throw ConfigError("solver start has wrong dimension");

  ScoreEvaluation ev = pl.evaluate(beta);
  const int total_iterations =
      options.max_iterations + options.extra_damped_iterations;
  int iter = 0;
  for (;; ++iter) {
    const double score_norm = ev.score.lpNorm<Eigen::Infinity>();
    if (score_norm < options.tolerance) {
      PartialLikelihoodFit fit;
      fit.beta = beta;
      fit.baseline = pl.breslow(beta);
      fit.diagnostics = {ev.loglik, iter, true, score_norm};
      return fit;
    }
    if (iter >= total_iterations) {
      throw ConvergenceError(
          "partial likelihood did not converge after " +
              std::to_string(total_iterations) + " iterations (score max-norm " +
              std::to_string(score_norm) + ")",
          to_std(beta), score_norm);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(ev.information);
    const Eigen::VectorXd diag = ldlt.vectorD();
    const double dmax = diag.maxCoeff();
    if (ldlt.info() != Eigen::Success || !(dmax > 0.0) ||
        diag.minCoeff() <= 1e-12 * dmax) {
      auto cols = aliased_columns(ev.information, pl.labels());
      throw SingularModelError(
          "unidentifiable covariate (singular information); aliased columns: " +
              join(cols),
          cols);
    }
    const Eigen::VectorXd delta = ldlt.solve(ev.score);

    double step = iter >= options.max_iterations ? 0.5 : 1.0;
    bool accepted = false;
    Eigen::VectorXd cand;
    ScoreEvaluation ev_cand;
    for (int h = 0; h < 40; ++h) {
      cand = beta + step * delta;
      ev_cand = pl.evaluate(cand);
      if (std::isfinite(ev_cand.loglik) &&
          ev_cand.loglik >= ev.loglik - 1e-10 * (1.0 + std::abs(ev.loglik))) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      throw ConvergenceError(
          "partial likelihood step-halving exhausted (score max-norm " +
              std::to_string(ev.score.lpNorm<Eigen::Infinity>()) + ")",
          to_std(beta), ev.score.lpNorm<Eigen::Infinity>());
    }
    beta = cand;
    ev = ev_cand;
    if (beta.lpNorm<Eigen::Infinity>() > options.separation_bound) {
      throw SeparationError(
          "separation detected: coefficient magnitude exceeded " +
          std::to_string(options.separation_bound));
    }
  }
}

std::vector<std::string> HazardSpec::column_labels() const {
  std::vector<std::string> labels = covariates;
  if (include_treatment_history) labels.push_back("on_treatment");
  return labels;
}

namespace {

// Fills the feature row for a hazard model: covariate values in effect at t
// plus, optionally, the treatment-history indicator I(A < t).
struct FeatureEval {
  std::vector<std::size_t> indices;
  bool treatment_history = false;

  void operator()(const SubjectRecord& s, double t, double* out) const {
    if (!indices.empty()) {
      const std::vector<double>& values = s.covariates.values_at(t);
      for (std::size_t k = 0; k < indices.size(); ++k) out[k] = values[indices[k]];
    }
    if (treatment_history) {
      out[indices.size()] = (s.delta_a && s.a_star < t) ? 1.0 : 0.0;
    }
  }
};

}  // namespace

namespace {

PartialLikelihoodProblem make_cox_problem(const Dataset& ds, const HazardSpec& spec,
                                          CountingProcess process,
                                          const std::vector<StepFunction>* weights,
                                          FeatureEval* eval_out) {
  if (spec.dim() == 0) {
    throw ConfigError("fit_cox: model has no regressors; use process_marginal instead");
  }
  if (weights && weights->size() != ds.size()) {
    throw ConfigError("fit_cox: weight vector size mismatch");
  }
  FeatureEval eval;
  eval.treatment_history = spec.include_treatment_history;
  for (const auto& name : spec.covariates) {
    eval.indices.push_back(ds.covariate_index(name));
  }
  if (eval_out) *eval_out = eval;

  const std::vector<SubjectRecord>* subjects = &ds.subjects;
  const double t_max = ds.t_max;
  PartialLikelihoodProblem problem;
  problem.dim = spec.dim();
  problem.n_subjects = ds.size();
  problem.labels = spec.column_labels();
  problem.exit_time = [subjects, process, t_max](std::size_t i) {
    return process_point((*subjects)[i], process, t_max).exit;
  };
  problem.is_event = [subjects, process, t_max](std::size_t i) {
    return process_point((*subjects)[i], process, t_max).event;
  };
  problem.covariate_row = [subjects, eval](std::size_t i, double t, double* out) {
    eval((*subjects)[i], t, out);
  };
  if (weights) {
    problem.weight = [weights](std::size_t i, double t) {
      return (*weights)[i].value(t);
    };
  }
  return problem;
}

}  // namespace

FittedHazardModel fit_cox(const Dataset& ds, const HazardSpec& spec,
                          CountingProcess process,
                          const std::vector<StepFunction>* weights,
                          const SolverOptions& options) {
  FeatureEval eval;
  const PartialLikelihoodProblem problem =
      make_cox_problem(ds, spec, process, weights, &eval);
  PartialLikelihoodFit raw = solve_partial_likelihood(problem, options);

  FittedHazardModel model;
  model.spec = spec;
  model.covariate_indices = eval.indices;
  model.coefficient_names = spec.column_labels();
  model.coefficients = std::move(raw.beta);
  model.baseline_cumhaz = std::move(raw.baseline);
  model.diagnostics = raw.diagnostics;
  return model;
}

ScoreEvaluation evaluate_cox_score(const Dataset& ds, const HazardSpec& spec,
                                   CountingProcess process,
                                   const std::vector<StepFunction>* weights,
                                   const Eigen::VectorXd& beta) {
  const PartialLikelihoodProblem problem =
      make_cox_problem(ds, spec, process, weights, nullptr);
  PartialLikelihood pl(problem);
  return pl.evaluate(beta);
}

double FittedHazardModel::risk_score(const SubjectRecord& subject, double t) const {
  double xb = 0.0;
  if (!covariate_indices.empty()) {
    const std::vector<double>& values = subject.covariates.values_at(t);
    for (std::size_t k = 0; k < covariate_indices.size(); ++k) {
      xb += coefficients[static_cast<int>(k)] * values[covariate_indices[k]];
    }
  }
  if (spec.include_treatment_history) {
    const double ind = (subject.delta_a && subject.a_star < t) ? 1.0 : 0.0;
    xb += coefficients[coefficients.size() - 1] * ind;
  }
  return std::exp(xb);
}

double conditional_survival(const FittedHazardModel& model,
                            const SubjectRecord& subject, double t) {
  if (t > subject.covariates.end_time()) {
    throw Error("covariate path exhausted");
  }
  const StepFunction& base = model.baseline_cumhaz;
  double lambda = 0.0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    const double u = base.times()[k];
    if (u > t) break;
    lambda += model.risk_score(subject, u) * base.masses()[k];
  }
  return std::exp(-lambda);
}

double conditional_density_mass(const FittedHazardModel& model,
                                const SubjectRecord& subject, double u) {
  const StepFunction& base = model.baseline_cumhaz;
  const std::size_t idx = base.jump_index(u);
  if (idx == StepFunction::npos) {
    throw Error("conditional density requested at a non-jump time");
  }
  double lambda_before = 0.0;
  for (std::size_t k = 0; k < idx; ++k) {
    lambda_before += model.risk_score(subject, base.times()[k]) * base.masses()[k];
  }
  return model.risk_score(subject, u) * base.masses()[idx] *
         std::exp(-lambda_before);
}

}  // namespace itsurv
