#include "itsurv/causal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "itsurv/errors.hpp"

namespace itsurv {

namespace {

void check_regime(const StructuralFit& fit, double a) {
  if (std::isnan(a) || a < 0.0) {
    throw ConfigError("initiation time must be nonnegative (or +inf)");
  }
  if (std::isfinite(a) && a > fit.t_max) {
    throw ConfigError("initiation time exceeds the administrative horizon");
  }
}

// Baseline increment at jump k under regime a: the raw mass before
// initiation, the hazard-ratio-scaled mass after.
double regime_mass(const StructuralFit& fit, double a, std::size_t k,
                   std::vector<double>& rowbuf) {
  const double u = fit.baseline.times()[k];
  const double mass = fit.baseline.masses()[k];
  if (!(a < u)) return mass;
  fit.design.row(a, u, rowbuf.data());
  double xb = 0.0;
  for (int j = 0; j < fit.design.dim(); ++j) xb += rowbuf[j] * fit.beta[j];
  return std::exp(xb) * mass;
}

}  // namespace

double cumulative_hazard(const StructuralFit& fit, double a, double t) {
  check_regime(fit, a);
  std::vector<double> rowbuf(fit.design.dim());
  double lambda = 0.0;
  for (std::size_t k = 0; k < fit.baseline.size(); ++k) {
    if (fit.baseline.times()[k] > t) break;
    lambda += regime_mass(fit, a, k, rowbuf);
  }
  return lambda;
}

double survival_probability(const StructuralFit& fit, double a, double t) {
  return std::exp(-cumulative_hazard(fit, a, t));
}

SurvivalCurve survival_curve(const StructuralFit& fit, double a) {
  std::vector<double> grid;
  for (double t = 0.0; t < fit.t_max; t += 0.5) grid.push_back(t);
  grid.push_back(fit.t_max);
  return survival_curve(fit, a, grid);
}

SurvivalCurve survival_curve(const StructuralFit& fit, double a,
                             const std::vector<double>& grid) {
  check_regime(fit, a);
  if (grid.empty()) throw ConfigError("survival_curve: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw ConfigError("survival_curve: grid must be sorted");
  }
  SurvivalCurve curve;
  curve.a = a;
  curve.grid = grid;
  curve.survival.reserve(grid.size());
  std::vector<double> rowbuf(fit.design.dim());
  double lambda = 0.0;
  std::size_t k = 0;
  for (double t : grid) {
    while (k < fit.baseline.size() && fit.baseline.times()[k] <= t) {
      lambda += regime_mass(fit, a, k, rowbuf);
      ++k;
    }
    curve.survival.push_back(std::exp(-lambda));
  }
  for (std::size_t j = 1; j < curve.survival.size(); ++j) {
    if (curve.survival[j] > curve.survival[j - 1]) {
      throw Error("survival curve is not nonincreasing; negative baseline mass?");
    }
  }
  return curve;
}

double mortality_at(const StructuralFit& fit, double a, double t0) {
  return 1.0 - survival_probability(fit, a, t0);
}

MortalityContrast contrast(const StructuralFit& fit, double a, double a_prime,
                           double t0) {
  if (a == a_prime) {
    throw ConfigError("contrast requires two distinct initiation times");
  }
  const double s_a = survival_probability(fit, a, t0);
  const double s_ap = survival_probability(fit, a_prime, t0);
  return {(1.0 - s_a) - (1.0 - s_ap), s_a / s_ap};
}

double interval_mortality(const StructuralFit& fit, double t1, double t2,
                          double t0, int grid_points, bool normalized) {
  if (!(t1 >= 0.0) || !(t1 < t2) || !(t2 <= fit.t_max)) {
    throw ConfigError("interval_mortality requires 0 <= t1 < t2 <= t_max");
  }
  if (grid_points < 1) throw ConfigError("interval_mortality: empty grid");
  const double h = (t2 - t1) / static_cast<double>(grid_points);
  double sum = 0.0;
  for (int j = 0; j < grid_points; ++j) {
    const double a = t1 + (static_cast<double>(j) + 0.5) * h;
    sum += mortality_at(fit, a, t0);
  }
  const double mean = sum / static_cast<double>(grid_points);
  return normalized ? mean : mean * (t2 - t1) / fit.t_max;
}

double endpoint_value(const StructuralFit& fit, const Endpoint& endpoint, double a) {
  check_regime(fit, a);
  switch (endpoint.kind) {
    case Endpoint::Kind::SurvivalAt:
      return survival_probability(fit, a, endpoint.t0);
    case Endpoint::Kind::RestrictedMean: {
      // S_a is a right-continuous step function between baseline jumps, so
      // the integral over [0, t_max] is an exact finite sum.
      std::vector<double> rowbuf(fit.design.dim());
      double lambda = 0.0;
      double prev_t = 0.0;
      double integral = 0.0;
      for (std::size_t k = 0; k < fit.baseline.size(); ++k) {
        const double u = fit.baseline.times()[k];
        if (u > fit.t_max) break;
        integral += std::exp(-lambda) * (u - prev_t);
        lambda += regime_mass(fit, a, k, rowbuf);
        prev_t = u;
      }
      integral += std::exp(-lambda) * (fit.t_max - prev_t);
      return integral;
    }
    default: {  // MedianSurvival
      std::vector<double> rowbuf(fit.design.dim());
      double lambda = 0.0;
      for (std::size_t k = 0; k < fit.baseline.size(); ++k) {
        lambda += regime_mass(fit, a, k, rowbuf);
        if (1.0 - std::exp(-lambda) >= 0.5) return fit.baseline.times()[k];
      }
      return std::numeric_limits<double>::infinity();
    }
  }
}

OptimalInitiation optimal_initiation(const StructuralFit& fit,
                                     const Endpoint& endpoint,
                                     const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("optimal_initiation: empty grid");
  OptimalInitiation out;
  out.grid.a = grid;
  out.grid.theta.reserve(grid.size());
  bool first = true;
  for (double a : grid) {
    const double theta = endpoint_value(fit, endpoint, a);
    out.grid.theta.push_back(theta);
    if (first || theta > out.theta) {
      out.a_opt = a;
      out.theta = theta;
      first = false;
    }
  }
  return out;
}

}  // namespace itsurv
