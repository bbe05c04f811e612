#pragma once

#include <utility>
#include <vector>

#include "itsurv/structural.hpp"

namespace itsurv {

// Potential-outcome survival curve under initiation at a (or never, for the
// +inf sentinel).
struct SurvivalCurve {
  double a = 0.0;  // +inf for the reference regime
  std::vector<double> grid;
  std::vector<double> survival;
};

struct Endpoint {
  enum class Kind { SurvivalAt, RestrictedMean, MedianSurvival };
  Kind kind = Kind::SurvivalAt;
  double t0 = 52.0;  // used by SurvivalAt

  static Endpoint survival_at(double t0) { return {Kind::SurvivalAt, t0}; }
  static Endpoint restricted_mean() { return {Kind::RestrictedMean, 0.0}; }
  static Endpoint median_survival() { return {Kind::MedianSurvival, 0.0}; }
};

// Cumulative hazard of T_a at t: the reference baseline up to min(t, a)
// plus the hazard-ratio-weighted baseline increments over (a, t].
double cumulative_hazard(const StructuralFit& fit, double a, double t);

double survival_probability(const StructuralFit& fit, double a, double t);

// Default grid: 0 to t_max in steps of 0.5 weeks.
SurvivalCurve survival_curve(const StructuralFit& fit, double a);
SurvivalCurve survival_curve(const StructuralFit& fit, double a,
                             const std::vector<double>& grid);

double mortality_at(const StructuralFit& fit, double a, double t0);

struct MortalityContrast {
  double difference = 0.0;  // F_a(t0) - F_a'(t0)
  double ratio = 1.0;       // S_a(t0) / S_a'(t0)
};

MortalityContrast contrast(const StructuralFit& fit, double a, double a_prime,
                           double t0);

// Mean of mortality_at over a ~ Uniform[t1, t2), midpoint rule. The
// unnormalized variant scales by (t2 - t1) / t_max, matching an integral
// against the uniform distribution on the whole horizon.
double interval_mortality(const StructuralFit& fit, double t1, double t2,
                          double t0, int grid_points = 64,
                          bool normalized = true);

double endpoint_value(const StructuralFit& fit, const Endpoint& endpoint, double a);

struct ThetaGrid {
  std::vector<double> a;
  std::vector<double> theta;
};

struct OptimalInitiation {
  double a_opt = 0.0;
  double theta = 0.0;
  ThetaGrid grid;
};

// Grid argmax of theta_a; ties break toward the smallest a.
OptimalInitiation optimal_initiation(const StructuralFit& fit,
                                     const Endpoint& endpoint,
                                     const std::vector<double>& grid);

}  // namespace itsurv
