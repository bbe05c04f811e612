#pragma once

#include <cstdint>
#include <vector>

#include "itsurv/data.hpp"
#include "itsurv/step_function.hpp"

namespace itsurv {

// Nonparametric law derived from a cumulative-hazard step function:
// cdf(t) = 1 - exp(-L(t)); the density mass at a jump u is
// dL(u) * S(u-), i.e. masses equal CDF increments in the discrete case.
struct MarginalLaw {
  StepFunction cumhaz;
  std::vector<double> density;  // mass per jump of cumhaz

  double cdf(double t) const;
  double survival(double t) const;
  double survival_before(double t) const;
  // Density mass at an exact jump time; throws when u is not a jump.
  double density_mass(double u) const;
};

// Pooled Nelson-Aalen estimator: a jump of d(u)/n(u) at every distinct event
// time u, with n(u) = #{i : times[i] >= u} (events precede censorings, so
// subjects exiting at u are still at risk at u).
StepFunction nelson_aalen(const std::vector<double>& times,
                          const std::vector<std::uint8_t>& events);

MarginalLaw to_marginal_law(const StepFunction& cumhaz);

// Y(t): at risk for death and under observation, closed at the exit time.
bool risk_indicator(const SubjectRecord& subject, double t);

// The three counting processes carried by a SubjectRecord.
enum class CountingProcess { Initiation, Censoring, Death };

// (exit time, event indicator) of the selected process for one subject.
// Initiation: N^A jumps at A* when Delta^A. Censoring: N^C jumps at T* on
// loss to follow-up (Delta^T = 0 and T* strictly inside the horizon);
// deaths and administrative end act as censoring for N^C. Death: N^T jumps
// at T* when Delta^T.
struct ProcessPoint {
  double exit = 0.0;
  bool event = false;
};

ProcessPoint process_point(const SubjectRecord& s, CountingProcess p, double t_max);

// Pooled marginal law of the selected process over the dataset.
MarginalLaw process_marginal(const Dataset& ds, CountingProcess p);

}  // namespace itsurv
