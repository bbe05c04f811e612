#include "itsurv/survcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itsurv/errors.hpp"

namespace itsurv {

double MarginalLaw::cdf(double t) const {
  return 1.0 - std::exp(-cumhaz.value(t));
}

double MarginalLaw::survival(double t) const {
  return std::exp(-cumhaz.value(t));
}

double MarginalLaw::survival_before(double t) const {
  return std::exp(-cumhaz.value_before(t));
}

double MarginalLaw::density_mass(double u) const {
  const std::size_t k = cumhaz.jump_index(u);
  if (k == StepFunction::npos) {
    throw Error("density mass requested at a non-jump time");
  }
  return density[k];
}

StepFunction nelson_aalen(const std::vector<double>& times,
                          const std::vector<std::uint8_t>& events) {
  if (times.empty()) throw ConfigError("nelson_aalen: empty input");
  if (times.size() != events.size()) {
    throw ConfigError("nelson_aalen: times and events differ in length");
  }
  const std::size_t n = times.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times[a] < times[b];
  });
  std::vector<double> jump_times, jump_masses;
  std::size_t k = 0;
  while (k < n) {
    const double u = times[order[k]];
    if (!(u >= 0.0)) throw ConfigError("nelson_aalen: negative time");
    std::size_t d = 0;
    std::size_t j = k;
    while (j < n && times[order[j]] == u) {
      if (events[order[j]]) ++d;
      ++j;
    }
    if (d > 0) {
      const double at_risk = static_cast<double>(n - k);
      jump_times.push_back(u);
      jump_masses.push_back(static_cast<double>(d) / at_risk);
    }
    k = j;
  }
  return StepFunction::from_jumps(std::move(jump_times), std::move(jump_masses));
}

MarginalLaw to_marginal_law(const StepFunction& cumhaz) {
  MarginalLaw law;
  law.cumhaz = cumhaz;
  law.density.resize(cumhaz.size());
  double lambda_before = 0.0;
  for (std::size_t k = 0; k < cumhaz.size(); ++k) {
    const double mass = cumhaz.masses()[k];
    if (mass < 0.0) throw ConfigError("to_marginal_law: negative hazard mass");
    law.density[k] = mass * std::exp(-lambda_before);
    lambda_before = cumhaz.cumulative(k);
  }
  return law;
}

bool risk_indicator(const SubjectRecord& subject, double t) {
  return t <= subject.t_star;
}

ProcessPoint process_point(const SubjectRecord& s, CountingProcess p, double t_max) {
  switch (p) {
    case CountingProcess::Initiation:
      return {s.a_star, s.delta_a};
    case CountingProcess::Censoring:
      return {s.t_star, !s.delta_t && s.t_star < t_max};
    default:
      return {s.t_star, s.delta_t};
  }
}

MarginalLaw process_marginal(const Dataset& ds, CountingProcess p) {
  std::vector<double> times;
  std::vector<std::uint8_t> events;
  times.reserve(ds.size());
  events.reserve(ds.size());
  for (const auto& s : ds.subjects) {
    const ProcessPoint pt = process_point(s, p, ds.t_max);
    times.push_back(pt.exit);
    events.push_back(pt.event ? 1 : 0);
  }
  return to_marginal_law(nelson_aalen(times, events));
}

}  // namespace itsurv
