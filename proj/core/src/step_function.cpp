#include "itsurv/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "itsurv/errors.hpp"

namespace itsurv {

StepFunction StepFunction::from_jumps(std::vector<double> times,
                                      std::vector<double> masses,
                                      double initial_value) {
  if (times.size() != masses.size()) {
    throw ConfigError("StepFunction: times and masses differ in length");
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || !std::isfinite(masses[k])) {
      throw ConfigError("StepFunction: non-finite jump");
    }
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw ConfigError("StepFunction: jump times must be strictly increasing");
    }
  }
  StepFunction f;
  f.times_ = std::move(times);
  f.masses_ = std::move(masses);
  f.initial_ = initial_value;
  f.cum_.resize(f.times_.size());
  double acc = initial_value;
  for (std::size_t k = 0; k < f.times_.size(); ++k) {
    acc += f.masses_[k];
    f.cum_[k] = acc;
  }
  return f;
}

StepFunction StepFunction::from_values(const std::vector<double>& times,
                                       const std::vector<double>& values,
                                       double initial_value) {
  if (times.size() != values.size()) {
    throw ConfigError("StepFunction: times and values differ in length");
  }
  std::vector<double> masses(values.size());
  double prev = initial_value;
  for (std::size_t k = 0; k < values.size(); ++k) {
    masses[k] = values[k] - prev;
    prev = values[k];
  }
  return from_jumps(times, std::move(masses), initial_value);
}

double StepFunction::value(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return initial_;
  return cum_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepFunction::value_before(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return initial_;
  return cum_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepFunction::mass_at(double t) const {
  std::size_t k = jump_index(t);
  return k == npos ? 0.0 : masses_[k];
}

std::size_t StepFunction::jump_index(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end() || *it != t) return npos;
  return static_cast<std::size_t>(it - times_.begin());
}

double StepFunction::final_value() const {
  return cum_.empty() ? initial_ : cum_.back();
}

void StepFunction::write_table(std::ostream& os) const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", initial_);
  os << "time,value\n";
  os << "-inf," << buf << "\n";
  for (std::size_t k = 0; k < times_.size(); ++k) {
    char tb[64], vb[64];
    std::snprintf(tb, sizeof(tb), "%.17g", times_[k]);
    std::snprintf(vb, sizeof(vb), "%.17g", cum_[k]);
    os << tb << "," << vb << "\n";
  }
}

StepFunction StepFunction::read_table(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "time,value") {
    throw ValidationError("step-function table: missing header");
  }
  double initial = 0.0;
  std::vector<double> times, values;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ValidationError("step-function table: malformed row '" + line + "'");
    }
    const std::string tcol = line.substr(0, comma);
    const double v = std::stod(line.substr(comma + 1));
    if (first) {
      if (tcol != "-inf") {
        throw ValidationError("step-function table: missing initial-value row");
      }
      initial = v;
      first = false;
      continue;
    }
    times.push_back(std::stod(tcol));
    values.push_back(v);
  }
  if (first) throw ValidationError("step-function table: empty");
  return from_values(times, values, initial);
}

}  // namespace itsurv
