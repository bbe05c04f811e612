#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace itsurv {

// Right-continuous piecewise-constant function: value(t) is the initial
// value plus the sum of jump masses at jump times <= t. Carrier for
// cumulative hazards, CDFs and per-subject weight trajectories (the latter
// use initial value 1).
class StepFunction {
 public:
  StepFunction() = default;

  static StepFunction from_jumps(std::vector<double> times,
                                 std::vector<double> masses,
                                 double initial_value = 0.0);

  // Builds from post-jump values: value(times[k]) == values[k].
  static StepFunction from_values(const std::vector<double>& times,
                                  const std::vector<double>& values,
                                  double initial_value);

  double value(double t) const;
  // Left limit: initial value plus masses at jump times strictly < t.
  double value_before(double t) const;
  // Mass at an exact jump time; 0 when t is not a jump.
  double mass_at(double t) const;
  // Index of the jump at exact time t, or npos.
  std::size_t jump_index(double t) const;

  double initial_value() const { return initial_; }
  double final_value() const;
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& masses() const { return masses_; }
  // Cumulative value at jump k (initial value included).
  double cumulative(std::size_t k) const { return cum_[k]; }

  // Two-column (time, cumulative value) table, exact round-trip formatting.
  void write_table(std::ostream& os) const;
  static StepFunction read_table(std::istream& is);

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<double> times_;   // strictly increasing
  std::vector<double> masses_;
  std::vector<double> cum_;     // prefix sums, initial_ included
  double initial_ = 0.0;
};

}  // namespace itsurv
