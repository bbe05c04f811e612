#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace itsurv {

// One piecewise-constant stretch of a covariate path; covers (start, stop]
// in event-time lookups: the values are in effect at times t with
// start < t <= stop (covariates observed strictly before t).
struct CovariateSegment {
  double start = 0.0;
  double stop = 0.0;
  std::vector<double> values;
};

// Last-observation-carried-forward covariate history L(t). Segments are
// contiguous and non-overlapping, starting at 0.
class CovariatePath {
 public:
  CovariatePath() = default;
  explicit CovariatePath(std::vector<CovariateSegment> segments);

  const std::vector<CovariateSegment>& segments() const { return segments_; }
  std::size_t dim() const;
  double end_time() const { return segments_.back().stop; }
  const std::vector<double>& baseline() const { return segments_.front().values; }

  // Value in effect at time t; throws when t > end_time().
  const std::vector<double>& values_at(double t) const;

  CovariatePath truncated(double t_max) const;

 private:
  std::vector<CovariateSegment> segments_;
};

// Figure-style observation patterns: I = initiation and death observed,
// II = initiation observed / death censored, III = death before initiation,
// IV = both censored.
enum class ObservationPattern { I, II, III, IV };

ObservationPattern classify_pattern(bool delta_a, bool delta_t);

const char* to_string(ObservationPattern p);

// One individual's counting-process history.
struct SubjectRecord {
  std::string id;
  double a_star = 0.0;  // A* = min(A, T, C), weeks
  bool delta_a = false; // I(A < T*)
  double t_star = 0.0;  // T* = min(T, C), weeks
  bool delta_t = false; // I(T < C)
  CovariatePath covariates;
  std::optional<std::string> stratum;

  ObservationPattern pattern() const { return classify_pattern(delta_a, delta_t); }

  // Initiation time used in structural design rows: observed A, or +inf for
  // subjects whose initiation was never observed.
  double initiation_or_inf() const {
    return delta_a ? a_star : std::numeric_limits<double>::infinity();
  }

  void validate(std::size_t covariate_dim) const;
};

struct Dataset {
  std::vector<SubjectRecord> subjects;
  double t_max = 0.0;  // administrative horizon
  std::vector<std::string> covariate_names;

  std::size_t size() const { return subjects.size(); }
  std::size_t covariate_index(const std::string& name) const;
  std::vector<std::string> strata_labels() const;
  Dataset stratum_subset(const std::optional<std::string>& label) const;
  void validate() const;
};

// Column mapping for delimited input. Each field names the column holding
// that role; `covariates` lists the covariate columns in model order.
struct DataSchema {
  char delimiter = ',';
  std::string id = "id";
  std::string start = "start";
  std::string stop = "stop";
  std::string initiation = "initiation";
  std::string initiation_event = "initiation_event";
  std::string death = "death";
  std::string death_event = "death_event";
  std::string stratum;  // empty = no stratification column
  std::vector<std::string> covariates;
  std::optional<double> t_max;  // horizon; defaults to max observed T*
};

Dataset load_dataset(const std::string& path, const DataSchema& schema);
Dataset parse_dataset(std::istream& in, const DataSchema& schema,
                      const std::string& origin);

Dataset apply_administrative_censoring(const Dataset& ds, double t_max);

void write_dataset(const Dataset& ds, std::ostream& os, const DataSchema& schema);

}  // namespace itsurv
