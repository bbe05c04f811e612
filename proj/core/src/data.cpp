#include "itsurv/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "itsurv/errors.hpp"

namespace itsurv {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, std::size_t line_no,
                    const std::string& column) {
  const std::string s = trim(raw);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("parse error at line " + std::to_string(line_no) +
                          ": column '" + column + "' value '" + s +
                          "' is not a number");
  }
}

bool parse_bool(const std::string& raw, std::size_t line_no,
                const std::string& column) {
  std::string s = trim(raw);
  std::transform(s.begin(), s.end(), s.begin(), ::tolower);
  if (s == "1" || s == "true" || s == "t" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "f" || s == "no") return false;
  throw ValidationError("parse error at line " + std::to_string(line_no) +
                        ": column '" + column + "' value '" + raw +
                        "' is not a 0/1 indicator");
}

}  // namespace

CovariatePath::CovariatePath(std::vector<CovariateSegment> segments)
    : segments_(std::move(segments)) {}

std::size_t CovariatePath::dim() const {
  return segments_.empty() ? 0 : segments_.front().values.size();
}

const std::vector<double>& CovariatePath::values_at(double t) const {
  if (segments_.empty()) throw Error("covariate path exhausted");
  if (t <= 0.0) return segments_.front().values;
  // Values in effect at t come from the segment with start < t <= stop.
  std::size_t lo = 0, hi = segments_.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (segments_[mid].stop < t) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == segments_.size()) throw Error("covariate path exhausted");
  return segments_[lo].values;
}

CovariatePath CovariatePath::truncated(double t_max) const {
  std::vector<CovariateSegment> kept;
  for (const auto& seg : segments_) {
    if (seg.start >= t_max) break;
    CovariateSegment s = seg;
    s.stop = std::min(s.stop, t_max);
    kept.push_back(std::move(s));
  }
  return CovariatePath(std::move(kept));
}

ObservationPattern classify_pattern(bool delta_a, bool delta_t) {
  if (delta_a && delta_t) return ObservationPattern::I;
  if (delta_a && !delta_t) return ObservationPattern::II;
  if (!delta_a && delta_t) return ObservationPattern::III;
  return ObservationPattern::IV;
}

const char* to_string(ObservationPattern p) {
  switch (p) {
    case ObservationPattern::I: return "I";
    case ObservationPattern::II: return "II";
    case ObservationPattern::III: return "III";
    default: return "IV";
  }
}

void SubjectRecord::validate(std::size_t covariate_dim) const {
  auto fail = [this](const std::string& msg) {
    throw ValidationError("subject '" + id + "': " + msg);
  };
  if (!(a_star >= 0.0) || !(t_star >= 0.0) || !std::isfinite(a_star) ||
      !std::isfinite(t_star)) {
    fail("times must be nonnegative and finite");
  }
  if (a_star > t_star) fail("initiation follow-up exceeds mortality follow-up");
  if (delta_a && !(a_star < t_star)) {
    fail("observed initiation requires A* strictly before T*");
  }
  if (covariates.segments().empty()) fail("empty covariate path");
  const auto& segs = covariates.segments();
  if (segs.front().start != 0.0) fail("covariate path must start at 0");
  for (std::size_t k = 0; k < segs.size(); ++k) {
    if (!(segs[k].start < segs[k].stop)) {
      fail("covariate segment with stop <= start");
    }
    if (segs[k].start < 0.0) fail("negative segment time");
    if (k > 0 && segs[k].start != segs[k - 1].stop) {
      fail("covariate segments overlap or leave a gap");
    }
    if (segs[k].values.size() != covariate_dim) {
      fail("covariate dimension mismatch");
    }
  }
  if (covariates.end_time() < t_star) {
    fail("covariate path ends before end of follow-up");
  }
}

std::size_t Dataset::covariate_index(const std::string& name) const {
  for (std::size_t k = 0; k < covariate_names.size(); ++k) {
    if (covariate_names[k] == name) return k;
  }
  throw ConfigError("unknown covariate '" + name + "'");
}

std::vector<std::string> Dataset::strata_labels() const {
  std::set<std::string> seen;
  for (const auto& s : subjects) {
    if (s.stratum) seen.insert(*s.stratum);
  }
  return {seen.begin(), seen.end()};
}

Dataset Dataset::stratum_subset(const std::optional<std::string>& label) const {
  Dataset out;
  out.t_max = t_max;
  out.covariate_names = covariate_names;
  for (const auto& s : subjects) {
    if (s.stratum == label) out.subjects.push_back(s);
  }
  return out;
}

void Dataset::validate() const {
  for (const auto& s : subjects) {
    s.validate(covariate_names.size());
    if (s.t_star > t_max) {
      throw ValidationError("subject '" + s.id +
                            "': follow-up exceeds the administrative horizon");
    }
  }
}

Dataset parse_dataset(std::istream& in, const DataSchema& schema,
                      const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(origin + ": empty file");
  }
  const auto header = split(trim(line), schema.delimiter);
  auto col = [&](const std::string& name, bool required) -> int {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (trim(header[k]) == name) return static_cast<int>(k);
    }
    if (required) {
      throw ConfigError(origin + ": schema column '" + name + "' not found");
    }
    return -1;
  };
  const int c_id = col(schema.id, true);
  const int c_start = col(schema.start, true);
  const int c_stop = col(schema.stop, true);
  const int c_init = col(schema.initiation, true);
  const int c_init_ev = col(schema.initiation_event, true);
  const int c_death = col(schema.death, true);
  const int c_death_ev = col(schema.death_event, true);
  const int c_stratum = schema.stratum.empty() ? -1 : col(schema.stratum, true);
  std::vector<int> c_cov;
  for (const auto& name : schema.covariates) c_cov.push_back(col(name, true));

  struct Raw {
    SubjectRecord rec;
    std::vector<CovariateSegment> segs;
  };
  std::map<std::string, Raw> by_id;
  std::vector<std::string> order;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, schema.delimiter);
    const std::size_t needed = static_cast<std::size_t>(
        std::max({c_id, c_start, c_stop, c_init, c_init_ev, c_death,
                  c_death_ev, c_stratum,
                  c_cov.empty() ? -1 : *std::max_element(c_cov.begin(), c_cov.end())})) + 1;
    if (fields.size() < needed) {
      throw ValidationError("parse error at line " + std::to_string(line_no) +
                            ": expected at least " + std::to_string(needed) +
                            " columns, found " + std::to_string(fields.size()));
    }
    const std::string id = trim(fields[c_id]);
    CovariateSegment seg;
    seg.start = parse_double(fields[c_start], line_no, schema.start);
    seg.stop = parse_double(fields[c_stop], line_no, schema.stop);
    for (std::size_t k = 0; k < c_cov.size(); ++k) {
      seg.values.push_back(parse_double(fields[c_cov[k]], line_no, schema.covariates[k]));
    }
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      Raw raw;
      raw.rec.id = id;
      raw.rec.a_star = parse_double(fields[c_init], line_no, schema.initiation);
      raw.rec.delta_a = parse_bool(fields[c_init_ev], line_no, schema.initiation_event);
      raw.rec.t_star = parse_double(fields[c_death], line_no, schema.death);
      raw.rec.delta_t = parse_bool(fields[c_death_ev], line_no, schema.death_event);
      if (c_stratum >= 0) raw.rec.stratum = trim(fields[c_stratum]);
      it = by_id.emplace(id, std::move(raw)).first;
      order.push_back(id);
    }
    it->second.segs.push_back(std::move(seg));
  }

  Dataset ds;
  ds.covariate_names = schema.covariates;
  double max_tstar = 0.0;
  for (const auto& id : order) {
    Raw& raw = by_id.at(id);
    std::stable_sort(raw.segs.begin(), raw.segs.end(),
                     [](const CovariateSegment& a, const CovariateSegment& b) {
                       return a.start < b.start;
                     });
    raw.rec.covariates = CovariatePath(std::move(raw.segs));
    max_tstar = std::max(max_tstar, raw.rec.t_star);
    ds.subjects.push_back(std::move(raw.rec));
  }
  if (ds.subjects.empty()) {
    throw ValidationError(origin + ": no subject rows");
  }
  ds.t_max = schema.t_max.value_or(max_tstar);
  if (schema.t_max) {
    ds = apply_administrative_censoring(ds, *schema.t_max);
  }
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::string& path, const DataSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open data file '" + path + "'");
  }
  return parse_dataset(in, schema, path);
}

Dataset apply_administrative_censoring(const Dataset& ds, double t_max) {
  if (!(t_max > 0.0)) {
    throw ConfigError("administrative horizon must be positive");
  }
  Dataset out;
  out.t_max = t_max;
  out.covariate_names = ds.covariate_names;
  out.subjects.reserve(ds.subjects.size());
  for (const auto& s : ds.subjects) {
    SubjectRecord r = s;
    if (r.t_star > t_max) {
      r.t_star = t_max;
      r.delta_t = false;
    }
    if (r.a_star >= t_max) {
      r.a_star = t_max;
      r.delta_a = false;
    }
    r.covariates = r.covariates.truncated(t_max);
    out.subjects.push_back(std::move(r));
  }
  return out;
}

void write_dataset(const Dataset& ds, std::ostream& os, const DataSchema& schema) {
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << schema.id << schema.delimiter << schema.start << schema.delimiter
     << schema.stop;
  for (const auto& c : schema.covariates) os << schema.delimiter << c;
  os << schema.delimiter << schema.initiation << schema.delimiter
     << schema.initiation_event << schema.delimiter << schema.death
     << schema.delimiter << schema.death_event;
  if (!schema.stratum.empty()) os << schema.delimiter << schema.stratum;
  os << "\n";
  for (const auto& s : ds.subjects) {
    for (const auto& seg : s.covariates.segments()) {
      os << s.id << schema.delimiter << num(seg.start) << schema.delimiter
         << num(seg.stop);
      for (double v : seg.values) os << schema.delimiter << num(v);
      os << schema.delimiter << num(s.a_star) << schema.delimiter
         << (s.delta_a ? 1 : 0) << schema.delimiter << num(s.t_star)
         << schema.delimiter << (s.delta_t ? 1 : 0);
      if (!schema.stratum.empty()) {
        os << schema.delimiter << s.stratum.value_or("");
      }
      os << "\n";
    }
  }
}

}  // namespace itsurv
