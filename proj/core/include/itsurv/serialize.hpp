#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "itsurv/causal.hpp"
#include "itsurv/coxfit.hpp"
#include "itsurv/simlab.hpp"
#include "itsurv/structural.hpp"
#include "itsurv/weights.hpp"

namespace itsurv {

// Serialized structural fit: everything needed to reproduce predictions
// bit-stably (knots, coefficients, baseline jump table) plus diagnostics.
struct FitDocument {
  std::vector<StructuralFit> strata;
  std::vector<WeightDiagnostics> diagnostics;  // parallel to strata
  std::uint64_t seed = 0;
};

std::string write_fit_document(const FitDocument& doc);
FitDocument read_fit_document(const std::string& json_text);

std::string write_hazard_model(const FittedHazardModel& model);
FittedHazardModel read_hazard_model(const std::string& json_text);

// Delimited plot tables; numbers are formatted so re-reading reproduces the
// in-memory values exactly. The never-initiate regime prints as "inf".
void write_curve_table(std::ostream& os, const std::vector<SurvivalCurve>& curves);
std::vector<SurvivalCurve> read_curve_table(std::istream& is);

void write_theta_table(std::ostream& os, const ThetaGrid& grid);
ThetaGrid read_theta_table(std::istream& is);

void write_sim_report(std::ostream& os, const SimReport& report);

std::string format_double(double v);
double parse_double_token(const std::string& token);

}  // namespace itsurv
