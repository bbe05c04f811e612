#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "itsurv/causal.hpp"
#include "itsurv/errors.hpp"
#include "itsurv/pipeline.hpp"
#include "itsurv/serialize.hpp"
#include "itsurv/simlab.hpp"

using namespace itsurv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PipelineResult fitted_pipeline() {
  SimConfig cfg;
  cfg.n = 300;
  cfg.lambda_inf = 0.015;
  cfg.treatment_rate = 0.1;
  cfg.gamma = 0.5;
  cfg.censoring_rate = 0.01;
  cfg.seed = 606;
  const Dataset ds = simulate_dataset(cfg);
  PipelineConfig pipe;
  pipe.treatment_model.covariates = {"L"};
  return run_pipeline(ds, pipe);
}

}  // namespace

TEST_CASE("fit document round-trips predictions bit-stably") {
  const PipelineResult res = fitted_pipeline();
  FitDocument doc;
  doc.strata = {res.fit};
  doc.diagnostics = {res.weights.diagnostics};
  doc.seed = 17;

  const std::string text = write_fit_document(doc);
  const FitDocument back = read_fit_document(text);
  REQUIRE(back.strata.size() == 1);
  const StructuralFit& fit = back.strata[0];

  CHECK(fit.t_max == res.fit.t_max);
  REQUIRE(fit.beta.size() == res.fit.beta.size());
  for (int k = 0; k < fit.beta.size(); ++k) {
    CHECK(fit.beta[k] == res.fit.beta[k]);
  }
  for (double a : {0.0, 4.0, kInf}) {
    for (double t : {13.0, 26.0, 52.0}) {
      CHECK(survival_probability(fit, a, t) ==
            survival_probability(res.fit, a, t));
    }
  }
  CHECK(back.diagnostics[0].w1.mean == res.weights.diagnostics.w1.mean);
  CHECK(back.seed == 17);
}

TEST_CASE("fit document rejects foreign json") {
  CHECK_THROWS_AS(read_fit_document("{\"kind\": \"something\"}"), ValidationError);
  CHECK_THROWS_AS(read_fit_document("not json"), ValidationError);
}

TEST_CASE("hazard model document round-trips") {
  const PipelineResult res = fitted_pipeline();
  REQUIRE(res.treatment_model.has_value());
  const std::string text = write_hazard_model(*res.treatment_model);
  const FittedHazardModel back = read_hazard_model(text);
  CHECK(back.coefficients[0] == res.treatment_model->coefficients[0]);
  CHECK(back.coefficient_names == res.treatment_model->coefficient_names);
  CHECK(back.baseline_cumhaz.size() == res.treatment_model->baseline_cumhaz.size());
  CHECK(back.diagnostics.converged);
}

TEST_CASE("curve tables round-trip exactly, including the inf regime") {
  const PipelineResult res = fitted_pipeline();
  std::vector<SurvivalCurve> curves;
  for (double a : {0.0, 8.0, kInf}) {
    curves.push_back(survival_curve(res.fit, a));
  }
  std::stringstream ss;
  write_curve_table(ss, curves);
  const auto back = read_curve_table(ss);
  REQUIRE(back.size() == curves.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    CHECK(back[c].a == curves[c].a);
    REQUIRE(back[c].grid.size() == curves[c].grid.size());
    for (std::size_t k = 0; k < curves[c].grid.size(); ++k) {
      CHECK(back[c].grid[k] == curves[c].grid[k]);
      CHECK(back[c].survival[k] == curves[c].survival[k]);
    }
  }
}

TEST_CASE("theta tables round-trip exactly") {
  ThetaGrid grid;
  grid.a = {0.0, 1.0 / 3.0, 8.0};
  grid.theta = {0.123456789012345678, 0.5, std::exp(-1.0)};
  std::stringstream ss;
  write_theta_table(ss, grid);
  const ThetaGrid back = read_theta_table(ss);
  REQUIRE(back.a.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back.a[k] == grid.a[k]);
    CHECK(back.theta[k] == grid.theta[k]);
  }
}

TEST_CASE("numeric token parsing") {
  CHECK(parse_double_token("inf") == kInf);
  CHECK(parse_double_token("-inf") == -kInf);
  CHECK(parse_double_token(format_double(0.1)) == 0.1);
  CHECK_THROWS_AS(parse_double_token("abc"), ValidationError);
}
