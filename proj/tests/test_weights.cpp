#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "itsurv/errors.hpp"
#include "itsurv/pipeline.hpp"
#include "itsurv/rng.hpp"
#include "itsurv/simlab.hpp"
#include "itsurv/weights.hpp"
#include "test_helpers.hpp"

using namespace itsurv;

namespace {

// s1 initiates at 1 (dies at 10), s2 initiates at 2 (censored at 8),
// s3 never initiates (dies at 5); binary covariate x = (1, 0, 1).
Dataset three_subject_dataset() {
  return testing::dataset(
      {
          testing::subject("s1", 1.0, true, 10.0, true, {1.0}),
          testing::subject("s2", 2.0, true, 8.0, false, {0.0}),
          testing::subject("s3", 5.0, false, 5.0, true, {1.0}),
      },
      {"x"});
}

}  // namespace

TEST_CASE("covariate-free models give exactly unit weights") {
  const Dataset ds = three_subject_dataset();
  const FittedHazardModel null_a = null_hazard_model(ds, CountingProcess::Initiation);
  const MarginalLaw marg_a = process_marginal(ds, CountingProcess::Initiation);
  const TreatmentWeights tw = estimate_treatment_weights(ds, null_a, marg_a);
  CHECK(tw.w1_at_a[0] == 1.0);  // exact, not approximate
  CHECK(tw.w1_at_a[1] == 1.0);
  CHECK(std::isnan(tw.w1_at_a[2]));
  for (const auto& w2 : tw.w2) {
    CHECK(w2.initial_value() == 1.0);
    for (std::size_t k = 0; k < w2.size(); ++k) CHECK(w2.cumulative(k) == 1.0);
  }

  const FittedHazardModel null_c = null_hazard_model(ds, CountingProcess::Censoring);
  const MarginalLaw marg_c = process_marginal(ds, CountingProcess::Censoring);
  const auto wc = estimate_censoring_weights(ds, null_c, marg_c);
  for (const auto& w : wc) {
    for (std::size_t k = 0; k < w.size(); ++k) CHECK(w.cumulative(k) == 1.0);
  }
}

TEST_CASE("no censoring events give unit censoring weights") {
  const Dataset ds = testing::dataset(
      {
          testing::subject("a", 1.0, true, 4.0, true, {1.0}),
          testing::subject("b", 4.0, false, 4.0, true, {0.0}),
      },
      {"x"});
  const FittedHazardModel null_c = null_hazard_model(ds, CountingProcess::Censoring);
  CHECK(null_c.baseline_cumhaz.size() == 0);
  const auto wc = estimate_censoring_weights(
      ds, null_c, process_marginal(ds, CountingProcess::Censoring));
  for (const auto& w : wc) {
    CHECK(w.size() == 0);
    CHECK(w.value(3.0) == 1.0);
  }
}

TEST_CASE("treatment weights on the hand-computed dataset") {
  const Dataset ds = three_subject_dataset();
  HazardSpec spec;
  spec.covariates = {"x"};
  const FittedHazardModel model = fit_cox(ds, spec, CountingProcess::Initiation);
  // Initiation events at t=1 (risk x = 1,0,1) and t=2 (risk x = 0,1): the
  // score equation is the same as the death-model oracle, alpha = -ln(2)/2.
  const double alpha = -std::log(2.0) / 2.0;
  REQUIRE(std::abs(model.coefficients[0] - alpha) <= 1e-8);
  const double z = std::exp(model.coefficients[0]);

  const MarginalLaw marg = process_marginal(ds, CountingProcess::Initiation);
  const TreatmentWeights tw = estimate_treatment_weights(ds, model, marg);

  // w1 for the first initiator: (d/n at u1) / (r * dLambda_0(u1)), both
  // survival factors equal 1 before the first event.
  const double breslow1 = 1.0 / (2.0 * z + 1.0);
  CHECK(tw.w1_at_a[0] ==
        doctest::Approx((1.0 / 3.0) / (z * breslow1)).epsilon(1e-12));

  // s3's trajectory at t = 2 compares cumulative hazards: marginal
  // 1/3 + 1/2 against conditional z * (breslow1 + breslow2).
  const double breslow2 = 1.0 / (1.0 + z);
  const double expected_w2 =
      std::exp(z * (breslow1 + breslow2) - (1.0 / 3.0 + 1.0 / 2.0));
  CHECK(tw.w2[2].value(2.0) == doctest::Approx(expected_w2).epsilon(1e-12));
  CHECK(tw.w2[2].value(0.0) == 1.0);
}

TEST_CASE("censoring weight trajectory with an injected log-2 model") {
  FittedHazardModel model;
  model.spec.covariates = {"x"};
  model.covariate_indices = {0};
  model.coefficient_names = {"x"};
  model.coefficients = Eigen::VectorXd::Constant(1, std::log(2.0));
  model.baseline_cumhaz = StepFunction::from_jumps({2.0, 4.0}, {0.05, 0.1});

  MarginalLaw marginal;
  marginal.cumhaz = model.baseline_cumhaz;
  marginal.density = {0.05, 0.1 * std::exp(-0.05)};

  const Dataset ds = testing::dataset(
      {testing::subject("x1", 9.0, false, 9.0, true, {1.0})}, {"x"});
  const auto wc = estimate_censoring_weights(ds, model, marginal);
  // For x = 1 the conditional hazard doubles: W^C(t) = exp(Lambda_0(t)).
  CHECK(wc[0].value(5.0) == doctest::Approx(std::exp(0.15)).epsilon(1e-12));
  CHECK(wc[0].value(3.0) == doctest::Approx(std::exp(0.05)).epsilon(1e-12));
  CHECK(wc[0].value(1.0) == 1.0);
}

TEST_CASE("positivity violations fail loudly") {
  FittedHazardModel model;
  model.spec.covariates = {"x"};
  model.covariate_indices = {0};
  model.coefficient_names = {"x"};
  model.coefficients = Eigen::VectorXd::Constant(1, 4.0);
  // Large hazard mass drives the conditional survival below 1e-12.
  model.baseline_cumhaz = StepFunction::from_jumps({1.0}, {1.0});
  MarginalLaw marginal;
  marginal.cumhaz = model.baseline_cumhaz;
  marginal.density = {1.0};
  const Dataset ds = testing::dataset(
      {testing::subject("frail", 9.0, false, 9.0, true, {1.0})}, {"x"});
  CHECK_THROWS_WITH_AS(estimate_censoring_weights(ds, model, marginal),
                       doctest::Contains("positivity violation"), PositivityError);
}

TEST_CASE("weight truncation") {
  WeightSet ws = WeightSet::unit(4);
  ws.w1_at_a = {1.0, 1.0, 1.0, 100.0};

  SUBCASE("absent quantile is the identity") {
    const WeightSet out = truncate_weights(ws, std::nullopt);
    CHECK(out.w1_at_a[3] == 100.0);
  }
  SUBCASE("cap at the 75th percentile") {
    const WeightSet out = truncate_weights(ws, 0.75);
    CHECK(out.w1_at_a == std::vector<double>{1.0, 1.0, 1.0, 1.0});
  }
  SUBCASE("equal weights are unchanged for any quantile") {
    ws.w1_at_a = {2.0, 2.0, 2.0, 2.0};
    const WeightSet out = truncate_weights(ws, 0.9);
    CHECK(out.w1_at_a == std::vector<double>{2.0, 2.0, 2.0, 2.0});
  }
  SUBCASE("quantile domain is validated") {
    CHECK_THROWS_AS(truncate_weights(ws, 0.4), ConfigError);
    CHECK_THROWS_AS(truncate_weights(ws, 1.2), ConfigError);
  }
}

TEST_CASE("trajectory truncation caps step-function values") {
  WeightSet ws = WeightSet::unit(3);
  ws.w2[0] = StepFunction::from_values({1.0, 2.0}, {1.2, 8.0}, 1.0);
  ws.w2[1] = StepFunction::from_values({1.5}, {1.1}, 1.0);
  ws.w2[2] = StepFunction::from_values({2.5}, {0.9}, 1.0);
  const WeightSet out = truncate_weights(ws, 0.75);
  // Sample {1.2, 8.0, 1.1, 0.9}: 75th percentile = 1.2.
  CHECK(out.w2[0].value(2.0) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(out.w2[0].value(1.0) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(out.w2[1].value(2.0) == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(out.w2[2].value(3.0) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("weights are invariant to subject relabeling") {
  const Dataset ds = three_subject_dataset();
  Dataset relabeled = ds;
  std::swap(relabeled.subjects[0], relabeled.subjects[2]);
  HazardSpec spec;
  spec.covariates = {"x"};
  const auto model_a = fit_cox(ds, spec, CountingProcess::Initiation);
  const auto model_b = fit_cox(relabeled, spec, CountingProcess::Initiation);
  const auto tw_a = estimate_treatment_weights(
      ds, model_a, process_marginal(ds, CountingProcess::Initiation));
  const auto tw_b = estimate_treatment_weights(
      relabeled, model_b, process_marginal(relabeled, CountingProcess::Initiation));
  CHECK(tw_a.w1_at_a[0] == tw_b.w1_at_a[2]);
  CHECK(tw_a.w2[2].value(2.0) == tw_b.w2[0].value(2.0));
}

TEST_CASE("stabilization: mean treated-side weight stays near one") {
  SimConfig cfg;
  cfg.n = 2000;
  cfg.lambda_inf = 0.01;
  cfg.treatment_rate = 0.08;
  cfg.gamma = 1.0;
  cfg.censoring_rate = 0.01;
  cfg.seed = 5150;
  const Dataset ds = simulate_dataset(cfg);

  PipelineConfig pipe;
  pipe.treatment_model.covariates = {"L"};
  const PipelineResult res = run_pipeline(ds, pipe);

  for (double t : {4.0, 8.0, 16.0}) {
    double sum = 0.0;
    int at_risk = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.subjects[i].a_star >= t) {
        sum += res.weights.w2[i].value(t);
        ++at_risk;
      }
    }
    REQUIRE(at_risk > 100);
    CHECK(std::abs(sum / at_risk - 1.0) <= 0.1);
  }
}
