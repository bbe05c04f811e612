#include <doctest.h>

#include <cmath>
#include <vector>

#include "itsurv/coxfit.hpp"
#include "itsurv/errors.hpp"
#include "itsurv/rng.hpp"
#include "test_helpers.hpp"

using namespace itsurv;

namespace {

// Three subjects (time, event, x) = (1,T,1), (2,T,0), (3,F,1): the score
// root solves 2 e^{2a} = 1, i.e. a = -ln(2)/2.
Dataset oracle_dataset() {
  return testing::dataset(
      {
          testing::subject("s1", 1.0, false, 1.0, true, {1.0}),
          testing::subject("s2", 2.0, false, 2.0, true, {0.0}),
          testing::subject("s3", 3.0, false, 3.0, false, {1.0}),
      },
      {"x"});
}

HazardSpec x_spec() {
  HazardSpec spec;
  spec.covariates = {"x"};
  return spec;
}

}  // namespace

TEST_CASE("cox solver matches the analytic score root") {
  const FittedHazardModel model =
      fit_cox(oracle_dataset(), x_spec(), CountingProcess::Death);
  CHECK(model.diagnostics.converged);
  CHECK(std::abs(model.coefficients[0] - (-std::log(2.0) / 2.0)) <= 1e-8);
  CHECK(model.diagnostics.score_norm < 1e-8);
}

TEST_CASE("uniform weight rescaling leaves the estimate unchanged") {
  const Dataset ds = oracle_dataset();
  const FittedHazardModel base = fit_cox(ds, x_spec(), CountingProcess::Death);
  std::vector<StepFunction> weights(ds.size(),
                                    StepFunction::from_jumps({}, {}, 2.0));
  const FittedHazardModel doubled =
      fit_cox(ds, x_spec(), CountingProcess::Death, &weights);
  CHECK(doubled.coefficients[0] == doctest::Approx(base.coefficients[0]).epsilon(1e-14));
  // Breslow baseline halves when every weight doubles the risk set.
  REQUIRE(doubled.baseline_cumhaz.size() == base.baseline_cumhaz.size());
  for (std::size_t k = 0; k < base.baseline_cumhaz.size(); ++k) {
    CHECK(doubled.baseline_cumhaz.masses()[k] ==
          doctest::Approx(base.baseline_cumhaz.masses()[k]).epsilon(1e-14));
  }
}

TEST_CASE("constant covariate is unidentifiable") {
  const Dataset ds = testing::dataset(
      {
          testing::subject("a", 1.0, false, 1.0, true, {2.0}),
          testing::subject("b", 2.0, false, 2.0, true, {2.0}),
          testing::subject("c", 3.0, false, 3.0, false, {2.0}),
      },
      {"x"});
  CHECK_THROWS_WITH_AS(fit_cox(ds, x_spec(), CountingProcess::Death),
                       doctest::Contains("unidentifiable covariate"),
                       SingularModelError);
}

TEST_CASE("monotone likelihood triggers the separation guard") {
  const Dataset ds = testing::dataset(
      {
          testing::subject("a", 1.0, false, 1.0, true, {1.0}),
          testing::subject("b", 2.0, false, 2.0, false, {0.0}),
      },
      {"x"});
  CHECK_THROWS_AS(fit_cox(ds, x_spec(), CountingProcess::Death), SeparationError);
}

TEST_CASE("score equals the finite difference of the log partial likelihood") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 8 + static_cast<int>(rng.uniform_index(23));
    const int q = 1 + static_cast<int>(rng.uniform_index(3));
    const Dataset ds = testing::random_dataset(rng, n, q);
    HazardSpec spec;
    for (int j = 0; j < q; ++j) spec.covariates.push_back("x" + std::to_string(j));

    Eigen::VectorXd beta(q);
    for (int j = 0; j < q; ++j) beta[j] = rng.uniform(-0.5, 0.5);
    const ScoreEvaluation ev =
        evaluate_cox_score(ds, spec, CountingProcess::Death, nullptr, beta);

    auto loglik = [&](const std::vector<double>& b) {
      Eigen::VectorXd bb(q);
      for (int j = 0; j < q; ++j) bb[j] = b[j];
      return evaluate_cox_score(ds, spec, CountingProcess::Death, nullptr, bb).loglik;
    };
    const std::vector<double> point(beta.data(), beta.data() + q);
    for (int j = 0; j < q; ++j) {
      const double fd = testing::central_difference(loglik, point, j, 1e-5);
      CHECK(std::abs(fd - ev.score[j]) <= 1e-5 * std::max(1.0, std::abs(ev.score[j])));
    }
  }
}

TEST_CASE("covariate location shift moves only the baseline") {
  Rng rng(77);
  const Dataset ds = testing::random_dataset(rng, 40, 1);
  Dataset shifted = ds;
  for (auto& s : shifted.subjects) {
    CovariateSegment seg = s.covariates.segments()[0];
    seg.values[0] += 5.0;
    s.covariates = CovariatePath({seg});
  }
  HazardSpec spec;
  spec.covariates = {"x0"};
  const FittedHazardModel m0 = fit_cox(ds, spec, CountingProcess::Death);
  const FittedHazardModel m1 = fit_cox(shifted, spec, CountingProcess::Death);
  CHECK(std::abs(m0.coefficients[0] - m1.coefficients[0]) <= 1e-8);
  const double scale = std::exp(5.0 * m1.coefficients[0]);
  for (std::size_t k = 0; k < m0.baseline_cumhaz.size(); ++k) {
    CHECK(m1.baseline_cumhaz.masses()[k] * scale ==
          doctest::Approx(m0.baseline_cumhaz.masses()[k]).epsilon(1e-7));
  }
}

TEST_CASE("subject permutation leaves the fit bit-identical") {
  Rng rng(123);
  const Dataset ds = testing::random_dataset(rng, 30, 2);
  Dataset reversed = ds;
  std::reverse(reversed.subjects.begin(), reversed.subjects.end());
  HazardSpec spec;
  spec.covariates = {"x0", "x1"};
  const FittedHazardModel a = fit_cox(ds, spec, CountingProcess::Death);
  const FittedHazardModel b = fit_cox(reversed, spec, CountingProcess::Death);
  CHECK(a.coefficients[0] == b.coefficients[0]);
  CHECK(a.coefficients[1] == b.coefficients[1]);
  for (std::size_t k = 0; k < a.baseline_cumhaz.size(); ++k) {
    CHECK(a.baseline_cumhaz.masses()[k] == b.baseline_cumhaz.masses()[k]);
  }
}

TEST_CASE("conditional survival from a fitted model") {
  FittedHazardModel model;
  model.spec.covariates = {"x"};
  model.covariate_indices = {0};
  model.coefficient_names = {"x"};

  SUBCASE("zero coefficients reduce to the marginal") {
    model.coefficients = Eigen::VectorXd::Zero(1);
    model.baseline_cumhaz = StepFunction::from_jumps({1.0, 2.0}, {0.1, 0.2});
    const SubjectRecord s = testing::subject("s", 5.0, false, 5.0, true, {3.0});
    CHECK(conditional_survival(model, s, 2.5) ==
          doctest::Approx(std::exp(-0.3)).epsilon(1e-15));
    CHECK(conditional_survival(model, s, 0.0) == 1.0);
  }

  SUBCASE("binary covariate with log-2 coefficient") {
    model.coefficients = Eigen::VectorXd::Constant(1, std::log(2.0));
    model.baseline_cumhaz = StepFunction::from_jumps({1.0}, {0.1});
    const SubjectRecord s = testing::subject("s", 5.0, false, 5.0, true, {1.0});
    CHECK(conditional_survival(model, s, 2.0) ==
          doctest::Approx(std::exp(-0.2)).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(conditional_survival(model, s, 6.0),
                         "covariate path exhausted", Error);
  }
}

TEST_CASE("conditional density mass") {
  FittedHazardModel model;
  model.spec.covariates = {"x"};
  model.covariate_indices = {0};
  model.coefficient_names = {"x"};
  model.coefficients = Eigen::VectorXd::Constant(1, std::log(2.0));
  model.baseline_cumhaz = StepFunction::from_jumps({1.0, 3.0}, {0.1, 0.1});
  const SubjectRecord s = testing::subject("s", 5.0, false, 5.0, true, {1.0});

  // First jump: survival before it is 1.
  CHECK(conditional_density_mass(model, s, 1.0) ==
        doctest::Approx(0.2).epsilon(1e-15));
  // Second jump: 0.2 * exp(-0.2).
  CHECK(conditional_density_mass(model, s, 3.0) ==
        doctest::Approx(0.2 * std::exp(-0.2)).epsilon(1e-15));
  CHECK_THROWS_AS(conditional_density_mass(model, s, 2.0), Error);

  // Zero coefficients: mass equals the marginal jump times survival.
  model.coefficients = Eigen::VectorXd::Zero(1);
  CHECK(conditional_density_mass(model, s, 3.0) ==
        doctest::Approx(0.1 * std::exp(-0.1)).epsilon(1e-15));
}

TEST_CASE("post-fit score norm is tiny on random data") {
  Rng rng(2024);
  const Dataset ds = testing::random_dataset(rng, 60, 2);
  HazardSpec spec;
  spec.covariates = {"x0", "x1"};
  const FittedHazardModel model = fit_cox(ds, spec, CountingProcess::Death);
  const ScoreEvaluation ev = evaluate_cox_score(ds, spec, CountingProcess::Death,
                                                nullptr, model.coefficients);
  CHECK(ev.score.lpNorm<Eigen::Infinity>() < 1e-8);
}
