#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "itsurv/errors.hpp"
#include "itsurv/rng.hpp"
#include "itsurv/survcore.hpp"
#include "test_helpers.hpp"

using namespace itsurv;

TEST_CASE("nelson-aalen on three subjects") {
  const StepFunction na = nelson_aalen({1.0, 2.0, 3.0}, {1, 1, 0});
  CHECK(na.value(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(na.value(2.0) == doctest::Approx(1.0 / 3.0 + 0.5).epsilon(1e-15));
  CHECK(na.value(3.0) == doctest::Approx(1.0 / 3.0 + 0.5).epsilon(1e-15));
  CHECK(na.size() == 2);
}

TEST_CASE("nelson-aalen edge cases") {
  CHECK(nelson_aalen({1.0, 2.0}, {0, 0}).size() == 0);
  const StepFunction all = nelson_aalen({5.0, 5.0, 5.0}, {1, 1, 1});
  REQUIRE(all.size() == 1);
  CHECK(all.value(5.0) == 1.0);
  CHECK_THROWS_AS(nelson_aalen({}, {}), ConfigError);
}

TEST_CASE("ties: censorings at an event time stay in the risk set") {
  const StepFunction na = nelson_aalen({2.0, 2.0, 3.0}, {1, 0, 1});
  CHECK(na.value(2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(na.value(3.0) == doctest::Approx(1.0 / 3.0 + 1.0).epsilon(1e-15));
}

TEST_CASE("marginal law from a single jump") {
  const MarginalLaw law = to_marginal_law(StepFunction::from_jumps({1.0}, {1.0 / 3.0}));
  CHECK(law.cdf(1.0) == doctest::Approx(1.0 - std::exp(-1.0 / 3.0)).epsilon(1e-15));
  CHECK(law.density_mass(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(law.cdf(0.5) == 0.0);
  CHECK_THROWS_AS(law.density_mass(0.5), Error);
}

TEST_CASE("marginal law of the three-subject hazard") {
  const MarginalLaw law =
      to_marginal_law(nelson_aalen({1.0, 2.0, 3.0}, {1, 1, 0}));
  CHECK(law.cdf(2.0) ==
        doctest::Approx(1.0 - std::exp(-(1.0 / 3.0 + 0.5))).epsilon(1e-15));
  // Density masses recompose into CDF increments.
  double mass_sum = 0.0;
  for (std::size_t k = 0; k < law.cumhaz.size(); ++k) {
    mass_sum += law.density[k];
  }
  CHECK(std::abs(mass_sum - law.cdf(law.cumhaz.times().back())) <= 1e-12);
}

TEST_CASE("zero hazard gives zero cdf and no mass") {
  const MarginalLaw law = to_marginal_law(StepFunction());
  CHECK(law.cdf(10.0) == 0.0);
  CHECK(law.density.empty());
  CHECK_THROWS_AS(to_marginal_law(StepFunction::from_jumps({1.0}, {-0.1})),
                  ConfigError);
}

TEST_CASE("risk indicator is closed at the exit time") {
  const SubjectRecord s = testing::subject("r", 5.0, true, 10.0, true);
  CHECK(risk_indicator(s, 5.0));
  CHECK(risk_indicator(s, 10.0));
  CHECK_FALSE(risk_indicator(s, 10.5));
}

TEST_CASE("uncensored nelson-aalen matches the empirical cdf within O(1/n)") {
  Rng rng(7);
  const int n = 1000;
  std::vector<double> times(n);
  std::vector<std::uint8_t> events(n, 1);
  for (auto& t : times) t = rng.exponential(0.2);
  const MarginalLaw law = to_marginal_law(nelson_aalen(times, events));
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const double ecdf = static_cast<double>(k + 1) / n;
    worst = std::max(worst, std::abs(law.cdf(sorted[k]) - ecdf));
  }
  CHECK(worst < 2.0 / n);
}

TEST_CASE("process extraction honors the censoring conventions") {
  const Dataset ds = testing::dataset({
      testing::subject("i", 3.0, true, 9.0, true),     // initiation + death
      testing::subject("c", 5.0, false, 5.0, false),   // loss to follow-up
      testing::subject("x", 9.0, false, 9.0, false),   // administrative end
  });
  REQUIRE(ds.t_max == 9.0);
  const ProcessPoint init = process_point(ds.subjects[0], CountingProcess::Initiation, ds.t_max);
  CHECK(init.exit == 3.0);
  CHECK(init.event);
  const ProcessPoint cens = process_point(ds.subjects[1], CountingProcess::Censoring, ds.t_max);
  CHECK(cens.event);
  const ProcessPoint admin = process_point(ds.subjects[2], CountingProcess::Censoring, ds.t_max);
  CHECK_FALSE(admin.event);  // administrative end is not a censoring event
  const ProcessPoint death = process_point(ds.subjects[0], CountingProcess::Death, ds.t_max);
  CHECK(death.exit == 9.0);
  CHECK(death.event);
}
