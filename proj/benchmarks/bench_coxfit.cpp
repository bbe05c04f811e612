#include <benchmark/benchmark.h>

#include "itsurv/coxfit.hpp"
#include "itsurv/simlab.hpp"
#include "itsurv/structural.hpp"
#include "itsurv/weights.hpp"

namespace {

itsurv::Dataset bench_dataset(int n) {
  itsurv::SimConfig cfg;
  cfg.n = n;
  cfg.lambda_inf = 0.01;
  cfg.treatment_rate = 0.08;
  cfg.gamma = 1.0;
  cfg.censoring_rate = 0.01;
  cfg.g1 = {0.0, 0.02};
  cfg.g2 = {0.0, -0.015};
  cfg.seed = 12345;
  return itsurv::simulate_dataset(cfg);
}

void BM_CoxFitTreatmentModel(benchmark::State& state) {
  const itsurv::Dataset ds = bench_dataset(static_cast<int>(state.range(0)));
  itsurv::HazardSpec spec;
  spec.covariates = {"L"};
  for (auto _ : state) {
    auto model = itsurv::fit_cox(ds, spec, itsurv::CountingProcess::Initiation);
    benchmark::DoNotOptimize(model.coefficients.data());
  }
}
BENCHMARK(BM_CoxFitTreatmentModel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_StructuralFit(benchmark::State& state) {
  const itsurv::Dataset ds = bench_dataset(static_cast<int>(state.range(0)));
  const itsurv::StructuralDesign design = itsurv::design_from_data(ds);
  const itsurv::WeightSet ws = itsurv::WeightSet::unit(ds.size());
  for (auto _ : state) {
    auto fit = itsurv::fit_structural(ds, design, ws);
    benchmark::DoNotOptimize(fit.beta.data());
  }
}
BENCHMARK(BM_StructuralFit)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
