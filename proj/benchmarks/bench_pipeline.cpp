#include <benchmark/benchmark.h>

#include "itsurv/causal.hpp"
#include "itsurv/pipeline.hpp"
#include "itsurv/simlab.hpp"

namespace {

void BM_WeightedPipeline(benchmark::State& state) {
  itsurv::SimConfig cfg;
  cfg.n = static_cast<int>(state.range(0));
  cfg.lambda_inf = 0.01;
  cfg.treatment_rate = 0.08;
  cfg.gamma = 1.0;
  cfg.censoring_rate = 0.01;
  cfg.g1 = {0.0, 0.02};
  cfg.g2 = {0.0, -0.015};
  cfg.seed = 99;
  const itsurv::Dataset ds = itsurv::simulate_dataset(cfg);
  itsurv::PipelineConfig pipe;
  pipe.treatment_model.covariates = {"L"};
  for (auto _ : state) {
    auto res = itsurv::run_pipeline(ds, pipe);
    benchmark::DoNotOptimize(res.fit.beta.data());
  }
}
BENCHMARK(BM_WeightedPipeline)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SurvivalCurve(benchmark::State& state) {
  itsurv::SimConfig cfg;
  cfg.n = 1000;
  cfg.lambda_inf = 0.01;
  cfg.treatment_rate = 0.08;
  cfg.censoring_rate = 0.01;
  cfg.seed = 5;
  const itsurv::Dataset ds = itsurv::simulate_dataset(cfg);
  itsurv::PipelineConfig pipe;
  pipe.weighted = false;
  const itsurv::PipelineResult res = itsurv::run_pipeline(ds, pipe);
  for (auto _ : state) {
    auto curve = itsurv::survival_curve(res.fit, 8.0);
    benchmark::DoNotOptimize(curve.survival.data());
  }
}
BENCHMARK(BM_SurvivalCurve)->Unit(benchmark::kMillisecond);

}  // namespace
