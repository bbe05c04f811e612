#include <benchmark/benchmark.h>

#include <vector>

#include "itsurv/splines.hpp"
#include "itsurv/structural.hpp"

namespace {

void BM_BasisEvaluate(benchmark::State& state) {
  const itsurv::SplineBasis basis({4.0, 8.0, 16.0}, {0.0, 40.0});
  std::vector<double> out(basis.dim());
  double x = 0.0;
  for (auto _ : state) {
    basis.evaluate(x, out.data());
    benchmark::DoNotOptimize(out.data());
    x += 0.1;
    if (x > 45.0) x = 0.0;
  }
}
BENCHMARK(BM_BasisEvaluate);

void BM_DesignRow(benchmark::State& state) {
  const itsurv::StructuralDesign design(
      itsurv::SplineBasis({4.0, 8.0, 16.0}, {0.0, 40.0}),
      itsurv::SplineBasis({5.0, 12.0, 25.0}, {0.0, 78.0}),
      itsurv::SplineBasis({30.0, 90.0, 200.0}, {0.0, 1600.0}));
  std::vector<double> out(design.dim());
  double t = 1.0;
  for (auto _ : state) {
    design.row(8.0, t, out.data());
    benchmark::DoNotOptimize(out.data());
    t += 0.25;
    if (t > 78.0) t = 1.0;
  }
}
BENCHMARK(BM_DesignRow);

}  // namespace
