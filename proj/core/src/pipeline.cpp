#include "itsurv/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "itsurv/errors.hpp"
#include "itsurv/parallel.hpp"

namespace itsurv {

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ITSURV_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const int workers = std::min<std::size_t>(resolve_thread_count(threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

bool has_event(const Dataset& ds, CountingProcess p) {
  return std::any_of(ds.subjects.begin(), ds.subjects.end(),
                     [&](const SubjectRecord& s) {
                       return process_point(s, p, ds.t_max).event;
                     });
}

}  // namespace

PipelineResult run_pipeline(const Dataset& ds, const PipelineConfig& config) {
  PipelineResult out;
  if (!config.weighted) {
    out.weights = WeightSet::unit(ds.size());
  } else {
    out.treatment_marginal = process_marginal(ds, CountingProcess::Initiation);
    if (config.treatment_model.dim() > 0 &&
        has_event(ds, CountingProcess::Initiation)) {
      out.treatment_model = fit_cox(ds, config.treatment_model,
                                    CountingProcess::Initiation, nullptr,
                                    config.weight_solver);
    } else {
      out.treatment_model = null_hazard_model(ds, CountingProcess::Initiation);
    }
    out.censoring_marginal = process_marginal(ds, CountingProcess::Censoring);
    if (config.censoring_model.dim() > 0 &&
        has_event(ds, CountingProcess::Censoring)) {
      out.censoring_model = fit_cox(ds, config.censoring_model,
                                    CountingProcess::Censoring, nullptr,
                                    config.weight_solver);
    } else {
      out.censoring_model = null_hazard_model(ds, CountingProcess::Censoring);
    }
    out.weights = weights_from_models(ds, out);
    if (config.truncate_quantile) {
      out.weights = truncate_weights(out.weights, config.truncate_quantile);
    }
  }

  const StructuralDesign design =
      config.design ? *config.design : design_from_data(ds);
  out.fit = fit_structural(ds, design, out.weights, config.solver);
  return out;
}

WeightSet weights_from_models(const Dataset& ds, const PipelineResult& models) {
  TreatmentWeights tw = estimate_treatment_weights(
      ds, *models.treatment_model, models.treatment_marginal);
  std::vector<StepFunction> cw = estimate_censoring_weights(
      ds, *models.censoring_model, models.censoring_marginal);
  return assemble_weights(std::move(tw), std::move(cw));
}

std::vector<PipelineResult> run_pipeline_stratified(const Dataset& ds,
                                                    const PipelineConfig& config) {
  const std::vector<std::string> labels = ds.strata_labels();
  std::vector<PipelineResult> out;
  if (labels.empty()) {
    out.push_back(run_pipeline(ds, config));
    return out;
  }
  for (const auto& label : labels) {
    Dataset subset = ds.stratum_subset(label);
    if (subset.subjects.empty()) continue;
    PipelineResult res = run_pipeline(subset, config);
    res.fit.stratum = label;
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace itsurv
