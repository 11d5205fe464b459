#include "merw/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include <fmt/format.h>

#include "merw/parallel.hpp"

namespace merw {

Representation auto_representation(int width) {
  return width <= kAutoDenseMaxWidth ? Representation::dense : Representation::implicit;
}

ModelRun run_model(const ModelParams& params, const InteractionSpec& spec, int before, int after,
                   std::optional<Representation> representation, const SolverOptions& options) {
  // Shape errors surface before any spectral work.
  (void)ContextShape::for_width(params.width, before, after);
  const TransferOperator op =
      TransferOperator::build(params, spec, representation.value_or(auto_representation(params.width)));
  const SpectralSolution sol = dominant_eigenpair(op, options);
  ScanModel model = derive_model(sol, op, before, after);
  const Observables obs = observables(model, spec);
  return ModelRun{sol.lambda, sol.iterations, sol.residual, std::move(model), obs};
}

bool has_exact_reference(const ModelParams& params, const InteractionSpec& spec) {
  return spec.kind() == InteractionKind::ising && params.mu == 0.0 && params.jh == params.jv && params.jh >= 0.0;
}

void SweepSpec::validate() const {
  if (!(j_min < j_max)) throw std::invalid_argument("sweep needs j_min < j_max");
  if (steps < 2) throw std::invalid_argument("sweep needs steps >= 2");
  if (j_min < 0.0) throw std::invalid_argument("sweep couplings must be >= 0");
  if (widths.empty()) throw std::invalid_argument("sweep needs at least one width");
}

std::vector<double> SweepSpec::couplings() const {
  std::vector<double> js(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) js[static_cast<std::size_t>(i)] = j_min + (j_max - j_min) * i / (steps - 1);
  js.back() = j_max;
  return js;
}

namespace {

SweepRow sweep_row(const SweepSpec& spec, double J, int width) {
  SweepRow row;
  row.J = J;
  row.width = width;
  try {
    ModelParams p;
    p.beta = spec.beta;
    p.jh = p.jv = J;
    p.width = width;
    p.cyclic = spec.cyclic;
    const ModelRun run = run_model(p, InteractionSpec::ising(), spec.before, spec.after, spec.representation,
                                   spec.solver);
    const ExactUH exact = exact_uh(J, spec.beta);
    row.U_merw = run.observables.energy;
    row.H_merw = run.observables.entropy_bits;
    row.U_exact = exact.U;
    row.H_exact = exact.H;
    row.err_U = row.U_merw - row.U_exact;
    row.err_H = row.H_merw - row.H_exact;
  } catch (const std::exception& e) {
    row.U_merw = row.H_merw = row.U_exact = row.H_exact = row.err_U = row.err_H = NAN;
    row.status = e.what();
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<std::pair<double, int>> jobs;
  for (double J : spec.couplings())
    for (int w : spec.widths) jobs.emplace_back(J, w);
  std::sort(jobs.begin(), jobs.end());

  std::vector<SweepRow> rows(jobs.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, worker_threads()));
  for (std::size_t start = 0; start < jobs.size(); start += workers) {
    std::vector<std::future<SweepRow>> batch;
    const std::size_t end = std::min(jobs.size(), start + workers);
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                 [&spec, job = jobs[i]] { return sweep_row(spec, job.first, job.second); }));
    }
    for (std::size_t i = start; i < end; ++i) rows[i] = batch[i - start].get();
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "J,width,U_merw,H_merw,U_exact,H_exact,err_U,err_H,status\n";
  for (const SweepRow& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out += fmt::format("{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.J, r.width, r.U_merw,
                       r.H_merw, r.U_exact, r.H_exact, r.err_U, r.err_H, status);
  }
  return out;
}

}  // namespace merw
