#pragma once

#include <optional>
#include <string>
#include <vector>

#include "merw/analytic.hpp"
#include "merw/pattern_space.hpp"
#include "merw/scan_model.hpp"
#include "merw/spectral.hpp"
#include "merw/transfer_operator.hpp"

namespace merw {

// Dense up to this width, implicit above.
inline constexpr int kAutoDenseMaxWidth = 12;

Representation auto_representation(int width);

struct ModelRun {
  double lambda = 0.0;
  int iterations = 0;
  double residual = 0.0;
  ScanModel model;
  Observables observables;
};

ModelRun run_model(const ModelParams& params, const InteractionSpec& spec, int before, int after,
                   std::optional<Representation> representation = std::nullopt, const SolverOptions& options = {});

// Exact comparison is defined for the isotropic zero-field Ising case only.
bool has_exact_reference(const ModelParams& params, const InteractionSpec& spec);

struct SweepSpec {
  double j_min = 0.05;
  double j_max = 1.0;
  int steps = 20;
  std::vector<int> widths{12};
  int before = 3;
  int after = 3;
  bool cyclic = true;
  double beta = 1.0;
  std::optional<Representation> representation;
  SolverOptions solver;

  void validate() const;
  std::vector<double> couplings() const;  // steps points from j_min to j_max inclusive
};

struct SweepRow {
  double J = 0.0;
  int width = 0;
  double U_merw = 0.0;
  double H_merw = 0.0;
  double U_exact = 0.0;
  double H_exact = 0.0;
  double err_U = 0.0;  // U_merw - U_exact
  double err_H = 0.0;
  std::string status = "ok";
};

// Rows run concurrently (bounded by MERW_THREADS) and come back sorted by
// (J, width). A failing row keeps its status message and NaN values.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace merw
