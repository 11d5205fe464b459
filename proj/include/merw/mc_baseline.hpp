#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "merw/field_sampler.hpp"
#include "merw/pattern_space.hpp"

namespace merw {

// Single-site random-scan Metropolis on a rows x cols torus. One sweep is
// rows*cols proposals. Measurements start after burn_in sweeps and are taken
// every `thin` sweeps. params.width and params.cyclic are unused.
struct McConfig {
  int rows = 64;
  int cols = 64;
  ModelParams params;
  int sweeps = 20000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  int report_every = 0;  // sweeps between running estimates; 0 = only at the end

  void validate() const;
};

struct McEstimate {
  int sweep = 0;
  double U = 0.0;
  double mag = 0.0;
  double stderr_U = 0.0;
};

struct McResult {
  double U = 0.0;
  double stderr_U = 0.0;
  double mag = 0.0;
  double stderr_mag = 0.0;
  std::vector<double> block_freq;  // 2x2 blocks, key (upper << 2) | lower
  std::vector<McEstimate> trace;
  Field final_field;
  double acceptance_rate = 0.0;
  std::size_t measurements = 0;
};

using McObserver = std::function<void(const McEstimate&, const Field&)>;

McResult mh_run(const McConfig& cfg, const McObserver& observer = {});

// Energy change of flipping spin s given its four neighbours:
// 2 s (mu + Jh (left + right) + Jv (up + down)).
double metropolis_delta_energy(int s, int left, int right, int up, int down, const ModelParams& params);
double acceptance_probability(double delta_energy, double beta);

// Per-node Ising energy on the torus.
double torus_energy_per_node(const Field& field, const ModelParams& params);

struct BatchMeans {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

// Contiguous batches; trailing samples that do not fill a batch are dropped.
BatchMeans batch_means(std::span<const double> samples, int batches = 20);

}  // namespace merw
