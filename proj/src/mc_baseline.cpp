#include "merw/mc_baseline.hpp"

#include <cmath>
#include <stdexcept>

#include "merw/rng.hpp"

namespace merw {

void McConfig::validate() const {
  if (rows < 2 || cols < 2) throw std::invalid_argument("torus must be at least 2x2");
  if (!(sweeps > burn_in) || burn_in < 0) throw std::invalid_argument("need sweeps > burn_in >= 0");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (report_every < 0) throw std::invalid_argument("report_every must be >= 0");
  if (!(params.beta > 0.0)) throw std::invalid_argument("beta must be > 0");
}

double metropolis_delta_energy(int s, int left, int right, int up, int down, const ModelParams& params) {
  return 2.0 * s * (params.mu + params.jh * (left + right) + params.jv * (up + down));
}

double acceptance_probability(double delta_energy, double beta) {
  return delta_energy <= 0.0 ? 1.0 : std::exp(-beta * delta_energy);
}

double torus_energy_per_node(const Field& field, const ModelParams& params) {
  double e = 0.0;
  for (int r = 0; r < field.rows; ++r) {
    const int down = (r + 1) % field.rows;
    for (int c = 0; c < field.cols; ++c) {
      const int right = (c + 1) % field.cols;
      const int s = field.at(r, c);
      e -= params.mu * s + params.jh * s * field.at(r, right) + params.jv * s * field.at(down, c);
    }
  }
  return e / (static_cast<double>(field.rows) * field.cols);
}

BatchMeans batch_means(std::span<const double> samples, int batches) {
  if (batches < 2) throw std::invalid_argument("need at least two batches");
  const std::size_t per = samples.size() / static_cast<std::size_t>(batches);
  if (per == 0) throw std::invalid_argument("fewer samples than batches");
  std::vector<double> means(static_cast<std::size_t>(batches), 0.0);
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) s += samples[static_cast<std::size_t>(b) * per + i];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(per);
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= batches;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= (batches - 1);
  return BatchMeans{mean, std::sqrt(var / batches)};
}

McResult mh_run(const McConfig& cfg, const McObserver& observer) {
  cfg.validate();
  const int rows = cfg.rows;
  const int cols = cfg.cols;
  const std::uint64_t n = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols);
  const ModelParams& p = cfg.params;

  Field field;
  field.rows = rows;
  field.cols = cols;
  field.seed = cfg.seed;
  field.cells.resize(n);
  Rng rng(cfg.seed);
  for (auto& s : field.cells) s = (rng.next() >> 63) ? 1 : -1;

  // Acceptance only depends on s and the neighbour sums; tabulate it.
  // index: (s+1)/2 * 25 + (h+2) * 5 + (v+2), h and v in {-2..2}
  double table[50];
  for (int si = 0; si < 2; ++si)
    for (int h = -2; h <= 2; ++h)
      for (int v = -2; v <= 2; ++v) {
        const int s = 2 * si - 1;
        const double de = 2.0 * s * (p.mu + p.jh * h + p.jv * v);
        table[si * 25 + (h + 2) * 5 + (v + 2)] = acceptance_probability(de, p.beta);
      }

  McResult result;
  result.block_freq.assign(16, 0.0);
  std::vector<double> u_samples;
  std::vector<double> m_samples;
  std::uint64_t accepted = 0;
  std::uint64_t proposals = 0;

  auto spin = [&](int r, int c) -> std::int8_t& {
    return field.cells[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  };

  auto estimate = [&](int sweep) {
    McEstimate e;
    e.sweep = sweep;
    if (!u_samples.empty()) {
      double su = 0.0, sm = 0.0;
      for (double v : u_samples) su += v;
      for (double v : m_samples) sm += v;
      e.U = su / static_cast<double>(u_samples.size());
      e.mag = sm / static_cast<double>(m_samples.size());
      e.stderr_U = u_samples.size() >= 20 ? batch_means(u_samples).stderr_mean : NAN;
    } else {
      e.U = e.mag = e.stderr_U = NAN;
    }
    return e;
  };

  for (int sweep = 1; sweep <= cfg.sweeps; ++sweep) {
    for (std::uint64_t step = 0; step < n; ++step) {
      const std::uint64_t site = rng.below(n);
      const int r = static_cast<int>(site / static_cast<std::uint64_t>(cols));
      const int c = static_cast<int>(site % static_cast<std::uint64_t>(cols));
      std::int8_t& s = spin(r, c);
      const int h = spin(r, (c + cols - 1) % cols) + spin(r, (c + 1) % cols);
      const int v = spin((r + rows - 1) % rows, c) + spin((r + 1) % rows, c);
      const double acc = table[(s > 0 ? 25 : 0) + (h + 2) * 5 + (v + 2)];
      // Always draw, so the stream layout does not depend on the outcome.
      const double draw = rng.uniform01();
      ++proposals;
      if (draw < acc) {
        s = static_cast<std::int8_t>(-s);
        ++accepted;
      }
    }

    if (sweep > cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0) {
      u_samples.push_back(torus_energy_per_node(field, p));
      double m = 0.0;
      for (auto s : field.cells) m += s;
      m_samples.push_back(m / static_cast<double>(n));
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          const int c1 = (c + 1) % cols;
          const int r1 = (r + 1) % rows;
          const std::size_t top = (spin(r, c) > 0 ? 2u : 0u) | (spin(r, c1) > 0 ? 1u : 0u);
          const std::size_t bottom = (spin(r1, c) > 0 ? 2u : 0u) | (spin(r1, c1) > 0 ? 1u : 0u);
          result.block_freq[(top << 2) | bottom] += 1.0;
        }
      }
    }

    if (cfg.report_every > 0 && sweep % cfg.report_every == 0) {
      const McEstimate e = estimate(sweep);
      result.trace.push_back(e);
      if (observer) observer(e, field);
    }
  }

  const double blocks = static_cast<double>(u_samples.size()) * static_cast<double>(n);
  if (blocks > 0.0)
    for (double& f : result.block_freq) f /= blocks;
  result.measurements = u_samples.size();
  if (u_samples.size() >= 20) {
    const BatchMeans bu = batch_means(u_samples);
    const BatchMeans bm = batch_means(m_samples);
    result.stderr_U = bu.stderr_mean;
    result.stderr_mag = bm.stderr_mean;
  } else {
    result.stderr_U = result.stderr_mag = NAN;
  }
  const McEstimate final_estimate = estimate(cfg.sweeps);
  result.U = final_estimate.U;
  result.mag = final_estimate.mag;
  if (cfg.report_every == 0 || cfg.sweeps % cfg.report_every != 0) {
    result.trace.push_back(McEstimate{cfg.sweeps, result.U, result.mag, result.stderr_U});
    if (observer) observer(result.trace.back(), field);
  }
  result.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposals);
  result.final_field = std::move(field);
  return result;
}

}  // namespace merw
