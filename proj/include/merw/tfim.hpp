#pragma once

#include <cstdint>
#include <vector>

#include "merw/spectral.hpp"

namespace merw {

// alpha_k = 2 pi k / lat for k = 1..lat: the grid starts one step above 0 and
// ends at 2 pi.
struct AngleGrid {
  int lat = 0;
  std::vector<double> angles;

  static AngleGrid uniform(int lat);
};

inline constexpr int kTfimDenseLimit = 512;

// Joint distribution of neighbouring angles in the classical transverse-field
// chain E = -J sum sin a_i sin a_{i+1} - h sum cos a_i, beta folded into J, h.
struct JointAngleDistribution {
  AngleGrid grid;
  double J = 0.0;
  double h = 0.0;
  double lambda = 0.0;
  std::vector<double> prob;  // lat x lat, row-major: Pr(alpha_i = row, alpha_{i+1} = col)

  double operator()(int i, int j) const {
    return prob[static_cast<std::size_t>(i) * static_cast<std::size_t>(grid.lat) + static_cast<std::size_t>(j)];
  }
  std::vector<double> row_marginal() const;
  std::vector<double> col_marginal() const;
  // Pr(alpha_{i+1} = col | alpha_i = row), rows normalized.
  std::vector<double> conditional() const;
};

// Symmetrized bond energy -J sin a sin b - h (cos a + cos b) / 2.
double tfim_bond_energy(double J, double h, double a, double b);

JointAngleDistribution tfim_joint(double J, double h, int lat, const SolverOptions& options = {});

// Markov chain of grid indices (0-based) started from the stationary marginal.
std::vector<int> sample_angle_chain(const JointAngleDistribution& joint, std::size_t length, std::uint64_t seed);

}  // namespace merw
