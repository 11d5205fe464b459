#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "merw/pattern_space.hpp"
#include "merw/scan_model.hpp"
#include "merw/spectral.hpp"
#include "merw/transfer_operator.hpp"

namespace merw {

// ---------------------------------------------------------------------------
// Homogeneous chains: products of M / lambda between the Perron amplitudes.
// ---------------------------------------------------------------------------

// Diagonal 0/1 matrix selecting the allowed patterns at one position.
class Projection {
 public:
  static Projection identity(std::size_t dimension);
  // Throws std::invalid_argument unless every entry is exactly 0 or 1.
  static Projection from_diagonal(std::vector<double> diagonal);
  // Throws std::invalid_argument for off-diagonal nonzeros or non-0/1 diagonals.
  static Projection from_matrix(const std::vector<std::vector<double>>& matrix);
  static Projection fix_pattern(int width, PatternIndex u);
  // Patterns whose bit at each listed position equals the paired value.
  static Projection fix_cells(int width, std::span<const std::pair<int, int>> position_bits);

  std::size_t dimension() const { return diag_.size(); }
  bool allows(PatternIndex u) const { return diag_[u] != 0.0; }
  std::span<const double> diagonal() const { return diag_; }

 private:
  std::vector<double> diag_;
};

// psi^T P_1 (M/lambda) P_2 ... (M/lambda) P_l psi
double projected_prob(const SpectralSolution& sol, const TransferOperator& op, std::span<const Projection> projections);

// Pr(u_1 ... u_l) = psi_u1 (M/lambda)_{u1 u2} ... psi_ul
double sequence_prob(const SpectralSolution& sol, const TransferOperator& op, std::span<const PatternIndex> patterns);

// Scan model whose context cells lie along the infinite direction: stripes
// run vertically, the b before-cells, '?' and the a after-cells occupy
// b + a consecutive stripes, and each context value is a projected_prob.
// Jh and Jv are swapped internally for the rotated stripes.
ScanModel vertical_context_model(const ModelParams& params, const InteractionSpec& spec, int before, int after,
                                 const SolverOptions& options = {});

// ---------------------------------------------------------------------------
// Inhomogeneous layered ensembles built from nonnegative gates.
// ---------------------------------------------------------------------------

enum class GateKind { mix, negate, split, or3, wire, controlled, custom };

// A gate is a nonnegative matrix from its input cells (rows, MSB-first in
// `inputs` order) to its output cells (columns, MSB-first in `outputs` order).
// A gate with no outputs is a pure weight on its inputs.
class Gate {
 public:
  // X = [[1, 1], [1, 1]]
  static Gate mix(int input, int output);
  // NOT permutation
  static Gate negate(int input, int output);
  // Fan-out: x -> (x, x); 2 x 4 matrix with the (1 0 0 1) diagonal pattern.
  static Gate split(int input, int out_a, int out_b);
  // Collapse: (x, y) -> x when x == y; 4 x 2 matrix.
  static Gate split_collapse(int in_a, int in_b, int output);
  // 8 x 2 OR table: column 0 only for input 000. A set bit i of `negated`
  // applies NOT to inputs[i] first (a row permutation of the table).
  static Gate or3(std::array<int, 3> inputs, int output, unsigned negated = 0);
  // Identity, or the finite-coupling kernel [[e^J, e^-J], [e^-J, e^J]].
  static Gate wire(int input, int output, std::optional<double> coupling = std::nullopt);
  // Block-diagonal diag(I, target) on (control, target cells).
  static Gate controlled(int control_in, int control_out, const Gate& target);
  static Gate custom(std::vector<int> inputs, std::vector<int> outputs, std::vector<double> matrix);

  GateKind kind() const { return kind_; }
  std::span<const int> inputs() const { return inputs_; }
  std::span<const int> outputs() const { return outputs_; }
  std::span<const double> matrix() const { return matrix_; }
  double weight(std::size_t in_key, std::size_t out_key) const {
    return matrix_[(in_key << outputs_.size()) | out_key];
  }

 private:
  Gate(GateKind kind, std::vector<int> inputs, std::vector<int> outputs, std::vector<double> matrix);

  GateKind kind_;
  std::vector<int> inputs_;
  std::vector<int> outputs_;
  std::vector<double> matrix_;
};

// Nonnegative transition M[x][y] from a layer of in_width cells to one of
// out_width cells, either as a dense matrix or as a product of gates:
// M[x][y] = prod_g G_g[x|inputs(g)][y|outputs(g)]. Every output cell is
// written by exactly one gate; inputs may be read by several gates.
class LayerTransition {
 public:
  static LayerTransition from_gates(int in_width, int out_width, std::vector<Gate> gates);
  static LayerTransition from_matrix(int in_width, int out_width, std::vector<double> matrix);

  int in_width() const { return in_width_; }
  int out_width() const { return out_width_; }

  // out[y] = sum_x a[x] M[x][y]
  void forward(std::span<const double> a, std::span<double> out) const;
  // out[x] = sum_y M[x][y] b[y]
  void backward(std::span<const double> b, std::span<double> out) const;
  std::vector<double> materialize() const;

 private:
  struct Entry {
    std::uint32_t bits;
    double weight;
  };
  template <typename Fn>
  void for_each_in_row(std::size_t x, Fn&& fn) const;

  int in_width_ = 0;
  int out_width_ = 0;
  std::vector<double> dense_;
  std::vector<Gate> gates_;
  // rows_[g][in_key]: nonzero entries of gate g's row, output bits already placed.
  std::vector<std::vector<std::vector<Entry>>> rows_;
};

inline constexpr int kMaxLayerWidth = 24;

// Pr(gamma) ~ psiL[gamma_1] M^1 ... M^{l-1} psiR[gamma_l].
class LayeredEnsemble {
 public:
  // psi vectors must be nonnegative and nonzero; they are rescaled to unit
  // sum of squares.
  LayeredEnsemble(std::vector<int> widths, std::vector<LayerTransition> transitions, std::vector<double> psi_left,
                  std::vector<double> psi_right);

  std::size_t layers() const { return widths_.size(); }
  std::span<const int> widths() const { return widths_; }
  std::span<const LayerTransition> transitions() const { return transitions_; }
  std::span<const double> psi_left() const { return psi_left_; }
  std::span<const double> psi_right() const { return psi_right_; }

 private:
  std::vector<int> widths_;
  std::vector<LayerTransition> transitions_;
  std::vector<double> psi_left_;
  std::vector<double> psi_right_;
};

struct EnsembleMarginals {
  std::vector<std::vector<double>> layers;  // exact per-layer state distributions
  double log_partition = 0.0;
};

// Forward-backward with per-layer rescaling; throws EmptyEnsembleError when
// every path has zero weight.
EnsembleMarginals ensemble_distribution(const LayeredEnsemble& ensemble);

// Marginal of a layer distribution on the listed cells (key MSB-first).
std::vector<double> cell_marginal(std::span<const double> distribution, int width, std::span<const int> positions);

// {"layers": [{"gates": [{"kind", "inputs", "outputs", ...}], "width"?}], "psiL", "psiR"}
LayeredEnsemble ensemble_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Demonstrations
// ---------------------------------------------------------------------------

struct MerminResult {
  double ab = 0.0;
  double ac = 0.0;
  double bc = 0.0;
  double sum = 0.0;
  bool violated = false;
};

// Three cells A, B, C with psiL = psiR = 0 on 000 and 111, 1/sqrt(6) elsewhere.
// The pair (first, second) is measured; X is applied to the remaining cell.
LayeredEnsemble mermin_ensemble(int first, int second);
MerminResult mermin();

struct Cnf {
  int variables = 0;
  std::vector<std::array<int, 3>> clauses;  // DIMACS literals: +v or -v, 1-based
};

inline constexpr int kSat3MaxVariables = 14;

// DIMACS CNF restricted to exactly three literals per clause.
Cnf parse_dimacs(std::istream& in);

// Layer 0: n variable cells (uniform psiL). Layer 1: X on every cell.
// Clause layers carry the n variables on wires plus the current clause's OR3
// output; the previous clause output is clamped to 1 by a weight-only gate,
// and psiR clamps the last clause output to 1.
LayeredEnsemble sat3_ensemble(const Cnf& cnf);

// Distribution over assignments (index MSB-first, variable 1 leftmost,
// true = 1) of the variable layer after mixing.
std::vector<double> sat3_posterior(const Cnf& cnf);

}  // namespace merw
