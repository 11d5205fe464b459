#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "merw/analytic.hpp"
#include "merw/errors.hpp"
#include "merw/field_sampler.hpp"
#include "merw/mc_baseline.hpp"
#include "merw/path_ensemble.hpp"
#include "merw/pipeline.hpp"
#include "merw/scan_model.hpp"
#include "merw/tfim.hpp"

using namespace merw;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

// Input problems (bad flags, unreadable files) as opposed to numerical failures.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("failed writing " + path);
}

struct Couplings {
  double J = 1.0;
  std::optional<double> jh;
  std::optional<double> jv;
  double mu = 0.0;
  double beta = 1.0;

  void add(CLI::App* cmd, double default_j) {
    J = default_j;
    cmd->add_option("--J", J, "coupling for both directions")->capture_default_str();
    cmd->add_option("--jh", jh, "horizontal (intra-stripe) coupling, overrides --J");
    cmd->add_option("--jv", jv, "vertical (inter-stripe) coupling, overrides --J");
    cmd->add_option("--mu", mu, "external field")->capture_default_str();
    cmd->add_option("--beta", beta, "inverse temperature")->capture_default_str();
  }
  void apply(ModelParams& p) const {
    p.jh = jh.value_or(J);
    p.jv = jv.value_or(J);
    p.mu = mu;
    p.beta = beta;
  }
};

struct RepresentationFlags {
  bool dense = false;
  bool implicit = false;

  void add(CLI::App* cmd) {
    auto* d = cmd->add_flag("--dense", dense, "dense 2^w x 2^w operator");
    auto* i = cmd->add_flag("--implicit", implicit, "matrix-free Kronecker operator");
    d->excludes(i);
  }
  std::optional<Representation> value() const {
    if (dense) return Representation::dense;
    if (implicit) return Representation::implicit;
    return std::nullopt;
  }
};

InteractionSpec parse_kind(const std::string& kind) {
  if (kind == "ising") return InteractionSpec::ising();
  if (kind == "hard-square") return InteractionSpec::hard_square();
  throw InputError("unknown --kind " + kind + " (ising, hard-square)");
}

// ---------------------------------------------------------------------------

struct ModelCmd {
  int width = 10;
  bool cyclic = true;
  int before = 3;
  int after = 3;
  std::string kind = "ising";
  std::string out;
  Couplings couplings;
  RepresentationFlags rep;
  SolverOptions solver;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("model", "derive a scanning model and its per-node observables");
    cmd->add_option("--width", width, "stripe width")->capture_default_str();
    cmd->add_flag("--cyclic,!--open", cyclic, "cyclic stripes (default) or open ones");
    cmd->add_option("--before,-b", before, "context cells left of '?'")->capture_default_str();
    cmd->add_option("--after,-a", after, "context cells in the previous row")->capture_default_str();
    cmd->add_option("--kind", kind, "ising or hard-square")->capture_default_str();
    cmd->add_option("--out", out, "write the model as JSON");
    cmd->add_option("--tol", solver.tol, "eigensolver relative residual")->capture_default_str();
    cmd->add_option("--max-iter", solver.max_iter, "eigensolver iteration budget")->capture_default_str();
    couplings.add(cmd, 1.0);
    rep.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() const {
    ModelParams p;
    p.width = width;
    p.cyclic = cyclic;
    couplings.apply(p);
    const InteractionSpec spec = parse_kind(kind);
    const Representation r = rep.value().value_or(auto_representation(width));
    const ModelRun m = run_model(p, spec, before, after, r, solver);

    fmt::print("width={} cyclic={} beta={} mu={} jh={} jv={} before={} after={} kind={} representation={}\n", width,
               cyclic, p.beta, p.mu, p.jh, p.jv, before, after, kind,
               r == Representation::dense ? "dense" : "implicit");
    fmt::print("lambda={} iterations={} residual={:.3g}\n", g17(m.lambda), m.iterations, m.residual);
    fmt::print("U={}\nH={}\nmag={}\n", g17(m.observables.energy), g17(m.observables.entropy_bits),
               g17(m.observables.magnetization));
    if (spec.kind() == InteractionKind::hard_square) {
      fmt::print("capacity={}\n", g17(std::log2(m.lambda) / width));
    }
    if (has_exact_reference(p, spec)) {
      const ExactUH exact = exact_uh(p.jh, p.beta);
      fmt::print("exact U={} H={}{}\n", g17(exact.U), g17(exact.H), exact.near_critical ? " (near critical)" : "");
      fmt::print("err_U={:.3e} err_H={:.3e}\n", m.observables.energy - exact.U,
                 m.observables.entropy_bits - exact.H);
    }
    if (!out.empty()) {
      write_file(out, to_json(m.model));
      fmt::print("wrote {} (hash {})\n", out, model_hash(m.model));
    }
  }
};

struct SweepCmd {
  SweepSpec spec;
  RepresentationFlags rep;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("sweep", "model error against the exact solution over a range of J");
    cmd->add_option("--j-min", spec.j_min)->capture_default_str();
    cmd->add_option("--j-max", spec.j_max)->capture_default_str();
    cmd->add_option("--steps", spec.steps, "number of J values, endpoints included")->capture_default_str();
    cmd->add_option("--widths", spec.widths, "comma separated stripe widths")->delimiter(',')->capture_default_str();
    cmd->add_option("--before,-b", spec.before)->capture_default_str();
    cmd->add_option("--after,-a", spec.after)->capture_default_str();
    cmd->add_flag("--cyclic,!--open", spec.cyclic, "cyclic stripes (default) or open ones");
    cmd->add_option("--beta", spec.beta)->capture_default_str();
    cmd->add_option("--out", out, "CSV path (default: standard output)");
    rep.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    spec.representation = rep.value();
    const std::string csv = sweep_csv(run_sweep(spec));
    if (out.empty()) {
      fmt::print("{}", csv);
    } else {
      write_file(out, csv);
    }
  }
};

struct SampleCmd {
  std::string model_path;
  std::string out;
  std::string sidecar;
  int rows = 256;
  int cols = 256;
  std::uint64_t seed = 1;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("sample", "scan a random field from a saved model");
    cmd->add_option("--model", model_path, "model JSON written by `model --out`")->required();
    cmd->add_option("--out", out, "PBM output")->required();
    cmd->add_option("--sidecar", sidecar, "JSON sidecar (default: <out>.json)");
    cmd->add_option("--rows", rows)->capture_default_str();
    cmd->add_option("--cols", cols)->capture_default_str();
    cmd->add_option("--seed", seed)->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const ScanModel model = scan_model_from_json(read_file(model_path));
    const Field field = sample_field(model, reduced_models(model), rows, cols, seed);
    std::ostringstream pbm;
    write_pbm(pbm, field);
    write_file(out, pbm.str());
    const std::string side = sidecar.empty() ? out + ".json" : sidecar;
    write_file(side, field_sidecar_json(field));
    double mean = 0.0;
    for (auto c : field.cells) mean += c;
    mean /= static_cast<double>(field.cells.size());
    fmt::print("wrote {}x{} field to {} (sidecar {}), mean spin {:.6f}\n", rows, cols, out, side, mean);
  }
};

struct AnalyticCmd {
  double J = 0.2;
  double beta = 1.0;
  std::string rule = "gauss-kronrod";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("analytic", "exact zero-field energy and entropy per node");
    cmd->add_option("--J", J)->capture_default_str();
    cmd->add_option("--beta", beta)->capture_default_str();
    cmd->add_option("--rule", rule, "gauss-kronrod or tanh-sinh")
        ->check(CLI::IsMember({"gauss-kronrod", "tanh-sinh"}))
        ->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const ExactUH r =
        exact_uh(J, beta, rule == "tanh-sinh" ? QuadratureRule::tanh_sinh : QuadratureRule::gauss_kronrod);
    fmt::print("J={} beta={}\nU={}\nH={}\nquadrature_error={:.3g}\nnear_critical={}\nJ_c={}\n", J, beta, g17(r.U),
               g17(r.H), r.quadrature_error, r.near_critical, g17(critical_coupling(beta)));
  }
};

struct McCmd {
  McConfig cfg;
  Couplings couplings;
  std::string out;
  std::string field_out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("mc", "Metropolis baseline on a torus");
    cfg.report_every = 1000;
    cmd->add_option("--rows", cfg.rows)->capture_default_str();
    cmd->add_option("--cols", cfg.cols)->capture_default_str();
    cmd->add_option("--sweeps", cfg.sweeps)->capture_default_str();
    cmd->add_option("--burn-in", cfg.burn_in)->capture_default_str();
    cmd->add_option("--thin", cfg.thin)->capture_default_str();
    cmd->add_option("--seed", cfg.seed)->capture_default_str();
    cmd->add_option("--report-every", cfg.report_every, "sweeps between CSV rows")->capture_default_str();
    cmd->add_option("--out", out, "CSV path (default: standard output)");
    cmd->add_option("--field", field_out, "write the final configuration as PBM");
    couplings.add(cmd, 0.2);
    cmd->callback([this] { run(); });
  }

  void run() {
    couplings.apply(cfg.params);
    const McResult r = mh_run(cfg);
    std::string csv = "sweep_index,U,mag,stderr_U\n";
    for (const McEstimate& e : r.trace) csv += fmt::format("{},{},{},{}\n", e.sweep, g17(e.U), g17(e.mag), g17(e.stderr_U));
    const std::string summary =
        fmt::format("U={} +- {}\nmag={} +- {}\nacceptance={:.4f}\nmeasurements={}\n", g17(r.U), g17(r.stderr_U),
                    g17(r.mag), g17(r.stderr_mag), r.acceptance_rate, r.measurements);
    if (out.empty()) {
      fmt::print("{}", csv);
      fmt::print(stderr, "{}", summary);
    } else {
      write_file(out, csv);
      fmt::print("{}", summary);
    }
    if (!field_out.empty()) {
      std::ostringstream pbm;
      write_pbm(pbm, r.final_field);
      write_file(field_out, pbm.str());
    }
  }
};

struct TfimCmd {
  double J = 1.0;
  double h = 1.0;
  int lat = 100;
  std::string out;
  std::string header;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("tfim", "joint distribution of neighbouring angles in the classical TFIM chain");
    cmd->set_help_flag("--help", "print this help message and exit");
    cmd->add_option("--J", J)->capture_default_str();
    cmd->add_option("--h", h)->capture_default_str();
    cmd->add_option("--lat", lat, "angle grid size")->capture_default_str();
    cmd->add_option("--out", out, "CSV matrix path (default: standard output)");
    cmd->add_option("--header", header, "JSON header path (default: <out>.json)");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const JointAngleDistribution d = tfim_joint(J, h, lat);
    std::string csv;
    for (int i = 0; i < lat; ++i) {
      for (int j = 0; j < lat; ++j) {
        if (j) csv += ',';
        csv += g17(d(i, j));
      }
      csv += '\n';
    }
    if (out.empty()) {
      fmt::print("{}", csv);
      return;
    }
    write_file(out, csv);
    const std::string head = header.empty() ? out + ".json" : header;
    write_file(head, fmt::format("{{\"J\": {}, \"h\": {}, \"lat\": {}, \"lambda\": {}}}\n", g17(J), g17(h), lat,
                                 g17(d.lambda)));
    fmt::print("wrote {0}x{0} joint to {1} (header {2})\n", lat, out, head);
  }
};

struct PathCmd {
  std::string circuit;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("path", "per-layer distributions of a gate-built path ensemble");
    cmd->add_option("circuit", circuit, "circuit JSON")->required();
    cmd->add_option("--out", out, "JSON path (default: standard output)");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const EnsembleMarginals m = ensemble_distribution(ensemble_from_json(read_file(circuit)));
    std::string text = fmt::format("{{\n  \"log_partition\": {},\n  \"layers\": [\n", g17(m.log_partition));
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
      text += "    [";
      for (std::size_t i = 0; i < m.layers[k].size(); ++i) text += (i ? ", " : "") + g17(m.layers[k][i]);
      text += k + 1 < m.layers.size() ? "],\n" : "]\n";
    }
    text += "  ]\n}\n";
    if (out.empty()) {
      fmt::print("{}", text);
    } else {
      write_file(out, text);
    }
  }
};

struct MerminCmd {
  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("mermin", "Mermin inequality in a two-layer Boltzmann path ensemble");
    cmd->callback([] { run(); });
  }

  static void run() {
    const MerminResult r = mermin();
    fmt::print("Pr(A=B)={:.12g}\nPr(A=C)={:.12g}\nPr(B=C)={:.12g}\nsum={:.12g} {} 1: {}\n", r.ab, r.ac, r.bc, r.sum,
               r.violated ? "<" : ">=", r.violated ? "violated" : "satisfied");
  }
};

struct Sat3Cmd {
  std::string path;
  int top = 8;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("sat3", "3-SAT filtering through a Boltzmann path ensemble");
    cmd->add_option("cnf", path, "DIMACS CNF file, three literals per clause")->required();
    cmd->add_option("--top", top, "assignments to list")->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() const {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    const Cnf cnf = parse_dimacs(in);
    const std::vector<double> post = sat3_posterior(cnf);
    std::vector<std::size_t> order(post.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return post[a] > post[b]; });
    fmt::print("variables={} clauses={}\n", cnf.variables, cnf.clauses.size());
    for (int i = 0; i < top && i < static_cast<int>(order.size()); ++i) {
      const std::size_t x = order[static_cast<std::size_t>(i)];
      if (post[x] <= 1e-12) break;
      std::string lits;
      for (int v = 1; v <= cnf.variables; ++v) {
        const bool value = (x >> (cnf.variables - v)) & 1u;
        lits += fmt::format("{}{}", v > 1 ? " " : "", value ? v : -v);
      }
      fmt::print("assignment: {} posterior={:.10f}\n", lits, post[x]);
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transfer-operator (maximal entropy random walk) tools for Ising-like lattice models"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  ModelCmd model;
  SweepCmd sweep;
  SampleCmd sample;
  AnalyticCmd analytic;
  McCmd mc;
  TfimCmd tfim;
  PathCmd path;
  MerminCmd mermin_cmd;
  Sat3Cmd sat3;
  model.add(app);
  sweep.add(app);
  sample.add(app);
  analytic.add(app);
  mc.add(app);
  tfim.add(app);
  path.add(app);
  mermin_cmd.add(app);
  sat3.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitUsage;
  }
  return 0;
}
