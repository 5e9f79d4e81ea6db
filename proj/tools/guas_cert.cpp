// guas-cert: stability certificates for switched pairs {B0, B1} sharing a
// weak quadratic Lyapunov function.

#include "guas/analyzer.hpp"
#include "guas/builtin_examples.hpp"
#include "guas/error.hpp"
#include "guas/io.hpp"
#include "guas/simulator.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using namespace guas;

enum ExitCode { kGuas = 0, kNotGuas = 1, kInconclusive = 2, kPrecondition = 3, kInputError = 4 };

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::NotHurwitz:
    case ErrorCode::NoCommonWeakLyapunov:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::StructureViolation:
      return kPrecondition;
    case ErrorCode::InternalInconsistency:
    case ErrorCode::NoOutputs:
      return kInconclusive;
    default:
      return kInputError;
  }
}

int exit_code_for(Conclusion c) {
  if (certifies_guas(c)) return kGuas;
  if (c == Conclusion::NotGuasConstantInput) return kNotGuas;
  return kInconclusive;
}

Vector parse_vector(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, "'" + item + "' is not a number");
    }
  }
  if (vals.empty()) throw Error(ErrorCode::ParseError, "empty vector");
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

struct AnalyzeFlags {
  double tol = kDefaultTol;
  int grid = 257;
  double horizon = 100.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  bool json = false;
  bool no_evidence = false;
};

AnalyzeOptions to_options(const AnalyzeFlags& f) {
  AnalyzeOptions opt;
  opt.tol = f.tol;
  opt.n_grid = f.grid;
  opt.evidence = !f.no_evidence;
  opt.evidence_options.horizon = f.horizon;
  opt.evidence_options.dt = f.dt;
  opt.evidence_options.seed = f.seed;
  return opt;
}

void add_analyze_flags(CLI::App* cmd, AnalyzeFlags& f) {
  cmd->add_option("--tol", f.tol, "numerical tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--grid", f.grid, "lambda grid size")->check(CLI::Range(3, 1 << 20));
  cmd->add_option("--T", f.horizon, "evidence horizon")->check(CLI::PositiveNumber);
  cmd->add_option("--dt", f.dt, "evidence step")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "evidence seed");
  cmd->add_flag("--json", f.json, "JSON report");
  cmd->add_flag("--no-evidence", f.no_evidence, "skip the simulation evidence");
}

int run_analyze(const std::string& path, const AnalyzeFlags& flags) {
  const ProblemFile problem = read_problem(path);
  const Verdict v = analyze(problem.pair, to_options(flags));
  if (flags.json) {
    std::cout << verdict_to_json(v) << "\n";
  } else {
    if (!problem.label.empty()) std::cout << problem.label << "\n";
    std::cout << verdict_to_text(v);
  }
  return exit_code_for(v.conclusion);
}

struct SimulateFlags {
  std::string signal;
  std::string x0;
  double horizon = 10.0;
  double dt = 1e-3;
  std::string out;
};

int run_simulate(const std::string& path, const SimulateFlags& f) {
  const ProblemFile problem = read_problem(path);
  const SwitchingSignal signal = parse_signal(f.signal);
  const NormalizedPair np = normalize(problem.pair);
  const Vector x0 = parse_vector(f.x0);

  Trajectory traj;
  const auto* feedback = std::get_if<Feedback>(&signal);
  if (feedback && feedback->rule == FeedbackRule::BadLocus) {
    const KernelDecomposition decomp = common_kernel(np);
    const BlockFamily blocks = block_form(np, decomp);
    if (x0.size() != blocks.k()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "badlocus expects x0 in K coordinates (length " + std::to_string(blocks.k()) +
                      ")");
    }
    const LocusGeometry geom = make_geometry(blocks);
    const BadFeedbackRun run = bad_feedback_trajectory(geom, x0.normalized(), f.horizon, f.dt);
    traj = run.trajectory;
    if (run.exit_time) {
      std::cout << "left F at t = " << *run.exit_time << "\n";
    } else if (run.reached_n) {
      std::cout << "reached N at t = " << run.reached_n_time.value_or(0.0) << "\n";
    } else {
      std::cout << "stayed in F up to T = " << traj.horizon() << "\n";
    }
    std::cout << "output measure before exit: " << output_measure(traj) << "\n";
  } else {
    if (x0.size() != np.dim()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "x0 must have length " + std::to_string(np.dim()));
    }
    const Vector x0n = np.provenance.sqrt_p * x0;
    traj = integrate(np, signal, x0n, f.horizon, f.dt);
  }

  if (!f.out.empty()) {
    std::ofstream out(f.out);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + f.out + "'");
    write_trajectory_csv(traj, out);
  } else {
    write_trajectory_csv(traj, std::cout);
  }
  std::cerr << std::setprecision(10) << "final norm ratio: " << traj.final_ratio() << "\n";
  if (traj.horizon() > 0.0) {
    const OmegaLimitEstimate omega = estimate_omega_limit(traj, traj.horizon() / 4.0);
    std::cerr << "omega-limit radius: " << omega.radius
              << (omega.plateaued ? " (plateaued)" : " (still decaying)") << "\n";
  }
  return 0;
}

struct ExampleFlags {
  std::optional<double> a;
  std::optional<double> b;
  std::optional<int> q;
  std::string freqs;
  std::optional<double> d0;
  std::optional<double> d1;
  std::optional<std::string> family;
  std::string emit;
  AnalyzeFlags analyze;
};

void print_mason_extras(const BuiltinExample& ex) {
  const StrictLyapunovReport r = strict_lyapunov_2x2(ex.pair);
  std::cout << "strict quadratic Lyapunov search: " << r.verdict << "\n";
  std::cout << std::setprecision(8);
  for (int i = 0; i < 2; ++i) {
    const ConicReport& c = r.curves[i];
    std::cout << "  det M" << i << " = 0: vertices (" << c.vertices[0](0) << ", "
              << c.vertices[0](1) << "), (" << c.vertices[1](0) << ", " << c.vertices[1](1)
              << ")\n";
  }
  if (!r.restriction_note.empty()) std::cout << "  " << r.restriction_note << "\n";
}

int run_example(const std::string& name, const ExampleFlags& f) {
  ExampleParams params;
  params.a = f.a;
  params.b = f.b;
  params.q = f.q;
  if (!f.freqs.empty()) {
    const Vector v = parse_vector(f.freqs);
    params.freqs.assign(v.data(), v.data() + v.size());
  }
  params.d0 = f.d0;
  params.d1 = f.d1;
  params.family = f.family;
  const BuiltinExample ex = builtin_example(name, params);
  if (!f.emit.empty()) {
    ProblemFile pf{ex.pair, ex.name, {{"description", ex.description}}};
    write_problem(pf, f.emit);
  }
  const Verdict v = analyze(ex.pair, to_options(f.analyze));
  if (f.analyze.json) {
    std::cout << verdict_to_json(v) << "\n";
    return exit_code_for(v.conclusion);
  }
  std::cout << ex.name << ": " << ex.description << "\n";
  std::cout << "expected: " << ex.expected << "\n";
  if (ex.expected_conclusion) {
    std::cout << "expected conclusion: " << to_string(*ex.expected_conclusion) << "\n";
  }
  std::cout << verdict_to_text(v);
  if (ex.name == "mason") print_mason_extras(ex);
  return exit_code_for(v.conclusion);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify or refute global uniform asymptotic stability of a switched pair"};
  app.require_subcommand(1);

  std::string path;
  AnalyzeFlags analyze_flags;
  auto* analyze_cmd = app.add_subcommand("analyze", "analyze a problem file");
  analyze_cmd->add_option("file", path, "problem JSON")->required();
  add_analyze_flags(analyze_cmd, analyze_flags);

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a switching signal");
  sim_cmd->add_option("file", path, "problem JSON")->required();
  sim_cmd->add_option("--signal", sim.signal, "binary:d=v,... | relaxed:d=v,... | worst | badlocus")
      ->required();
  sim_cmd->add_option("--x0", sim.x0, "initial state, comma separated")->required();
  sim_cmd->add_option("--T", sim.horizon, "horizon")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--dt", sim.dt, "step")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--out", sim.out, "CSV output path (default stdout)");

  std::string name;
  ExampleFlags ex;
  auto* ex_cmd = app.add_subcommand("example", "run a built-in example");
  ex_cmd->add_option("name", name, "hurwitz | shared-output | kdeux | torus | mason")->required();
  ex_cmd->add_option("--a", ex.a, "kdeux: rotation rate of A0");
  ex_cmd->add_option("--b", ex.b, "kdeux: rotation rate of A1");
  ex_cmd->add_option("--q", ex.q, "torus: number of rotation blocks");
  ex_cmd->add_option("--freqs", ex.freqs, "torus: comma-separated rates");
  ex_cmd->add_option("--d0", ex.d0, "torus: -D0");
  ex_cmd->add_option("--d1", ex.d1, "torus: -D1");
  ex_cmd->add_option("--family", ex.family, "shared-output: 1 | 2; torus: torus | simple");
  ex_cmd->add_option("--emit", ex.emit, "also write the instance as a problem file");
  add_analyze_flags(ex_cmd, ex.analyze);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*analyze_cmd) return run_analyze(path, analyze_flags);
    if (*sim_cmd) return run_simulate(path, sim);
    if (*ex_cmd) return run_example(name, ex);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
