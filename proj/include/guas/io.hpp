#pragma once

#include "guas/analyzer.hpp"
#include "guas/matrix_core.hpp"
#include "guas/simulator.hpp"

#include <map>
#include <ostream>
#include <string>

namespace guas {

/// JSON input: {"B0": [[...]], "B1": [[...]], "P": [[...]]?, "label": "..."?,
/// "metadata": {"key": "value"}?}, matrices as row-major nested arrays.
struct ProblemFile {
  MatrixPair pair;
  std::string label;
  std::map<std::string, std::string> metadata;
};

/// Throws ParseError on malformed JSON or non-numeric entries and
/// DimensionMismatch / NotPositiveDefinite on the pair invariants.
ProblemFile parse_problem(const std::string& text);
ProblemFile read_problem(const std::string& path);

/// Round-trips bit-exactly through parse_problem.
std::string problem_to_json(const ProblemFile& problem);
void write_problem(const ProblemFile& problem, const std::string& path);

/// `binary:d1=v1,d2=v2,...` (durations d, values in {0,1}), `relaxed:...`
/// (values in [0,1]), `worst` or `badlocus`. Throws BadSignalSpec.
SwitchingSignal parse_signal(const std::string& spec);

/// t,x_1..x_n,norm[,y_1..y_m,lambda], %.17g.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

/// {conclusion, branch, margins, witness?, evidence?, tolerances, grid, ...};
/// non-finite numbers become null.
std::string verdict_to_json(const Verdict& verdict, int indent = 2);

/// Human-readable report.
std::string verdict_to_text(const Verdict& verdict);

}  // namespace guas
