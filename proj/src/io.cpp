#include "guas/io.hpp"

#include "guas/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace guas {

using nlohmann::json;

namespace {

Matrix matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorCode::ParseError, name + " must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw Error(ErrorCode::ParseError, name + " row is not an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::DimensionMismatch, name + " has rows of different lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw Error(ErrorCode::ParseError, name + " has a non-numeric entry");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

std::vector<Segment> parse_segments(const std::string& body) {
  std::vector<Segment> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::BadSignalSpec, "segment '" + item + "' is not duration=value");
    }
    try {
      std::size_t used_d = 0;
      std::size_t used_v = 0;
      const std::string ds = item.substr(0, eq);
      const std::string vs = item.substr(eq + 1);
      Segment s{std::stod(ds, &used_d), std::stod(vs, &used_v)};
      if (used_d != ds.size() || used_v != vs.size()) throw std::invalid_argument(item);
      out.push_back(s);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::BadSignalSpec, "segment '" + item + "' is not numeric");
    }
  }
  if (out.empty()) throw Error(ErrorCode::BadSignalSpec, "no segments given");
  return out;
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "top level must be an object");
  if (!j.contains("B0") || !j.contains("B1")) {
    throw Error(ErrorCode::ParseError, "B0 and B1 are required");
  }
  ProblemFile out;
  std::optional<Matrix> p;
  if (j.contains("P") && !j["P"].is_null()) p = matrix_from_json(j["P"], "P");
  out.pair = make_pair(matrix_from_json(j["B0"], "B0"), matrix_from_json(j["B1"], "B1"), p);
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw Error(ErrorCode::ParseError, "label must be a string");
    out.label = j["label"].get<std::string>();
  }
  if (j.contains("metadata")) {
    if (!j["metadata"].is_object()) throw Error(ErrorCode::ParseError, "metadata must be an object");
    for (const auto& [key, value] : j["metadata"].items()) {
      if (!value.is_string()) throw Error(ErrorCode::ParseError, "metadata values must be strings");
      out.metadata[key] = value.get<std::string>();
    }
  }
  return out;
}

ProblemFile read_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string problem_to_json(const ProblemFile& problem) {
  json j;
  j["B0"] = matrix_to_json(problem.pair.b0);
  j["B1"] = matrix_to_json(problem.pair.b1);
  if (problem.pair.p) j["P"] = matrix_to_json(*problem.pair.p);
  if (!problem.label.empty()) j["label"] = problem.label;
  if (!problem.metadata.empty()) j["metadata"] = problem.metadata;
  return j.dump(2) + "\n";
}

void write_problem(const ProblemFile& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  out << problem_to_json(problem);
}

SwitchingSignal parse_signal(const std::string& spec) {
  if (spec == "worst") return Feedback{FeedbackRule::WorstCase, {}};
  if (spec == "badlocus") return Feedback{FeedbackRule::BadLocus, {}};
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  if (colon == std::string::npos || (kind != "binary" && kind != "relaxed")) {
    throw Error(ErrorCode::BadSignalSpec,
                "signal must be binary:..., relaxed:..., worst or badlocus");
  }
  std::vector<Segment> segs = parse_segments(spec.substr(colon + 1));
  SwitchingSignal out = kind == "binary" ? SwitchingSignal(BinaryPiecewise{std::move(segs)})
                                         : SwitchingSignal(RelaxedPiecewise{std::move(segs)});
  validate_signal(out);
  return out;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  const Eigen::Index m = traj.outputs.empty() ? 0 : traj.outputs.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  out << ",norm";
  if (traj.bilinear) {
    for (Eigen::Index i = 1; i <= m; ++i) out << ",y_" << i;
    out << ",lambda";
  }
  out << "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    put(traj.times[s]);
    for (Eigen::Index i = 0; i < n; ++i) {
      out << ",";
      put(traj.states[s](i));
    }
    out << ",";
    put(traj.norms[s]);
    if (traj.bilinear) {
      for (Eigen::Index i = 0; i < m; ++i) {
        out << ",";
        put(traj.outputs[s](i));
      }
      out << ",";
      put(traj.applied_lambda[s]);
    }
    out << "\n";
  }
}

std::string verdict_to_json(const Verdict& v, int indent) {
  json j;
  j["conclusion"] = std::string(to_string(v.conclusion));
  j["guas"] = certifies_guas(v.conclusion);
  j["branch"] = v.branch;
  j["dimension"] = v.dim;
  j["kernel_dimension"] = v.k;
  j["complement_dimension"] = v.k_prime;
  json margins = json::object();
  for (const auto& [name, value] : v.margins) margins[name] = number(value);
  j["margins"] = margins;
  if (v.witness) {
    j["witness"] = {{"lambda", number(v.witness->lambda)},
                    {"x_kernel", vector_json(v.witness->x_kernel)},
                    {"x_state", vector_json(v.witness->x_state)},
                    {"x_original", vector_json(v.witness->x_original)},
                    {"kalman_residual", number(v.witness->kalman_residual)}};
  }
  if (v.refutation) {
    j["refutation"] = {{"output_measure", number(v.refutation->output_measure)},
                       {"max_output", number(v.refutation->max_output)},
                       {"norm_drift", number(v.refutation->norm_drift)},
                       {"pass", v.refutation->pass}};
  }
  if (v.evidence) {
    json runs = json::array();
    for (const EvidenceRun& r : v.evidence->runs) {
      runs.push_back({{"origin", r.origin},
                      {"final_ratio", number(r.final_ratio)},
                      {"plateaued", r.plateaued}});
    }
    j["evidence"] = {{"max_ratio", number(v.evidence->max_ratio)},
                     {"worst_run", v.evidence->worst_run},
                     {"any_plateau", v.evidence->any_plateau},
                     {"horizon", v.evidence->options.horizon},
                     {"dt", v.evidence->options.dt},
                     {"seed", v.evidence->options.seed},
                     {"runs", runs}};
  }
  json tol = {{"tol", v.tol}};
  if (v.observability) {
    tol["kalman_zero_threshold"] = number(v.observability->tol);
    tol["kalman_certification_threshold"] = number(v.observability->certification_threshold);
  }
  j["tolerances"] = tol;
  json grid = {{"n_grid", v.n_grid}, {"g_resolution", v.g_resolution}};
  if (v.observability) {
    grid["lipschitz"] = number(v.observability->lipschitz);
    grid["resolution_ok"] = v.observability->grid_resolution_ok;
  }
  j["grid"] = grid;
  if (v.g_scan) {
    j["g_scan"] = {{"verdict", std::string(to_string(v.g_scan->verdict))},
                   {"coarse_clusters", v.g_scan->coarse.clusters.size()},
                   {"fine_clusters", v.g_scan->fine.clusters.size()},
                   {"shrink_ratios", v.g_scan->shrink_ratios}};
  }
  if (v.small_kernel) {
    j["small_kernel"] = {{"case", std::string(to_string(v.small_kernel->diagnostic))},
                         {"detail", v.small_kernel->detail}};
  }
  j["endpoints_consistent"] = v.endpoints_consistent;
  j["notes"] = v.notes;
  return j.dump(indent);
}

std::string verdict_to_text(const Verdict& v) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "conclusion: " << to_string(v.conclusion) << "\n";
  out << "reason:     " << v.branch << "\n";
  out << "dim = " << v.dim << ", dim K = " << v.k << ", dim K^perp = " << v.k_prime << "\n";
  for (const auto& [name, value] : v.margins) out << "  " << name << " = " << value << "\n";
  if (v.witness) {
    out << "witness: lambda* = " << std::setprecision(12) << v.witness->lambda
        << std::setprecision(6) << ", x* (K coordinates) = ["
        << v.witness->x_kernel.transpose() << "], |Kalman x*| = " << v.witness->kalman_residual
        << "\n";
    out << "  x* in original coordinates = [" << v.witness->x_original.transpose() << "]\n";
    out << "  the constant input refutes GUAS of the convexified system; the binary switched "
           "system is GUAS exactly when its convexification is\n";
  }
  if (v.refutation) {
    out << "refutation run: output measure " << v.refutation->output_measure << ", max |y| "
        << v.refutation->max_output << ", norm drift " << v.refutation->norm_drift
        << (v.refutation->pass ? " (ok)" : " (FAILED)") << "\n";
  }
  if (v.small_kernel) out << "small kernel: " << to_string(v.small_kernel->diagnostic) << "\n";
  if (v.g_scan) {
    out << "G scan: " << to_string(v.g_scan->verdict) << ", " << v.g_scan->coarse.clusters.size()
        << " coarse / " << v.g_scan->fine.clusters.size() << " fine clusters\n";
  }
  if (v.evidence) {
    out << "evidence: " << v.evidence->runs.size() << " worst-case runs over T = "
        << v.evidence->options.horizon << ", max final norm ratio " << v.evidence->max_ratio
        << (v.evidence->any_plateau ? ", some run plateaued" : ", all runs decaying") << "\n";
  }
  for (const std::string& n : v.notes) out << "note: " << n << "\n";
  return out.str();
}

}  // namespace guas
