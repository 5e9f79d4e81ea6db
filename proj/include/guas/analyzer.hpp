#pragma once

#include "guas/bad_locus.hpp"
#include "guas/decomposition.hpp"
#include "guas/matrix_core.hpp"
#include "guas/observability.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace guas {

enum class Conclusion {
  GuasTrivialKernel,
  GuasDimKLe2,
  GuasGDiscrete,
  GuasCInjective,
  NotGuasConstantInput,
  Inconclusive,
};

/// GUAS_trivial_kernel, GUAS_dimK_le2, ... as used in reports.
std::string_view to_string(Conclusion c);
bool certifies_guas(Conclusion c);

struct EvidenceOptions {
  int n_random = 32;
  double horizon = 100.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  double plateau_tol = 1e-6;
};

struct EvidenceRun {
  std::string origin;  // "random #i" or "K basis #j"
  double final_ratio = 0.0;
  bool plateaued = false;
};

struct EvidenceSummary {
  std::vector<EvidenceRun> runs;
  double max_ratio = 0.0;
  std::size_t worst_run = 0;
  bool any_plateau = false;  // some run stopped decaying away from 0
  EvidenceOptions options;
};

/// Unobservable direction for a constant input.
struct Witness {
  double lambda = 0.0;
  Vector x_kernel;     // unit vector in K coordinates
  Vector x_state;      // the same vector in the normalized state space
  Vector x_original;   // pulled back through P^(-1/2)
  double kalman_residual = 0.0;
};

/// Constant-lambda bilinear run from the witness.
struct RefutationCheck {
  double output_measure = 0.0;
  double max_output = 0.0;
  double norm_drift = 0.0;
  bool pass = false;
};

struct AnalyzeOptions {
  double tol = kDefaultTol;
  int n_grid = 257;
  int g_resolution = 64;
  bool evidence = true;
  EvidenceOptions evidence_options;
  /// definitive verdicts need the kernel's rank margin above this
  double min_rank_margin = 1e3;
};

struct Verdict {
  Conclusion conclusion = Conclusion::Inconclusive;
  std::string branch;
  std::vector<std::pair<std::string, double>> margins;
  std::optional<Witness> witness;
  std::optional<EvidenceSummary> evidence;
  std::optional<RefutationCheck> refutation;
  std::vector<std::string> notes;

  Eigen::Index dim = 0;
  Eigen::Index k = 0;
  Eigen::Index k_prime = 0;
  double tol = kDefaultTol;
  int n_grid = 0;
  int g_resolution = 0;

  std::optional<ObservabilityReport> observability;
  std::optional<GScanReport> g_scan;
  std::optional<SmallKernelClassification> small_kernel;
  bool endpoints_consistent = true;
};

/// Full decision pipeline. P = pair.p when present, otherwise the identity.
/// Throws NotHurwitz or NoCommonWeakLyapunov before any analysis.
Verdict analyze(const MatrixPair& pair, const AnalyzeOptions& options = {});

/// Worst-case switching from random unit states and from every K-basis
/// direction. With `certified` set, a run that stops decaying throws
/// InternalInconsistency.
EvidenceSummary empirical_evidence(const NormalizedPair& pair, const KernelDecomposition& decomp,
                                   const EvidenceOptions& options, bool certified);

}  // namespace guas
