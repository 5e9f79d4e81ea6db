#include "guas/analyzer.hpp"

#include "guas/error.hpp"
#include "guas/parallel.hpp"
#include "guas/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace guas {

std::string_view to_string(Conclusion c) {
  switch (c) {
    case Conclusion::GuasTrivialKernel: return "GUAS_trivial_kernel";
    case Conclusion::GuasDimKLe2: return "GUAS_dimK_le2";
    case Conclusion::GuasGDiscrete: return "GUAS_G_discrete";
    case Conclusion::GuasCInjective: return "GUAS_C_injective";
    case Conclusion::NotGuasConstantInput: return "NOT_GUAS_constant_input";
    case Conclusion::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

bool certifies_guas(Conclusion c) {
  return c == Conclusion::GuasTrivialKernel || c == Conclusion::GuasDimKLe2 ||
         c == Conclusion::GuasGDiscrete || c == Conclusion::GuasCInjective;
}

EvidenceSummary empirical_evidence(const NormalizedPair& pair, const KernelDecomposition& decomp,
                                   const EvidenceOptions& options, bool certified) {
  const Eigen::Index d = pair.dim();
  std::vector<Vector> starts;
  std::vector<std::string> origins;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < options.n_random; ++i) {
    Vector x(d);
    for (Eigen::Index j = 0; j < d; ++j) x(j) = gauss(rng);
    starts.push_back(x.normalized());
    origins.push_back("random #" + std::to_string(i));
  }
  for (Eigen::Index j = 0; j < decomp.k; ++j) {
    starts.push_back(decomp.k_basis.col(j));
    origins.push_back("K basis #" + std::to_string(j));
  }

  EvidenceSummary out;
  out.options = options;
  out.runs.resize(starts.size());
  const double window = options.horizon / 4.0;
  const std::size_t steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(options.horizon / options.dt)));
  // enough samples to resolve the last window
  const std::size_t stride = std::max<std::size_t>(1, steps / 400);
  parallel_for(starts.size(), [&](std::size_t i) {
    const Trajectory traj =
        worst_case_switching(pair, starts[i], options.horizon, options.dt, kDefaultTol, stride);
    const OmegaLimitEstimate omega = estimate_omega_limit(traj, window, options.plateau_tol);
    out.runs[i] = {origins[i], traj.final_ratio(), omega.plateaued && omega.radius > 0.0};
  });
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    if (out.runs[i].final_ratio > out.max_ratio) {
      out.max_ratio = out.runs[i].final_ratio;
      out.worst_run = i;
    }
    out.any_plateau = out.any_plateau || out.runs[i].plateaued;
  }
  if (certified && out.any_plateau) {
    std::ostringstream msg;
    msg << "a certified GUAS pair has a worst-case run that stopped decaying (";
    for (const EvidenceRun& r : out.runs) {
      if (r.plateaued) {
        msg << r.origin << ", ratio " << r.final_ratio;
        break;
      }
    }
    msg << ")";
    throw Error(ErrorCode::InternalInconsistency, msg.str());
  }
  return out;
}

namespace {

RefutationCheck refute(const BlockFamily& blocks, const Witness& w, double scale) {
  RefutationCheck out;
  const Trajectory traj =
      integrate(blocks, RelaxedPiecewise{{{100.0, w.lambda}}}, w.x_kernel, 100.0, 1e-3);
  const double out_tol = 1e-6 * scale;
  out.output_measure = output_measure(traj, out_tol);
  for (const Vector& y : traj.outputs) out.max_output = std::max(out.max_output, y.norm());
  const double n0 = traj.norms.front();
  for (double n : traj.norms) out.norm_drift = std::max(out.norm_drift, std::abs(n - n0));
  out.pass = out.output_measure == 0.0 && out.norm_drift < 1e-8;
  return out;
}

void check_endpoints(const NormalizedPair& pair, const ObservabilityReport& obs, double tol,
                     Verdict& v) {
  for (int i = 0; i < 2; ++i) {
    const HurwitzObservabilityCheck check = hurwitz_observability_crosscheck(pair.b(i), tol);
    if (check.marginal) continue;
    const bool endpoint_observable =
        obs.endpoint_sigma.size() == 2 && obs.endpoint_sigma[i] > obs.tol;
    // Hurwitz B_i forces (C_i, A_i) observable on K as well
    const bool consistent = check.agree && (!check.hurwitz.hurwitz || endpoint_observable);
    if (!consistent) {
      v.endpoints_consistent = false;
      std::ostringstream msg;
      msg << "endpoint " << i << ": Hurwitz " << check.hurwitz.hurwitz << ", observable on ker S"
          << i << " " << check.observability.observable << ", sigma_min on K "
          << (obs.endpoint_sigma.size() == 2 ? obs.endpoint_sigma[i] : -1.0);
      throw Error(ErrorCode::InternalInconsistency, msg.str());
    }
  }
}

}  // namespace

Verdict analyze(const MatrixPair& raw, const AnalyzeOptions& options) {
  const double tol = options.tol;
  const MatrixPair pair = make_pair(raw.b0, raw.b1, raw.p, tol);
  for (int i = 0; i < 2; ++i) {
    const HurwitzResult h = is_hurwitz(i == 0 ? pair.b0 : pair.b1, tol);
    if (!h.hurwitz) {
      std::ostringstream msg;
      msg << "B" << i << " is not Hurwitz (spectral abscissa " << h.abscissa << ")";
      throw Error(ErrorCode::NotHurwitz, msg.str());
    }
  }
  const NormalizedPair np = normalize(pair, tol);

  Verdict v;
  v.tol = tol;
  v.n_grid = options.n_grid;
  v.g_resolution = options.g_resolution;
  v.dim = np.dim();

  const KernelDecomposition decomp = common_kernel(np, tol);
  v.k = decomp.k;
  v.k_prime = decomp.k_prime;
  v.margins.emplace_back("kernel_rank_margin", decomp.rank_margin);

  std::optional<BlockFamily> blocks;
  std::optional<ObservabilityReport> obs;
  if (decomp.k == 0) {
    v.conclusion = Conclusion::GuasTrivialKernel;
    v.branch = "common kernel is trivial: the weak Lyapunov function decreases strictly off 0";
    v.margins.emplace_back("smallest_stacked_singular_value",
                           decomp.singular_values.size() ? decomp.singular_values.minCoeff()
                                                         : kInf);
  } else {
    blocks = block_form(np, decomp);
    SweepOptions sweep_opts;
    sweep_opts.n_grid = options.n_grid;
    sweep_opts.tol = tol;
    obs = sweep_lambda(*blocks, sweep_opts);
    v.observability = obs;
    check_endpoints(np, *obs, tol, v);
    v.margins.emplace_back("observability_margin", obs->margin);
    v.margins.emplace_back("observability_margin_lambda", obs->margin_lambda);

    if (obs->verdict == SweepVerdict::FailsAt) {
      v.conclusion = Conclusion::NotGuasConstantInput;
      v.branch =
          "a constant input leaves the bilinear system unobservable; the convexified system, "
          "and with it the switched system, is not GUAS";
      Witness w;
      w.lambda = *obs->lambda_star;
      w.x_kernel = *obs->witness;
      w.x_state = decomp.k_basis * w.x_kernel;
      w.x_original = np.provenance.inv_sqrt_p * w.x_state;
      w.kalman_residual =
          (kalman_matrix(blocks->c(w.lambda), blocks->a(w.lambda)) * w.x_kernel).norm();
      v.margins.emplace_back("witness_kalman_residual", w.kalman_residual);
      v.refutation = refute(*blocks, w, obs->scale);
      if (!v.refutation->pass) {
        v.notes.emplace_back("the constant-input witness run did not keep the output at zero");
      }
      v.witness = std::move(w);
    } else if (obs->verdict == SweepVerdict::Inconclusive) {
      v.conclusion = Conclusion::Inconclusive;
      v.branch = "observability under constant inputs is numerically undecided";
      v.notes.emplace_back("smallest Kalman singular value lies between the failure and "
                           "certification thresholds");
    } else {
      SweepOptions c_opts = sweep_opts;
      const auto [c_min, c_arg] = min_sigma_c(*blocks, c_opts);
      const double c_threshold = 100.0 * tol * obs->scale;
      v.margins.emplace_back("min_sigma_c", c_min);
      v.margins.emplace_back("min_sigma_c_lambda", c_arg);
      if (c_min > c_threshold) {
        v.conclusion = Conclusion::GuasCInjective;
        v.branch = "C_lambda is injective for every lambda: the output never vanishes off 0";
      } else if (decomp.k <= 2) {
        v.small_kernel = kpetit_classify(*blocks, *obs);
        v.conclusion = Conclusion::GuasDimKLe2;
        v.branch =
            "dim K <= 2 and every constant input is observable: uniform observability follows";
        v.notes.emplace_back(v.small_kernel->detail);
      } else {
        const LocusGeometry geom = make_geometry(*blocks, tol);
        v.g_scan = scan_G(geom, options.g_resolution, tol);
        for (const std::string& n : v.g_scan->notes) v.notes.push_back(n);
        double worst_shrink = 0.0;
        for (double r : v.g_scan->shrink_ratios) worst_shrink = std::max(worst_shrink, r);
        v.margins.emplace_back("g_worst_shrink_ratio", worst_shrink);
        if (v.g_scan->verdict == GVerdict::Discrete) {
          v.conclusion = Conclusion::GuasGDiscrete;
          v.branch = "the tangency set G is discrete and every constant input is observable";
        } else {
          v.conclusion = Conclusion::Inconclusive;
          v.branch = "no proved sufficient condition applies";
          v.notes.emplace_back(
              "every constant input is observable; only the open conjecture (observability for "
              "all constant inputs implies GUAS) would upgrade this verdict");
        }
      }
    }
  }

  const bool definitive = v.conclusion != Conclusion::Inconclusive;
  if (definitive && decomp.k > 0 && decomp.rank_margin < options.min_rank_margin) {
    std::ostringstream msg;
    msg << "downgraded from " << to_string(v.conclusion) << ": the kernel rank margin "
        << decomp.rank_margin << " is below " << options.min_rank_margin;
    v.notes.push_back(msg.str());
    v.conclusion = Conclusion::Inconclusive;
  }

  if (options.evidence) {
    v.evidence = empirical_evidence(np, decomp, options.evidence_options,
                                    certifies_guas(v.conclusion));
  }
  return v;
}

}  // namespace guas
