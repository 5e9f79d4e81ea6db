#include "guas/simulator.hpp"

#include "guas/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace guas {

namespace {

struct Dynamics {
  std::function<Matrix(double)> matrix;
  // empty for the full system
  std::function<Vector(double, const Vector&)> output;
  const NormalizedPair* pair = nullptr;
  const LocusGeometry* geometry = nullptr;
  double norm_bound = 0.0;
};

class ExpCache {
 public:
  ExpCache(const Dynamics& dyn, double dt) : dyn_(dyn), dt_(dt) {}
  const Matrix& get(double lambda) {
    for (const auto& [l, m] : cache_) {
      if (l == lambda) return m;
    }
    cache_.emplace_back(lambda, expm(dt_ * dyn_.matrix(lambda)));
    return cache_.back().second;
  }

 private:
  const Dynamics& dyn_;
  double dt_;
  std::vector<std::pair<double, Matrix>> cache_;
};

std::size_t step_count(double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "horizon and dt must be positive");
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(horizon / dt)));
}

/// Per-step values of a piecewise-constant signal, switch times snapped to
/// the nearest step.
std::vector<double> snap_segments(const std::vector<Segment>& segments, std::size_t steps,
                                  double dt) {
  std::vector<double> values(steps, segments.empty() ? 0.0 : segments.back().value);
  double t = 0.0;
  std::size_t begin = 0;
  for (const Segment& s : segments) {
    t += s.duration;
    const auto end = std::min<std::size_t>(steps, static_cast<std::size_t>(std::llround(t / dt)));
    for (std::size_t j = begin; j < end; ++j) values[j] = s.value;
    begin = std::max(begin, end);
    if (begin >= steps) break;
  }
  return values;
}

double bad_locus_lambda(const LocusGeometry& geom, const Vector& x, double previous, bool& held) {
  const Vector u = geom.blocks.c0 * x;
  const Vector v = geom.blocks.c1 * x;
  const Vector d = u - v;
  const double nx = x.norm();
  if (d.norm() < geom.tol * geom.scale * std::max(nx, 1e-300)) {
    held = true;
    return previous;
  }
  held = false;
  return std::clamp(d.dot(u) / d.squaredNorm(), 0.0, 1.0);
}

class Recorder {
 public:
  Recorder(Trajectory& traj, const Dynamics& dyn, std::size_t stride)
      : traj_(traj), dyn_(dyn), stride_(std::max<std::size_t>(1, stride)) {}

  void record(std::size_t step, double t, const Vector& x, double lambda, bool held, bool force) {
    if (!force && step % stride_ != 0) return;
    traj_.times.push_back(t);
    traj_.states.push_back(x);
    traj_.norms.push_back(x.norm());
    traj_.applied_lambda.push_back(lambda);
    traj_.held.push_back(held);
    if (dyn_.output) traj_.outputs.push_back(dyn_.output(lambda, x));
  }

 private:
  Trajectory& traj_;
  const Dynamics& dyn_;
  std::size_t stride_;
};

Trajectory run(const Dynamics& dyn, const SwitchingSignal& signal, const Vector& x0,
               double horizon, double dt, std::size_t stride, double tol) {
  validate_signal(signal);
  const std::size_t steps = step_count(horizon, dt);
  Trajectory traj;
  traj.dt = dt;
  traj.bilinear = static_cast<bool>(dyn.output);
  const double x0n = x0.norm();
  const double roundoff = 1e-12 * x0n;
  const double rk4_bound = 10.0 * std::pow(dt * dyn.norm_bound, 5.0) * x0n + roundoff;

  const auto* feedback = std::get_if<Feedback>(&signal);
  std::vector<double> schedule;
  if (const auto* b = std::get_if<BinaryPiecewise>(&signal)) {
    schedule = snap_segments(b->segments, steps, dt);
  } else if (const auto* r = std::get_if<RelaxedPiecewise>(&signal)) {
    schedule = snap_segments(r->segments, steps, dt);
  }
  const bool uses_rk4 = feedback && feedback->rule != FeedbackRule::WorstCase;
  traj.step_error_bound = uses_rk4 ? rk4_bound : roundoff;

  if (feedback && feedback->rule == FeedbackRule::WorstCase && !dyn.pair) {
    throw Error(ErrorCode::InvalidArgument, "worst-case switching needs the full system");
  }
  if (feedback && feedback->rule == FeedbackRule::BadLocus && !dyn.geometry) {
    throw Error(ErrorCode::InvalidArgument, "bad-locus feedback needs the bilinear system");
  }
  if (feedback && feedback->rule == FeedbackRule::Custom && !feedback->custom) {
    throw Error(ErrorCode::BadSignalSpec, "custom feedback without a rule");
  }

  ExpCache cache(dyn, dt);
  Recorder rec(traj, dyn, stride);
  Vector x = x0;
  Vector next(x0.size());
  Vector work(x0.size());
  double previous = 0.0;
  Matrix s_diff;
  double wc_scale = 1.0;
  if (dyn.pair) {
    s_diff = dyn.pair->s1 - dyn.pair->s0;
    wc_scale = 1.0 + std::max(dyn.pair->s0.norm(), dyn.pair->s1.norm());
  }

  auto feedback_lambda = [&](const Vector& state, bool& held) -> double {
    held = false;
    switch (feedback->rule) {
      case FeedbackRule::WorstCase: {
        work.noalias() = s_diff * state;
        const double gap = state.dot(work);
        if (std::abs(gap) <= tol * wc_scale * state.squaredNorm()) {
          held = true;
          return previous;
        }
        return gap > 0.0 ? 1.0 : 0.0;
      }
      case FeedbackRule::BadLocus:
        return bad_locus_lambda(*dyn.geometry, state, previous, held);
      case FeedbackRule::Custom:
        return std::clamp(feedback->custom(state), 0.0, 1.0);
    }
    return previous;
  };

  double x_norm = x0n;
  for (std::size_t j = 0; j < steps; ++j) {
    const double t = static_cast<double>(j) * dt;
    double lambda = 0.0;
    bool held = false;
    if (!feedback) {
      lambda = schedule[j];
      next.noalias() = cache.get(lambda) * x;
    } else if (feedback->rule == FeedbackRule::WorstCase) {
      lambda = feedback_lambda(x, held);
      next.noalias() = cache.get(lambda) * x;
    } else {
      lambda = feedback_lambda(x, held);
      auto field = [&](const Vector& s) {
        bool stage_held = false;
        const double l = feedback_lambda(s, stage_held);
        return Vector(dyn.matrix(l) * s);
      };
      const Vector k1 = dyn.matrix(lambda) * x;
      const Vector k2 = field(x + 0.5 * dt * k1);
      const Vector k3 = field(x + 0.5 * dt * k2);
      const Vector k4 = field(x + dt * k3);
      next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    rec.record(j, t, x, lambda, held, j == 0);
    previous = lambda;

    const double next_norm = next.norm();
    const double increase = next_norm - x_norm;
    traj.max_norm_increase = std::max(traj.max_norm_increase, increase);
    if (increase > traj.step_error_bound) {
      std::ostringstream msg;
      msg << "norm increased by " << increase << " at t = " << t << " (bound "
          << traj.step_error_bound << "); reduce dt";
      throw Error(ErrorCode::StepTooLarge, msg.str());
    }
    x.swap(next);
    x_norm = next_norm;
  }
  rec.record(steps, static_cast<double>(steps) * dt, x, previous, false, true);
  return traj;
}

Dynamics full_dynamics(const NormalizedPair& pair) {
  Dynamics dyn;
  dyn.pair = &pair;
  dyn.matrix = [&pair](double lambda) { return convex_combination(pair, lambda); };
  dyn.norm_bound = std::max(spectral_norm(pair.b0), spectral_norm(pair.b1));
  return dyn;
}

Dynamics bilinear_dynamics(const BlockFamily& blocks) {
  Dynamics dyn;
  dyn.matrix = [&blocks](double lambda) { return blocks.a(lambda); };
  dyn.output = [&blocks](double lambda, const Vector& x) { return Vector(blocks.c(lambda) * x); };
  dyn.norm_bound = std::max(blocks.a0.size() ? spectral_norm(blocks.a0) : 0.0,
                            blocks.a1.size() ? spectral_norm(blocks.a1) : 0.0);
  return dyn;
}

void check_state(const Vector& x0, Eigen::Index dim) {
  if (x0.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "initial state has length " +
                                                  std::to_string(x0.size()) + ", expected " +
                                                  std::to_string(dim));
  }
}

}  // namespace

void validate_signal(const SwitchingSignal& signal) {
  auto check_segments = [](const std::vector<Segment>& segs, bool binary) {
    for (const Segment& s : segs) {
      if (!(s.duration > 0.0)) {
        throw Error(ErrorCode::BadSignalSpec, "segment durations must be positive");
      }
      if (binary ? !(s.value == 0.0 || s.value == 1.0) : !(s.value >= 0.0 && s.value <= 1.0)) {
        throw Error(ErrorCode::BadSignalSpec,
                    "segment value " + std::to_string(s.value) + " out of range");
      }
    }
  };
  if (const auto* b = std::get_if<BinaryPiecewise>(&signal)) check_segments(b->segments, true);
  if (const auto* r = std::get_if<RelaxedPiecewise>(&signal)) check_segments(r->segments, false);
}

Trajectory integrate(const NormalizedPair& pair, const SwitchingSignal& signal, const Vector& x0,
                     double horizon, double dt, std::size_t record_stride) {
  check_state(x0, pair.dim());
  const Dynamics dyn = full_dynamics(pair);
  return run(dyn, signal, x0, horizon, dt, record_stride, kDefaultTol);
}

Trajectory integrate(const BlockFamily& blocks, const SwitchingSignal& signal, const Vector& x0,
                     double horizon, double dt, std::size_t record_stride) {
  check_state(x0, blocks.k());
  Dynamics dyn = bilinear_dynamics(blocks);
  std::optional<LocusGeometry> geom;
  if (const auto* f = std::get_if<Feedback>(&signal); f && f->rule == FeedbackRule::BadLocus) {
    geom = make_geometry(blocks);
    dyn.geometry = &*geom;
  }
  return run(dyn, signal, x0, horizon, dt, record_stride, kDefaultTol);
}

Trajectory worst_case_switching(const NormalizedPair& pair, const Vector& x0, double horizon,
                                double dt, double tol, std::size_t record_stride) {
  check_state(x0, pair.dim());
  const Dynamics dyn = full_dynamics(pair);
  return run(dyn, Feedback{FeedbackRule::WorstCase, {}}, x0, horizon, dt, record_stride, tol);
}

BadFeedbackRun bad_feedback_trajectory(const LocusGeometry& geom, const Vector& x0,
                                       double horizon, double dt, double tol) {
  check_state(x0, geom.k);
  if (std::abs(x0.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "initial state must have unit norm");
  }
  if (!in_F(geom, x0, tol)) {
    throw Error(ErrorCode::NotInF, "initial state is not in F");
  }
  const std::size_t steps = step_count(horizon, dt);
  Dynamics dyn = bilinear_dynamics(geom.blocks);
  dyn.geometry = &geom;

  BadFeedbackRun out;
  Trajectory& traj = out.trajectory;
  traj.dt = dt;
  traj.bilinear = true;
  traj.step_error_bound = 10.0 * std::pow(dt * dyn.norm_bound, 5.0) + 1e-12;
  Recorder rec(traj, dyn, 1);

  Vector x = x0;
  double previous = 0.0;
  bool held = false;
  if (in_N(geom, x, tol)) {
    out.reached_n = true;
    out.reached_n_time = 0.0;
    rec.record(0, 0.0, x, previous, true, true);
    return out;
  }
  previous = bad_locus_lambda(geom, x, previous, held);

  for (std::size_t j = 0; j < steps; ++j) {
    const double t = static_cast<double>(j) * dt;
    const double lambda = bad_locus_lambda(geom, x, previous, held);
    rec.record(j, t, x, lambda, held, true);
    auto field = [&](const Vector& s) {
      bool h = false;
      return Vector(geom.blocks.a(bad_locus_lambda(geom, s, lambda, h)) * s);
    };
    const Vector k1 = geom.blocks.a(lambda) * x;
    const Vector k2 = field(x + 0.5 * dt * k1);
    const Vector k3 = field(x + 0.5 * dt * k2);
    const Vector k4 = field(x + dt * k3);
    Vector next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double increase = next.norm() - x.norm();
    traj.max_norm_increase = std::max(traj.max_norm_increase, increase);
    if (increase > traj.step_error_bound) {
      throw Error(ErrorCode::StepTooLarge, "norm increased along the bad-locus feedback run");
    }
    previous = lambda;
    x = std::move(next);
    const double t_next = static_cast<double>(j + 1) * dt;
    if (in_N(geom, x, tol)) {
      out.reached_n = true;
      out.reached_n_time = t_next;
      rec.record(j + 1, t_next, x, previous, true, true);
      return out;
    }
    if (!in_F(geom, x, tol)) {
      out.exit_time = t_next;
      rec.record(j + 1, t_next, x, bad_locus_lambda(geom, x, previous, held), held, true);
      return out;
    }
  }
  rec.record(steps, static_cast<double>(steps) * dt, x, previous, held, true);
  return out;
}

OmegaLimitEstimate estimate_omega_limit(const Trajectory& traj, double window, double tol_plateau,
                                        double zero_tol) {
  if (traj.times.empty() || traj.horizon() < 2.0 * window) {
    throw Error(ErrorCode::InvalidArgument, "trajectory shorter than two windows");
  }
  OmegaLimitEstimate out;
  const double r = traj.norms.back();
  const double r0 = traj.norms.front();
  if (r <= zero_tol * r0 || r == 0.0) {
    out.radius = 0.0;
    out.plateaued = true;
    return out;
  }
  const double t_start = traj.horizon() - window;
  const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t_start);
  const auto idx = static_cast<std::size_t>(std::distance(traj.times.begin(), it));
  const double drop = traj.norms[idx] - r;
  out.radius = r;
  out.plateaued = drop < tol_plateau * r;
  return out;
}

double output_measure(const Trajectory& traj, double tol) {
  if (traj.outputs.empty()) {
    throw Error(ErrorCode::NoOutputs, "trajectory carries no outputs");
  }
  const std::size_t n = traj.outputs.size() > 1 ? traj.outputs.size() - 1 : 1;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (traj.outputs[i].norm() > tol) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(n);
}

BinaryPiecewise random_binary_signal(double horizon, double mean_dwell, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> dwell(1.0 / mean_dwell);
  std::bernoulli_distribution coin(0.5);
  BinaryPiecewise out;
  double t = 0.0;
  double value = coin(rng) ? 1.0 : 0.0;
  while (t < horizon) {
    const double d = std::max(dwell(rng), 1e-6);
    out.segments.push_back({d, value});
    value = 1.0 - value;
    t += d;
  }
  return out;
}

}  // namespace guas
