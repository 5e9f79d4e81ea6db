#pragma once

#include "guas/bad_locus.hpp"
#include "guas/decomposition.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace guas {

struct Segment {
  double duration = 0.0;
  double value = 0.0;
};

/// u(t) in {0, 1}, piecewise constant; the last value is held after the
/// final segment.
struct BinaryPiecewise {
  std::vector<Segment> segments;
};

/// lambda(t) in [0, 1], piecewise constant; the last value is held.
struct RelaxedPiecewise {
  std::vector<Segment> segments;
};

enum class FeedbackRule { WorstCase, BadLocus, Custom };

struct Feedback {
  FeedbackRule rule = FeedbackRule::WorstCase;
  std::function<double(const Vector&)> custom;  // state -> lambda, for Custom
};

using SwitchingSignal = std::variant<BinaryPiecewise, RelaxedPiecewise, Feedback>;

/// Throws BadSignalSpec on non-positive durations or out-of-range values.
void validate_signal(const SwitchingSignal& signal);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> norms;
  std::vector<Vector> outputs;         // bilinear runs only, one per sample
  std::vector<double> applied_lambda;  // lambda (or u) in force from each sample on
  std::vector<bool> held;              // feedback lambda held near N
  double dt = 0.0;
  bool bilinear = false;
  double step_error_bound = 0.0;  // allowed per-step norm increase
  double max_norm_increase = 0.0;

  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  double final_ratio() const {
    return norms.empty() || norms.front() == 0.0 ? 0.0 : norms.back() / norms.front();
  }
};

/// Fixed-step integration of X' = B_lambda X (normalized pair) or of the
/// bilinear system x' = A_lambda x, y = C_lambda x. Constant segments step
/// with exp(dt M); state feedback uses classical RK4 with lambda evaluated
/// at every stage. Switch times are rounded to the step grid and the horizon
/// to a whole number of steps. Throws StepTooLarge if the norm grows by more
/// than the declared per-step bound.
/// `record_stride` > 1 keeps every stride-th sample (plus the last one); the
/// norm check still runs on every step.
Trajectory integrate(const NormalizedPair& pair, const SwitchingSignal& signal, const Vector& x0,
                     double horizon, double dt, std::size_t record_stride = 1);
Trajectory integrate(const BlockFamily& blocks, const SwitchingSignal& signal, const Vector& x0,
                     double horizon, double dt, std::size_t record_stride = 1);

/// Greedy adversary: each step picks u maximizing x^T (B_u^T + B_u) x,
/// keeping the previous u on ties.
Trajectory worst_case_switching(const NormalizedPair& pair, const Vector& x0, double horizon,
                                double dt, double tol = kDefaultTol,
                                std::size_t record_stride = 1);

struct BadFeedbackRun {
  Trajectory trajectory;
  std::optional<double> exit_time;
  bool reached_n = false;
  std::optional<double> reached_n_time;
};

/// x' = A_{lambda(x)} x with lambda(x) killing the output, run while x stays
/// in F \ N. Stops at the first sample outside F or on N.
BadFeedbackRun bad_feedback_trajectory(const LocusGeometry& geom, const Vector& x0,
                                       double horizon, double dt, double tol = kDefaultTol);

struct OmegaLimitEstimate {
  double radius = 0.0;
  bool plateaued = false;
};

/// radius = final norm; plateaued when the norm drop over the last `window`
/// is below tol_plateau * radius. Radii below zero_tol * |x0| read as the
/// origin (radius 0, plateaued).
OmegaLimitEstimate estimate_omega_limit(const Trajectory& traj, double window,
                                        double tol_plateau = 1e-6, double zero_tol = 1e-12);

/// Fraction of steps with |y| > tol (discrete stand-in for the measure of
/// the set of times where the output is nonzero). Throws NoOutputs.
double output_measure(const Trajectory& traj, double tol = kDefaultTol);

/// Random binary switching signal with exponential dwell times.
BinaryPiecewise random_binary_signal(double horizon, double mean_dwell, std::uint64_t seed);

}  // namespace guas
