#include "guas/builtin_examples.hpp"
#include "guas/error.hpp"
#include "guas/simulator.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace guas;
using namespace guas::testing;

namespace {

BlockFamily blocks_of(const NormalizedPair& np) { return block_form(np, common_kernel(np)); }

NormalizedPair minus_identity() {
  return normalize(make_pair(-Matrix::Identity(2, 2), -Matrix::Identity(2, 2)));
}

}  // namespace

TEST(Signals, Validation) {
  EXPECT_THROW(validate_signal(BinaryPiecewise{{{1.0, 0.5}}}), Error);
  EXPECT_THROW(validate_signal(RelaxedPiecewise{{{1.0, 1.5}}}), Error);
  EXPECT_THROW(validate_signal(RelaxedPiecewise{{{0.0, 0.5}}}), Error);
  EXPECT_NO_THROW(validate_signal(RelaxedPiecewise{{{1.0, 0.5}}}));
}

TEST(Integrate, MinusIdentityDecaysExactly) {
  const NormalizedPair np = minus_identity();
  Vector x0(2);
  x0 << 3.0, 4.0;
  const Trajectory t = integrate(np, BinaryPiecewise{{{1.0, 0.0}}}, x0, 5.0, 1e-3);
  EXPECT_NEAR(t.horizon(), 5.0, 1e-12);
  EXPECT_NEAR(t.final_ratio() / std::exp(-5.0), 1.0, 1e-10);
  for (std::size_t i = 0; i < t.times.size(); i += 500) {
    EXPECT_NEAR(t.norms[i] / (5.0 * std::exp(-t.times[i])), 1.0, 1e-10);
  }
}

TEST(Integrate, SwitchTimesFollowTheSchedule) {
  Matrix b0 = -Matrix::Identity(1, 1);
  Matrix b1 = -3.0 * Matrix::Identity(1, 1);
  const NormalizedPair np = normalize(make_pair(b0, b1));
  const Trajectory t =
      integrate(np, BinaryPiecewise{{{0.5, 0.0}, {0.25, 1.0}, {0.25, 0.0}}}, Vector::Ones(1),
                2.0, 1e-3);
  // 1.75 s at rate 1, 0.25 s at rate 3
  EXPECT_NEAR(t.final_ratio(), std::exp(-1.75 - 0.75), 1e-12);
  EXPECT_EQ(t.applied_lambda[600], 1.0);
  EXPECT_EQ(t.applied_lambda[800], 0.0);
}

TEST(Integrate, NormNeverIncreasesOnRandomPairs) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const PlantedPair planted = planted_pair(rng, 2, 2);
    const NormalizedPair np = normalize(planted.pair);
    const Vector x0 = random_unit(rng, 4);
    const Trajectory t =
        integrate(np, random_binary_signal(5.0, 0.3, 100 + trial), x0, 5.0, 1e-3);
    EXPECT_LE(t.max_norm_increase, t.step_error_bound);
    const Trajectory w = worst_case_switching(np, x0, 5.0, 1e-3);
    EXPECT_LE(w.max_norm_increase, w.step_error_bound);
    Feedback custom{FeedbackRule::Custom, [](const Vector& x) { return x(0) > 0 ? 0.2 : 0.9; }};
    const Trajectory c = integrate(np, custom, x0, 5.0, 1e-3);
    EXPECT_LE(c.max_norm_increase, c.step_error_bound);
  }
}

TEST(Integrate, BilinearNormIsConserved) {
  const NormalizedPair np = normalize(torus_example(2).pair);
  const BlockFamily blocks = blocks_of(np);
  std::mt19937_64 rng(62);
  const Vector x0 = random_unit(rng, blocks.k());
  const Trajectory t =
      integrate(blocks, random_binary_signal(100.0, 1.0, 7), x0, 100.0, 1e-3, 100);
  for (double n : t.norms) EXPECT_LT(std::abs(n - 1.0), 1e-8);
  ASSERT_EQ(t.outputs.size(), t.times.size());
}

TEST(Integrate, FeedbackRk4IsFourthOrder) {
  const NormalizedPair np = normalize(kdeux_example(1, 2).pair);
  const BlockFamily blocks = blocks_of(np);
  Feedback fb{FeedbackRule::Custom, [](const Vector& x) { return 0.5 + 0.4 * std::sin(3 * x(0)); }};
  Vector x0(2);
  x0 << 1.0, 0.0;
  auto final_state = [&](double dt) { return integrate(blocks, fb, x0, 2.0, dt).states.back(); };
  const Vector ref = final_state(1e-4);
  const double e1 = (final_state(0.04) - ref).norm();
  const double e2 = (final_state(0.02) - ref).norm();
  EXPECT_GT(std::log2(e1 / e2), 3.5);
}

TEST(Integrate, DimensionAndStepChecks) {
  const NormalizedPair np = minus_identity();
  EXPECT_THROW(integrate(np, BinaryPiecewise{{{1.0, 0.0}}}, Vector::Ones(3), 1.0, 1e-2), Error);
  EXPECT_THROW(integrate(np, BinaryPiecewise{{{1.0, 0.0}}}, Vector::Ones(2), -1.0, 1e-2), Error);
  const BlockFamily blocks = blocks_of(normalize(kdeux_example(1, 1).pair));
  EXPECT_THROW(integrate(blocks, Feedback{FeedbackRule::WorstCase, {}}, Vector::Ones(2), 1, 1e-2),
               Error);
}

TEST(WorstCase, TorusDecays) {
  const NormalizedPair np = normalize(torus_example(2).pair);
  std::mt19937_64 rng(63);
  const Trajectory t = worst_case_switching(np, random_unit(rng, 5), 50.0, 1e-3, kDefaultTol, 50);
  EXPECT_LT(t.final_ratio(), 0.5);
  EXPECT_LE(t.max_norm_increase, t.step_error_bound);
}

TEST(BadFeedback, KdeuxLeavesFWithZeroOutput) {
  const BlockFamily blocks = blocks_of(normalize(kdeux_example(1, 1).pair));
  const LocusGeometry geom = make_geometry(blocks);
  Vector x0(2);
  x0 << 1.0, -1.0;
  const BadFeedbackRun run = bad_feedback_trajectory(geom, x0.normalized(), 20.0, 1e-3);
  ASSERT_TRUE(run.exit_time.has_value());
  EXPECT_GT(*run.exit_time, 0.0);
  EXPECT_LT(*run.exit_time, 20.0);
  // the last sample is the first one outside F and is not counted
  EXPECT_EQ(output_measure(run.trajectory, 1e-9), 0.0);
  for (double n : run.trajectory.norms) EXPECT_NEAR(n, 1.0, 1e-9);
}

TEST(BadFeedback, RejectsPointsOutsideF) {
  const LocusGeometry geom = make_geometry(blocks_of(normalize(kdeux_example(1, 1).pair)));
  Vector x0(2);
  x0 << 1.0, 1.0;
  EXPECT_THROW(bad_feedback_trajectory(geom, x0.normalized(), 1.0, 1e-3), Error);
  EXPECT_THROW(bad_feedback_trajectory(geom, 2.0 * Vector::Unit(2, 0), 1.0, 1e-3), Error);
}

TEST(OmegaLimit, PlateauAndDecay) {
  const NormalizedPair np = minus_identity();
  const Trajectory decaying = integrate(np, BinaryPiecewise{{{1.0, 0.0}}}, Vector::Ones(2), 8, 1e-3);
  EXPECT_FALSE(estimate_omega_limit(decaying, 2.0).plateaued);
  const BlockFamily blocks = blocks_of(normalize(kdeux_example(1, 1).pair));
  const Trajectory rot = integrate(blocks, RelaxedPiecewise{{{1.0, 0.5}}}, Vector::Unit(2, 0), 8, 1e-3);
  const OmegaLimitEstimate o = estimate_omega_limit(rot, 2.0);
  EXPECT_TRUE(o.plateaued);
  EXPECT_NEAR(o.radius, 1.0, 1e-9);
  EXPECT_THROW(estimate_omega_limit(rot, 5.0), Error);
}

TEST(OutputMeasure, RequiresOutputs) {
  const Trajectory t =
      integrate(minus_identity(), BinaryPiecewise{{{1.0, 0.0}}}, Vector::Ones(2), 1.0, 1e-2);
  EXPECT_THROW(output_measure(t), Error);
}

TEST(RandomSignal, CoversHorizonAndIsReproducible) {
  const BinaryPiecewise a = random_binary_signal(10.0, 0.5, 9);
  const BinaryPiecewise b = random_binary_signal(10.0, 0.5, 9);
  double total = 0.0;
  ASSERT_EQ(a.segments.size(), b.segments.size());
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    total += a.segments[i].duration;
    EXPECT_EQ(a.segments[i].duration, b.segments[i].duration);
    if (i > 0) EXPECT_NE(a.segments[i].value, a.segments[i - 1].value);
  }
  EXPECT_GE(total, 10.0);
}
