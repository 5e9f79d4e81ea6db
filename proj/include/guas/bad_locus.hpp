#pragma once

#include "guas/decomposition.hpp"
#include "guas/observability.hpp"

#include <optional>
#include <string>
#include <vector>

namespace guas {

/// Where some lambda in [0, 1] kills the output C_lambda x. F is exposed as
/// membership predicates rather than a stored set.
struct LocusGeometry {
  BlockFamily blocks;
  Matrix n_basis;  // k x dim N, N = ker C0 /\ ker C1
  Eigen::Index k = 0;
  Eigen::Index k_prime = 0;
  double tol = kDefaultTol;
  double scale = 1.0;  // 1 + max ||C_i||
};

LocusGeometry make_geometry(const BlockFamily& blocks, double tol = kDefaultTol);

/// All 2x2 minors u_i v_j - u_j v_i, i < j, in lexicographic order.
Vector wedge(const Vector& u, const Vector& v);

/// Colinear and opposite: ||u ^ v|| <= tol (1 + |u||v|) and <u, v> <= tol.
bool colinear_opposite(const Vector& u, const Vector& v, double tol);

/// x in F, tested on x / |x| (F is a cone; x = 0 belongs to it).
bool in_F(const LocusGeometry& geom, const Vector& x, double tol = kDefaultTol);

/// Same set through the Cauchy-Schwarz equality <C0 x, C1 x> = -|C0 x||C1 x|,
/// with the slack matched to the wedge tolerance of in_F.
bool in_F_inner(const LocusGeometry& geom, const Vector& x, double tol = kDefaultTol);

bool in_N(const LocusGeometry& geom, const Vector& x, double tol = kDefaultTol);

/// The unique lambda with C_lambda x = 0 on F \ N. Throws InNullSpace on N
/// and NotInF off the cone.
double lambda_of(const LocusGeometry& geom, const Vector& x, double tol = kDefaultTol);

/// C0 A_lambda x ^ C1 x + C0 x ^ C1 A_lambda x
Vector tangency_expression(const LocusGeometry& geom, const Vector& x, double lambda);

struct GMembership {
  bool member = false;
  double residual = kInf;
  std::optional<double> lambda;
  bool in_n = false;
};

GMembership in_G(const LocusGeometry& geom, const Vector& x, double tol = kDefaultTol);

/// Continuous residual on the unit sphere, zero exactly on G (normalized by
/// scale^2). Used for sampling.
double g_residual(const LocusGeometry& geom, const Vector& x);

enum class GVerdict { Discrete, NotDiscrete, Inconclusive };
std::string_view to_string(GVerdict v);

struct GCluster {
  std::vector<std::size_t> members;  // indices into the level's samples
  Vector anchor;                     // point of G found from this cluster
  double anchor_residual = kInf;
  double diameter = 0.0;
  double extent = 0.0;  // diameter + sample spacing
  int dimension_estimate = 0;
  bool touches_n = false;
};

struct GScanLevel {
  int resolution = 0;
  std::vector<Vector> samples;
  std::vector<double> residuals;
  double spacing = 0.0;  // covering radius of the samples
  double band = 0.0;     // hit threshold on the residual
  std::vector<std::size_t> hits;
  std::vector<GCluster> clusters;   // confirmed (anchor in G)
  std::size_t discarded_clusters = 0;
};

struct GScanReport {
  GScanLevel coarse;
  GScanLevel fine;
  GVerdict verdict = GVerdict::Inconclusive;
  std::vector<double> shrink_ratios;  // fine extent / coarse extent per coarse cluster
  std::vector<std::string> notes;
};

/// One sampling pass over S^{k-1}. k = 1: the two points; k = 2: `resolution`
/// equally spaced angles; k = 3: a Fibonacci lattice of resolution^2 points;
/// k > 3: a deterministic pseudo-random sample (never certified).
GScanLevel scan_G_level(const LocusGeometry& geom, int resolution, double tol = kDefaultTol);

/// Sampling at `resolution` and 2 * `resolution`, then discreteness by
/// cluster shrinkage.
GScanReport scan_G(const LocusGeometry& geom, int resolution, double tol = kDefaultTol);

enum class SmallKernelCase {
  OneDimensional,
  RankAboveOne,
  SharedKernel,
  CommonRotation,
  RotationVanishes,
  OutputVanishes,
};
std::string_view to_string(SmallKernelCase c);

struct SmallKernelClassification {
  bool uniformly_observable = false;
  SmallKernelCase diagnostic = SmallKernelCase::OneDimensional;
  std::string detail;
};

/// dim K <= 2: uniform observability on [0, +inf) is equivalent to
/// observability of every constant input. Throws DimensionTooLarge if k > 2.
SmallKernelClassification kpetit_classify(const BlockFamily& blocks,
                                          const ObservabilityReport& obs);

}  // namespace guas
