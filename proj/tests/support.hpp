#pragma once

#include "guas/builtin_examples.hpp"
#include "guas/linalg.hpp"
#include "guas/matrix_core.hpp"

#include <random>
#include <string>
#include <vector>

namespace guas::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

inline Vector random_unit(std::mt19937_64& rng, Eigen::Index n) {
  return random_matrix(rng, n, 1).col(0).normalized();
}

inline Matrix random_skew(std::mt19937_64& rng, Eigen::Index k) {
  const Matrix m = random_matrix(rng, k, k);
  return m - m.transpose();
}

inline Matrix random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
  return qr.householderQ() * Matrix::Identity(n, n);
}

/// D with D^T + D <= -margin I: a skew part plus a negative definite part.
inline Matrix random_dissipative(std::mt19937_64& rng, Eigen::Index n, double margin = 0.5) {
  const Matrix m = random_matrix(rng, n, n);
  return random_skew(rng, n) - 0.5 * (m * m.transpose()) -
         0.5 * margin * Matrix::Identity(n, n);
}

/// [[A, -C^T], [C, D]] hidden behind a random orthogonal change of basis.
struct PlantedPair {
  MatrixPair pair;
  Matrix q;  // columns 0..k-1 span the planted common kernel
  Eigen::Index k = 0;
};

inline PlantedPair planted_pair(std::mt19937_64& rng, Eigen::Index k, Eigen::Index kp,
                                bool rotate = true) {
  const Matrix a0 = random_skew(rng, k);
  const Matrix a1 = random_skew(rng, k);
  const Matrix c0 = random_matrix(rng, kp, k);
  const Matrix c1 = random_matrix(rng, kp, k);
  const Matrix d0 = random_dissipative(rng, kp);
  const Matrix d1 = random_dissipative(rng, kp);
  const Matrix q = rotate ? random_orthogonal(rng, k + kp) : Matrix::Identity(k + kp, k + kp);
  PlantedPair out;
  out.pair = make_pair(q * assemble_blocks(a0, c0, d0) * q.transpose(),
                       q * assemble_blocks(a1, c1, d1) * q.transpose());
  out.q = q;
  out.k = k;
  return out;
}

/// The built-in instances plus their parameter variants.
inline std::vector<BuiltinExample> corpus() {
  std::vector<BuiltinExample> out;
  out.push_back(hurwitz_example());
  out.push_back(shared_output_example(1));
  out.push_back(shared_output_example(2));
  for (double a : {-2.0, -1.0, 1.0, 2.0})
    for (double b : {-2.0, -1.0, 1.0, 2.0}) out.push_back(kdeux_example(a, b));
  out.push_back(torus_example(2));
  out.push_back(torus_example(3));
  out.push_back(corank_one_example(4));
  out.push_back(mason_example());
  return out;
}

}  // namespace guas::testing
