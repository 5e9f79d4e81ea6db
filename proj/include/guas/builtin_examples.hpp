#pragma once

#include "guas/analyzer.hpp"
#include "guas/matrix_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace guas {

struct BuiltinExample {
  std::string name;
  std::string description;
  MatrixPair pair;
  /// the known answer in words, printed next to the computed verdict
  std::string expected;
  std::optional<Conclusion> expected_conclusion;
};

/// [[A, -C^T], [C, D]]
Matrix assemble_blocks(const Matrix& a, const Matrix& c, const Matrix& d);

/// One matrix with A a unit rotation, C = [[1, 0], [0, 0]] and the given D,
/// switched with itself.
BuiltinExample hurwitz_example(std::optional<Matrix> d = std::nullopt);

/// family 1: common (C, A) observable, D0 != D1.
/// family 2: A = 0, C0 = I, C1 = [[1, 1], [0, 1]], so C_lambda is injective.
BuiltinExample shared_output_example(int family = 1);

/// k = 2 rotations with rates a and b, C0 = [1 0], C1 = [0 1], D = [-1].
BuiltinExample kdeux_example(double a = 1.0, double b = 1.0);

/// 1, sqrt 2, sqrt 3, sqrt 5, sqrt 7, ... (square roots of 1 and the primes)
std::vector<double> default_frequencies(int q);

/// q rotation blocks with the given rates; C0 reads the odd coordinates and
/// C1 the even ones; D_i = -d_i.
BuiltinExample torus_example(int q = 2, std::vector<double> freqs = {}, double d0 = 1.0,
                             double d1 = 2.0);

/// dim K = d - 1 with a shared observable (C, A) chain and D_i = -d_i.
BuiltinExample corank_one_example(int d = 4, double d0 = 1.0, double d1 = 2.0);

/// The planar pair with weak Lyapunov matrix diag(1, 3 + 2 sqrt 2) but no
/// strict quadratic Lyapunov function.
BuiltinExample mason_example();

struct ExampleParams {
  std::optional<double> a;
  std::optional<double> b;
  std::optional<int> q;
  std::vector<double> freqs;
  std::optional<double> d0;
  std::optional<double> d1;
  std::optional<std::string> family;
};

/// hurwitz | shared-output | kdeux | torus | mason. Throws UnknownExample.
BuiltinExample builtin_example(const std::string& name, const ExampleParams& params = {});
std::vector<std::string> builtin_names();

}  // namespace guas
