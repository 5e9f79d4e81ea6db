#include "guas/builtin_examples.hpp"

#include "guas/error.hpp"

#include <cmath>
#include <sstream>

namespace guas {

Matrix assemble_blocks(const Matrix& a, const Matrix& c, const Matrix& d) {
  const Eigen::Index k = a.rows();
  const Eigen::Index kp = d.rows();
  if (a.cols() != k || d.cols() != kp || c.rows() != kp || c.cols() != k) {
    throw Error(ErrorCode::DimensionMismatch, "block shapes do not fit together");
  }
  Matrix b(k + kp, k + kp);
  b.topLeftCorner(k, k) = a;
  b.topRightCorner(k, kp) = -c.transpose();
  b.bottomLeftCorner(kp, k) = c;
  b.bottomRightCorner(kp, kp) = d;
  return b;
}

namespace {

Matrix rotation(double rate) {
  Matrix a(2, 2);
  a << 0.0, rate, -rate, 0.0;
  return a;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

BuiltinExample hurwitz_example(std::optional<Matrix> d) {
  Matrix dd(2, 2);
  dd << -1.0, 2.0, -2.0, -1.0;
  if (d) dd = *d;
  Matrix c = Matrix::Zero(dd.rows(), 2);
  c(0, 0) = 1.0;
  const Matrix b = assemble_blocks(rotation(1.0), c, dd);
  BuiltinExample ex;
  ex.name = "hurwitz";
  ex.description = "single matrix [[A, -C^T], [C, D]], A a unit rotation, first row of C = [1 0]";
  ex.pair = make_pair(b, b);
  ex.expected = "Hurwitz whenever D^T + D < 0, so the pair (B, B) is GUAS";
  ex.expected_conclusion = Conclusion::GuasDimKLe2;
  return ex;
}

BuiltinExample shared_output_example(int family) {
  BuiltinExample ex;
  ex.name = "shared-output";
  if (family == 1) {
    Matrix c(1, 2);
    c << 1.0, 0.0;
    ex.description = "common skew A and output C, (C, A) observable, D0 = -1, D1 = -2";
    ex.pair = make_pair(assemble_blocks(rotation(1.0), c, scalar(-1.0)),
                        assemble_blocks(rotation(1.0), c, scalar(-2.0)));
    ex.expected = "GUAS: the bilinear system does not depend on lambda and is observable";
    ex.expected_conclusion = Conclusion::GuasDimKLe2;
  } else if (family == 2) {
    const Matrix a = Matrix::Zero(2, 2);
    Matrix c1(2, 2);
    c1 << 1.0, 1.0, 0.0, 1.0;
    const Matrix d = -Matrix::Identity(2, 2);
    ex.description = "A = 0, C0 = I, C1 = [[1, 1], [0, 1]], D = -I";
    ex.pair = make_pair(assemble_blocks(a, Matrix::Identity(2, 2), d), assemble_blocks(a, c1, d));
    ex.expected = "GUAS iff C_lambda is one-to-one for every lambda, which holds here";
    ex.expected_conclusion = Conclusion::GuasCInjective;
  } else {
    throw Error(ErrorCode::InvalidArgument, "shared-output family must be 1 or 2");
  }
  return ex;
}

BuiltinExample kdeux_example(double a, double b) {
  Matrix c0(1, 2);
  Matrix c1(1, 2);
  c0 << 1.0, 0.0;
  c1 << 0.0, 1.0;
  BuiltinExample ex;
  std::ostringstream desc;
  desc << "dim K = 2, rotation rates a = " << a << ", b = " << b
       << ", C0 = [1 0], C1 = [0 1], D = [-1]";
  ex.name = "kdeux";
  ex.description = desc.str();
  ex.pair = make_pair(assemble_blocks(rotation(a), c0, scalar(-1.0)),
                      assemble_blocks(rotation(b), c1, scalar(-1.0)));
  ex.expected = "GUAS iff ab > 0";
  ex.expected_conclusion = a * b > 0.0 ? Conclusion::GuasDimKLe2
                                       : Conclusion::NotGuasConstantInput;
  return ex;
}

std::vector<double> default_frequencies(int q) {
  std::vector<double> out;
  if (q <= 0) return out;
  out.push_back(1.0);
  for (int n = 2; static_cast<int>(out.size()) < q; ++n) {
    bool prime = true;
    for (int f = 2; f * f <= n; ++f) {
      if (n % f == 0) {
        prime = false;
        break;
      }
    }
    if (prime) out.push_back(std::sqrt(static_cast<double>(n)));
  }
  return out;
}

BuiltinExample torus_example(int q, std::vector<double> freqs, double d0, double d1) {
  if (q < 1) throw Error(ErrorCode::InvalidArgument, "q must be at least 1");
  if (freqs.empty()) freqs = default_frequencies(q);
  if (static_cast<int>(freqs.size()) != q) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(q) + " frequencies");
  }
  const Eigen::Index k = 2 * q;
  Matrix a = Matrix::Zero(k, k);
  Matrix c0 = Matrix::Zero(1, k);
  Matrix c1 = Matrix::Zero(1, k);
  for (int j = 0; j < q; ++j) {
    a.block(2 * j, 2 * j, 2, 2) = rotation(-freqs[j]);
    c0(0, 2 * j) = 1.0;
    c1(0, 2 * j + 1) = 1.0;
  }
  BuiltinExample ex;
  std::ostringstream desc;
  desc << "q = " << q << " rotation blocks, rates (";
  for (int j = 0; j < q; ++j) desc << (j ? ", " : "") << freqs[j];
  desc << "), d0 = " << d0 << ", d1 = " << d1;
  ex.name = "torus";
  ex.description = desc.str();
  ex.pair = make_pair(assemble_blocks(a, c0, scalar(-d0)), assemble_blocks(a, c1, scalar(-d1)));
  ex.expected =
      "GUAS for any positive d0, d1 with rationally independent rates; the proof goes through "
      "density of orbits on a torus, which no automated sufficient condition here covers, so "
      "INCONCLUSIVE with decaying evidence is the expected report";
  ex.expected_conclusion = Conclusion::Inconclusive;
  return ex;
}

BuiltinExample corank_one_example(int d, double d0, double d1) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "d must be at least 2");
  const Eigen::Index k = d - 1;
  Matrix a = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    a(i, i + 1) = 1.0;
    a(i + 1, i) = -1.0;
  }
  Matrix c = Matrix::Zero(1, k);
  c(0, 0) = 1.0;
  BuiltinExample ex;
  ex.name = "torus";
  ex.description = "dim K = d - 1 = " + std::to_string(k) + ", common observable (C, A) chain";
  ex.pair = make_pair(assemble_blocks(a, c, scalar(-d0)), assemble_blocks(a, c, scalar(-d1)));
  ex.expected = "GUAS with dim K = d - 1";
  ex.expected_conclusion =
      k <= 2 ? Conclusion::GuasDimKLe2 : std::optional<Conclusion>(std::nullopt);
  return ex;
}

BuiltinExample mason_example() {
  const double s = std::sqrt(2.0);
  Matrix b0(2, 2);
  Matrix b1(2, 2);
  b0 << -1.0, -1.0, 1.0, -1.0;
  b1 << -1.0, -3.0 - 2.0 * s, 3.0 - 2.0 * s, -1.0;
  Matrix p = Matrix::Zero(2, 2);
  p(0, 0) = 1.0;
  p(1, 1) = 3.0 + 2.0 * s;
  BuiltinExample ex;
  ex.name = "mason";
  ex.description = "planar pair with weak common Lyapunov matrix diag(1, 3 + 2 sqrt 2)";
  ex.pair = make_pair(b0, b1, p);
  ex.expected =
      "GUAS, yet no strict common quadratic Lyapunov function exists: the ellipses det M_i = 0 "
      "share the axis q = 0 with vertices r = 3 - 2 sqrt 2, 3 + 2 sqrt 2 and "
      "r = 3 + 2 sqrt 2, 99 + 70 sqrt 2";
  ex.expected_conclusion = Conclusion::GuasTrivialKernel;
  return ex;
}

BuiltinExample builtin_example(const std::string& name, const ExampleParams& params) {
  if (name == "hurwitz") return hurwitz_example();
  if (name == "shared-output") {
    const std::string fam = params.family.value_or("1");
    if (fam != "1" && fam != "2") {
      throw Error(ErrorCode::InvalidArgument, "shared-output family must be 1 or 2");
    }
    return shared_output_example(fam == "1" ? 1 : 2);
  }
  if (name == "kdeux") return kdeux_example(params.a.value_or(1.0), params.b.value_or(1.0));
  if (name == "torus") {
    const int q = params.q.value_or(params.freqs.empty() ? 2 : static_cast<int>(params.freqs.size()));
    if (params.family && *params.family == "simple") {
      return corank_one_example(2 * q + 1, params.d0.value_or(1.0), params.d1.value_or(2.0));
    }
    if (params.family && *params.family != "torus") {
      throw Error(ErrorCode::InvalidArgument, "torus family must be 'torus' or 'simple'");
    }
    return torus_example(q, params.freqs, params.d0.value_or(1.0), params.d1.value_or(2.0));
  }
  if (name == "mason") return mason_example();
  throw Error(ErrorCode::UnknownExample, "unknown example '" + name + "'");
}

std::vector<std::string> builtin_names() {
  return {"hurwitz", "shared-output", "kdeux", "torus", "mason"};
}

}  // namespace guas
