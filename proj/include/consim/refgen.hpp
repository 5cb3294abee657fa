#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "consim/errors.hpp"
#include "consim/matrix.hpp"

namespace consim {

enum class RefKind { Dynamic, Constant };

/// Reference-output design for one agent. Dynamic designs drive an m-th
/// order filter from the weighted neighbor outputs; constant designs hold a
/// fixed reference for agents without neighbors.
struct RefDesign {
  int m{};
  std::vector<double> lambda;  // characteristic coefficients, constant term first
  double gamma{};
  RefKind kind{RefKind::Dynamic};
  std::vector<double> roots;   // validated, ascending magnitude (dynamic only)
};

inline double gamma_for(double in_degree, double lambda1) {
  if (!(in_degree > 0.0)) throw ZeroInDegree("gamma needs a positive in-degree");
  return lambda1 / in_degree;
}

/// Roots of s^m + lambda_m s^{m-1} + ... + lambda_1, computed as the
/// companion-matrix spectrum. Succeeds iff every root is real (imaginary
/// part within 1e-8 of the root magnitude, floored at one) and negative.
/// Returns the roots in ascending magnitude.
inline std::vector<double> validate_lambda(const std::vector<double>& lambda) {
  const int m = static_cast<int>(lambda.size());
  if (m == 0) throw DimensionMismatch("empty coefficient vector");
  for (double l : lambda)
    if (!std::isfinite(l)) throw NonFinite("coefficient is not finite");

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i + 1 < m; ++i) companion(i, i + 1) = 1.0;
  for (int j = 0; j < m; ++j) companion(m - 1, j) = -lambda[j];

  const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
  std::vector<double> roots(m);
  for (int i = 0; i < m; ++i) {
    const std::complex<double> z = solver.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z)))
      throw ComplexRoots("characteristic roots are not all real");
    roots[i] = z.real();
  }
  for (double r : roots)
    if (!(r < 0.0)) throw NonNegativeRoot("characteristic roots are not all negative");
  std::sort(roots.begin(), roots.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  return roots;
}

inline RefDesign make_dynamic_design(std::vector<double> lambda, double in_degree) {
  RefDesign d;
  d.m = static_cast<int>(lambda.size());
  d.roots = validate_lambda(lambda);
  d.lambda = std::move(lambda);
  d.gamma = gamma_for(in_degree, d.lambda[0]);
  d.kind = RefKind::Dynamic;
  return d;
}

inline RefDesign make_constant_design(int m, double gamma) {
  if (m < 1) throw DimensionMismatch("order must be positive");
  RefDesign d;
  d.m = m;
  d.gamma = gamma;
  d.kind = RefKind::Constant;
  return d;
}

/// Reference state; constant designs hold (gamma, 0, ..., 0) and never
/// integrate.
struct RefState {
  std::vector<double> xi;

  static RefState initial(const RefDesign& d) {
    RefState s;
    s.xi.assign(d.m, 0.0);
    if (d.kind == RefKind::Constant) s.xi[0] = d.gamma;
    return s;
  }
};

inline std::vector<double> ref_derivative(const RefDesign& d, std::span<const double> xi,
                                          double neighbor_weighted_output_sum) {
  if (d.kind == RefKind::Constant)
    throw ConstantKind("constant references have no dynamics");
  if (static_cast<int>(xi.size()) != d.m) throw DimensionMismatch("reference state size mismatch");
  std::vector<double> dxi(d.m);
  for (int l = 0; l + 1 < d.m; ++l) dxi[l] = xi[l + 1];
  double last = d.gamma * neighbor_weighted_output_sum;
  for (int p = 0; p < d.m; ++p) last -= d.lambda[p] * xi[p];
  dxi[d.m - 1] = last;
  return dxi;
}

/// Companion form of the reference filter: xi' = A * (gamma * neighbor sum)
/// + B * xi.
inline std::pair<Matrix, std::vector<double>> build_companion(const RefDesign& d) {
  if (d.kind == RefKind::Constant) throw ConstantKind("constant references have no companion form");
  Matrix b(d.m, d.m);
  for (int i = 0; i + 1 < d.m; ++i) b(i, i + 1) = 1.0;
  for (int j = 0; j < d.m; ++j) b(d.m - 1, j) = -d.lambda[j];
  std::vector<double> a(d.m, 0.0);
  a[d.m - 1] = 1.0;
  return {b, a};
}

struct Transform {
  Matrix j;
  Matrix lambda_mat;
};

/// Lower-triangular similarity transform J with all-ones first column and
/// the bidiagonal factor it maps the companion matrix to. delta must hold
/// the validated roots in the caller's chosen order.
inline Transform build_transform(const RefDesign& d, const std::vector<double>& delta) {
  if (d.kind == RefKind::Constant) throw ConstantKind("constant references have no transform");
  const int m = d.m;
  if (static_cast<int>(delta.size()) != m) throw DimensionMismatch("one root per stage required");
  Matrix j(m, m);
  for (int r = 0; r < m; ++r) j(r, 0) = 1.0;
  for (int r = 1; r < m; ++r)
    for (int c = 1; c <= r; ++c)
      j(r, c) = j(r - 1, c) - j(r - 1, c - 1) / delta[r - 1];
  for (int r = 0; r < m; ++r)
    if (std::abs(j(r, r)) <= 1e-12) throw DegenerateTransform("vanishing transform diagonal");
  Matrix lam(m, m);
  for (int l = 0; l < m; ++l) {
    lam(l, l) = delta[l];
    if (l + 1 < m) lam(l, l + 1) = -delta[l];
  }
  return {std::move(j), std::move(lam)};
}

/// (max |J B - Lambda J|, |j_mm + delta_m / lambda_1|); both vanish for an
/// exact transform.
inline std::pair<double, double> transform_residuals(const RefDesign& d, const Transform& t,
                                                     const std::vector<double>& delta) {
  const auto [b, a] = build_companion(d);
  const Matrix lhs = t.j * b;
  const Matrix rhs = t.lambda_mat * t.j;
  const double commute = (lhs - rhs).max_abs();
  const int m = d.m;
  const double corner = std::abs(t.j(m - 1, m - 1) + delta[m - 1] / d.lambda[0]);
  return {commute, corner};
}

}  // namespace consim
