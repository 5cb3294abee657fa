#include "consim/dual.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

using namespace consim;

using D1 = Dual<double>;
using D2 = Dual<Dual<double>>;

TEST(Dual, ConstantsHaveZeroPartials) {
  const auto c = make_constant<D1>(3.5, 4);
  EXPECT_EQ(value_of(c), 3.5);
  for (double d : c.d) EXPECT_EQ(d, 0.0);
}

TEST(Dual, SeedCarriesKroneckerDelta) {
  const auto x = make_seed<D1>(2.0, 1, 3);
  EXPECT_EQ(x.d[0], 0.0);
  EXPECT_EQ(x.d[1], 1.0);
  EXPECT_EQ(x.d[2], 0.0);
}

TEST(Dual, ProductAndQuotientRules) {
  const auto x = make_seed<D1>(3.0, 0, 2);
  const auto y = make_seed<D1>(5.0, 1, 2);
  const auto p = x * y;
  EXPECT_DOUBLE_EQ(p.v, 15.0);
  EXPECT_DOUBLE_EQ(p.d[0], 5.0);
  EXPECT_DOUBLE_EQ(p.d[1], 3.0);
  const auto q = x / y;
  EXPECT_DOUBLE_EQ(q.v, 0.6);
  EXPECT_DOUBLE_EQ(q.d[0], 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(q.d[1], -3.0 / 25.0);
}

TEST(Dual, ElementaryFunctionDerivatives) {
  const auto x = make_seed<D1>(0.7, 0, 1);
  EXPECT_NEAR(sin(x).d[0], std::cos(0.7), 1e-15);
  EXPECT_NEAR(cos(x).d[0], -std::sin(0.7), 1e-15);
  const double th = std::tanh(0.7);
  EXPECT_NEAR(tanh(x).d[0], 1.0 - th * th, 1e-15);
  EXPECT_NEAR(sqrt(x).d[0], 0.5 / std::sqrt(0.7), 1e-15);
  EXPECT_NEAR(exp(x).d[0], std::exp(0.7), 1e-15);
}

TEST(Dual, NestedSecondDerivative) {
  // f(x, y) = sin(x) * y^2 at (0.4, 1.3)
  const double x0 = 0.4, y0 = 1.3;
  const auto x = make_seed<D2>(x0, 0, 2);
  const auto y = make_seed<D2>(y0, 1, 2);
  const auto f = sin(x) * (y * y);
  EXPECT_NEAR(value_of(f), std::sin(x0) * y0 * y0, 1e-15);
  // gradient
  EXPECT_NEAR(value_of(f.d[0]), std::cos(x0) * y0 * y0, 1e-14);
  EXPECT_NEAR(value_of(f.d[1]), std::sin(x0) * 2.0 * y0, 1e-14);
  // Hessian rows live in the partials of the partials
  EXPECT_NEAR(f.d[0].d[0], -std::sin(x0) * y0 * y0, 1e-14);
  EXPECT_NEAR(f.d[0].d[1], std::cos(x0) * 2.0 * y0, 1e-14);
  EXPECT_NEAR(f.d[1].d[0], std::cos(x0) * 2.0 * y0, 1e-14);
  EXPECT_NEAR(f.d[1].d[1], 2.0 * std::sin(x0), 1e-14);
}

namespace {

// A fixed family of composite expressions exercising every operator.
template <class S>
S composite(int shape, const std::vector<S>& v, const std::vector<double>& coef) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  using std::tanh;
  switch (shape % 5) {
    case 0:
      return coef[0] * v[0] * sin(v[1]) + cos(v[2] * coef[1]) / (1.0 + v[3] * v[3]);
    case 1:
      return tanh(v[0] * v[1] + coef[0]) * (v[2] - coef[1] * v[3]);
    case 2:
      return sqrt(1.0 + v[0] * v[0] + v[1] * v[1]) * (coef[0] + sin(v[2] * v[3]));
    case 3:
      return (v[0] + v[1] * v[2]) / (2.0 + cos(v[3])) - coef[0] * v[1];
    default:
      return v[0] * v[1] * v[2] * v[3] + tanh(v[0] - v[3]) * coef[0];
  }
}

}  // namespace

TEST(Dual, PartialsMatchCentralDifferencesOn100RandomExpressions) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> xd(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> point(4), coef(2);
    for (auto& x : point) x = xd(rng);
    for (auto& c : coef) c = xd(rng);

    std::vector<D1> seeds(4);
    for (int i = 0; i < 4; ++i) seeds[i] = make_seed<D1>(point[i], i, 4);
    const D1 f = composite<D1>(trial, seeds, coef);

    for (int i = 0; i < 4; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(point[i]));
      std::vector<double> hi = point, lo = point;
      hi[i] += h;
      lo[i] -= h;
      const double fd = (composite<double>(trial, hi, coef) -
                         composite<double>(trial, lo, coef)) /
                        (2.0 * h);
      const double scale = std::max({1.0, std::abs(fd), std::abs(f.d[i])});
      EXPECT_LE(std::abs(f.d[i] - fd) / scale, 1e-6)
          << "trial " << trial << " var " << i;
    }
  }
}
