#include "nmschwarz/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nmschwarz;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Integral of x^a y^b over the reference triangle.
double monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

}  // namespace

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n = 1; n <= 12; ++n) {
    const GaussRule1D rule = gauss_legendre(n);
    ASSERT_EQ(rule.nodes.size(), static_cast<std::size_t>(n));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += rule.weights[i] * std::pow(rule.nodes[i], k);
      const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
      EXPECT_NEAR(q, exact, 1e-13) << "n=" << n << " k=" << k;
    }
  }
}

TEST(GaussLegendre, NodesSymmetricAndInside) {
  const GaussRule1D rule = gauss_legendre(64);
  double wsum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    EXPECT_GT(rule.nodes[i], -1.0);
    EXPECT_LT(rule.nodes[i], 1.0);
    EXPECT_NEAR(rule.nodes[i], -rule.nodes[rule.nodes.size() - 1 - i], 1e-15);
    wsum += rule.weights[i];
  }
  EXPECT_NEAR(wsum, 2.0, 1e-13);
}

TEST(GaussLegendre, RejectsNonPositiveCount) { EXPECT_THROW(gauss_legendre(0), std::invalid_argument); }

class TriangleRuleExactness : public ::testing::TestWithParam<int> {};

TEST_P(TriangleRuleExactness, MonomialsUpToOrder) {
  const int order = GetParam();
  const auto rule = triangle_rule(order);
  for (int a = 0; a <= order; ++a) {
    for (int b = 0; a + b <= order; ++b) {
      double q = 0.0;
      for (const auto& p : rule) q += p.weight * std::pow(p.xi, a) * std::pow(p.eta, b);
      EXPECT_NEAR(q, monomial_integral(a, b), 1e-14) << "order=" << order << " x^" << a << " y^" << b;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Orders, TriangleRuleExactness, ::testing::Values(1, 2, 3, 4, 5, 6, 7, 8, 10));

TEST(TriangleRule, PointsInsideReferenceTriangle) {
  for (int order : {1, 2, 4, 5, 7}) {
    for (const auto& p : triangle_rule(order)) {
      EXPECT_GE(p.xi, 0.0);
      EXPECT_GE(p.eta, 0.0);
      EXPECT_LE(p.xi + p.eta, 1.0 + 1e-15);
      EXPECT_GT(p.weight, 0.0);
    }
  }
}

TEST(TriangleRule, RejectsNonPositiveOrder) { EXPECT_THROW(triangle_rule(0), std::invalid_argument); }
