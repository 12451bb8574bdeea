#include "nmschwarz/fields.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nmschwarz;

namespace {

std::array<double, 2> centered_gradient(const ScalarField2D& f, double x, double y, double h = 1e-5) {
  return {(f(x + h, y) - f(x - h, y)) / (2 * h), (f(x, y + h) - f(x, y - h)) / (2 * h)};
}

double laplacian_fd(const ScalarField2D& f, double x, double y, double h = 1e-3) {
  return (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
}

}  // namespace

TEST(Fields, ManufacturedGradientMatchesFiniteDifferences) {
  const ModelProblem pb = manufactured_problem();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng), y = u(rng);
    const auto g = pb.exact.gradient(x, y);
    const auto fd = centered_gradient(pb.exact, x, y);
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(g[c], fd[c], 1e-6 * std::max(1.0, std::abs(g[c])));
  }
}

TEST(Fields, RightHandSideIsOperatorApplied) {
  const ModelProblem pb = manufactured_problem();
  for (double x : {0.1, 0.4, 0.8}) {
    for (double y : {0.2, 0.5, 0.9}) {
      const double lu = pb.exact(x, y) - laplacian_fd(pb.exact, x, y);
      EXPECT_NEAR(pb.rhs(x, y), lu, 1e-5);
    }
  }
}

TEST(Fields, RightHandSideFiniteAtNodes) {
  const ModelProblem pb = manufactured_problem();
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j <= 16; ++j) EXPECT_TRUE(std::isfinite(pb.rhs(i / 16.0, j / 16.0)));
}

TEST(Fields, BoundaryEqualsExact) {
  const ModelProblem pb = manufactured_problem();
  EXPECT_DOUBLE_EQ(pb.boundary(1.0, 0.3), pb.exact(1.0, 0.3));
  EXPECT_DOUBLE_EQ(pb.exact(1.0, 1.0), 1.0 + std::sin(1.0));
}

TEST(Fields, AffineAndConstant) {
  const auto a = ScalarField2D::affine(1.0, 2.0, -3.0);
  EXPECT_DOUBLE_EQ(a(0.5, 0.25), 1.0 + 1.0 - 0.75);
  EXPECT_EQ(a.gradient(0.1, 0.2), (std::array<double, 2>{2.0, -3.0}));
  EXPECT_TRUE(ScalarField2D::zero().has_gradient());
  EXPECT_DOUBLE_EQ(ScalarField2D::constant(4.0)(0.3, 0.7), 4.0);
}

TEST(Fields, ProblemLookup) {
  EXPECT_EQ(problem_by_name("paper4").name, "paper4");
  EXPECT_EQ(problem_by_name("zero").name, "zero");
  EXPECT_DOUBLE_EQ(problem_by_name("zero").rhs(0.2, 0.3), 0.0);
  EXPECT_THROW(problem_by_name("nope"), std::invalid_argument);
}
