#include "nmschwarz/gmres.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nmschwarz;

namespace {

Eigen::MatrixXd test_matrix(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 0.3 * g(rng) / std::sqrt(static_cast<double>(n));
  a += Eigen::MatrixXd::Identity(n, n);
  return a;
}

}  // namespace

TEST(Gmres, SolvesNonsymmetricSystem) {
  const Eigen::MatrixXd a = test_matrix(30, 1);
  const Eigen::VectorXd x_true = Eigen::VectorXd::LinSpaced(30, -1.0, 2.0);
  const Eigen::VectorXd b = a * x_true;
  const GmresResult r = gmres([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a * v; }, b, 1e-12, 100);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 30);
  EXPECT_LT((r.x - x_true).norm(), 1e-9);
  EXPECT_LT((b - a * r.x).norm() / b.norm(), 1e-11);
}

TEST(Gmres, ResidualEstimatesMatchTrueResidualsAndDecrease) {
  const Eigen::MatrixXd a = test_matrix(20, 2);
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(20);
  std::vector<double> true_res;
  const GmresResult r = gmres([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a * v; }, b, 1e-10, 50,
                              [&](int, const Eigen::VectorXd& x, double) { true_res.push_back((b - a * x).norm() / b.norm()); });
  ASSERT_EQ(r.residuals.size(), static_cast<std::size_t>(r.iterations) + 1);
  ASSERT_EQ(true_res.size(), static_cast<std::size_t>(r.iterations));
  EXPECT_DOUBLE_EQ(r.residuals[0], 1.0);
  for (int k = 1; k <= r.iterations; ++k) {
    EXPECT_LE(r.residuals[k], r.residuals[k - 1] + 1e-15);
    EXPECT_NEAR(r.residuals[k], true_res[k - 1], 1e-10);
  }
}

TEST(Gmres, IdentityConvergesInOneStep) {
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
  const GmresResult r = gmres([](const Eigen::VectorXd& v) { return v; }, b, 1e-12, 10);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LT((r.x - b).norm(), 1e-14);
}

TEST(Gmres, OneDimensionalSystem) {
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 3.0);
  const GmresResult r = gmres([](const Eigen::VectorXd& v) -> Eigen::VectorXd { return 0.25 * v; }, b, 1e-12, 10);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_NEAR(r.x[0], 12.0, 1e-12);
}

TEST(Gmres, ZeroRightHandSide) {
  const GmresResult r = gmres([](const Eigen::VectorXd& v) { return v; }, Eigen::VectorXd::Zero(4), 1e-8, 10);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.x.norm(), 0.0);
}

TEST(Gmres, StopsAtIterationCap) {
  const Eigen::MatrixXd a = test_matrix(40, 3) + 2.0 * Eigen::MatrixXd::Random(40, 40);
  const GmresResult r =
      gmres([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a * v; }, Eigen::VectorXd::Ones(40), 1e-14, 3);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3);
}
