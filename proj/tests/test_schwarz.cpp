#include "nmschwarz/schwarz.hpp"
#include "nmschwarz/study.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nmschwarz;

namespace {

DecompositionProblem make(const std::string& preset_name, double alpha, const std::string& problem = "paper4") {
  StudyConfig cfg = preset(preset_name);
  cfg.problem = problem;
  return build_problem(cfg, 0, AlphaRule{AlphaKind::Constant, alpha, 1.0});
}

SchwarzState random_state(const DecompositionProblem& pb, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  SchwarzState st = zero_state(pb);
  for (int k = 0; k < pb.num_subdomains(); ++k)
    for (int v : pb.subdomains[k].space.free_dofs) st.u[k][v] = g(rng);
  for (auto& p : st.p)
    for (auto& x : p) x = g(rng);
  return st;
}

SchwarzState from_oracle(const oracle::CoupledSolution& c) { return {c.u, c.p}; }

}  // namespace

TEST(BuildProblem, SidesArePaired) {
  const DecompositionProblem pb = make("four", 10.0);
  ASSERT_EQ(pb.num_sides(), 8);
  for (int s = 0; s < pb.num_sides(); ++s) {
    const auto& side = pb.sides[s];
    EXPECT_EQ(pb.sides[side.opposite].opposite, s);
    EXPECT_EQ(pb.sides[side.opposite].owner, side.neighbor);
    EXPECT_EQ(pb.sides[side.opposite].interface_id, side.interface_id);
    EXPECT_NEAR(side.grid.s.front(), pb.sides[side.opposite].grid.s.front(), 1e-15);
    EXPECT_NEAR(side.grid.s.back(), pb.sides[side.opposite].grid.s.back(), 1e-15);
    EXPECT_EQ(pb.subdomains[side.owner].sides[side.slot], s);
  }
}

TEST(BuildProblem, Errors) {
  const Mesh2D m = generate_structured({0, 0, 1, 1}, 2, 2);
  EXPECT_THROW(build_problem({m}, {}, 0.0, manufactured_problem()), std::invalid_argument);
  const InterfaceDecl d{0, {0.5, 0}, {0.5, 1}, 0, 0};
  EXPECT_THROW(build_problem({m, m}, {d}, 1.0, manufactured_problem()), std::invalid_argument);
  const InterfaceDecl unknown{0, {0.5, 0}, {0.5, 1}, 0, 1};
  EXPECT_THROW(build_problem({m, m}, {unknown}, 1.0, manufactured_problem()), std::invalid_argument);
}

TEST(SchwarzStep, HomogeneousZeroStateStaysZero) {
  const DecompositionProblem pb = make("four", 10.0, "zero");
  const SchwarzState next = schwarz_step(pb, zero_state(pb));
  for (const auto& u : next.u) EXPECT_EQ(u.cwiseAbs().maxCoeff(), 0.0);
  for (const auto& p : next.p) EXPECT_EQ(p.cwiseAbs().maxCoeff(), 0.0);
  const auto [st, rep] = solve_schwarz(pb);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations_used, 1);
}

TEST(SchwarzStep, FirstStepIsSingleRobinSolveOnConformingStrips) {
  // Matching strips: one step from zero solves the Robin problem with zero
  // incoming data, compared with a dense solve.
  StudyConfig cfg;
  cfg.subdomains = {{{0, 0, 0.5, 1}, 4, 8}, {{0.5, 0, 1, 1}, 4, 8}};
  finalize_config(cfg);
  const double alpha = 3.0;
  const DecompositionProblem pb = build_problem(cfg, 0, AlphaRule{AlphaKind::Constant, alpha, 1.0});
  const SchwarzState st = schwarz_step(pb, zero_state(pb));
  const auto& sd = pb.subdomains[0];
  const auto& side = pb.sides[sd.sides[0]];
  // On matching grids the Robin term is alpha * B^T M^-1 B with B = E^T M_Y.
  const Eigen::MatrixXd b = oracle::cross(side.grid.s, side.grid.s);
  Eigen::MatrixXd m(b.rows(), b.rows());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      m(i, j) = oracle::integrate(side.grid.s, [&](double x) {
        return oracle::mortar_basis(side.grid.s, i, x) * oracle::mortar_basis(side.grid.s, j, x);
      });
  Eigen::MatrixXd a = Eigen::MatrixXd(sd.stiffness);
  const Eigen::MatrixXd robin = alpha * b.transpose() * m.inverse() * b;
  for (int i = 0; i < robin.rows(); ++i)
    for (int j = 0; j < robin.cols(); ++j) a(side.trace.vertices[i], side.trace.vertices[j]) += robin(i, j);
  Eigen::VectorXd rhs = sd.load;
  for (std::size_t i = 0; i < sd.space.dirichlet_dofs.size(); ++i) {
    const int v = sd.space.dirichlet_dofs[i];
    a.row(v).setZero();
    a(v, v) = 1.0;
    rhs[v] = sd.dirichlet[static_cast<Eigen::Index>(i)];
  }
  const Eigen::VectorXd u = a.fullPivLu().solve(rhs);
  EXPECT_LT((st.u[0] - u).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(JumpResidual, VanishesAtCoupledSolution) {
  const DecompositionProblem pb = make("two-small", 7.0);
  const SchwarzState st = from_oracle(oracle::monolithic(pb));
  EXPECT_LE(jump_residual(pb, st), 1e-12);
}

TEST(JumpResidual, PositiveAwayFromSolution) {
  const DecompositionProblem pb = make("two-small", 7.0);
  EXPECT_GT(jump_residual(pb, initial_state(pb, true)), 0.0);
  EXPECT_GT(jump_residual(pb, random_state(pb, 1)), 0.0);
  // p = 0 and u = 0 satisfy the interface relation trivially
  EXPECT_EQ(jump_residual(pb, zero_state(pb)), 0.0);
}

TEST(JumpResidual, EqualsFixedPointDisplacement) {
  const DecompositionProblem pb = make("two-small", 5.0);
  const InterfaceFixedPointMap map(pb);
  const Eigen::Index n = map.size();
  // Dense T from the affine map, column by column.
  const Eigen::VectorXd c = map.apply(Eigen::VectorXd::Zero(n));
  Eigen::MatrixXd t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) t.col(i) = map.apply(Eigen::VectorXd::Unit(n, i)) - c;
  const SchwarzState st0 = random_state(pb, 4);
  const Eigen::VectorXd lambda0 = map.join(incoming_moments(pb, st0));
  const Eigen::VectorXd lambda1 = t * lambda0 + c;
  const SchwarzState st1 = schwarz_step(pb, st0);
  const auto parts0 = map.split(lambda0), parts1 = map.split(lambda1);
  double expected = 0.0;
  for (int s = 0; s < pb.num_sides(); ++s) {
    const Eigen::VectorXd d = parts0[s] - parts1[s];
    expected = std::max(expected, std::sqrt(d.dot(pb.sides[s].mortar->solve_mass(d))));
  }
  EXPECT_NEAR(jump_residual(pb, st1), expected, 1e-10 * expected);
}

TEST(SolveSchwarz, MatchesMonolithicOracleTwoSubdomains) {
  const DecompositionProblem pb = make("two-small", 9.0);
  SolveOptions opt;
  opt.tol = 1e-10;
  const auto [st, rep] = solve_schwarz(pb, opt);
  ASSERT_TRUE(rep.converged);
  EXPECT_LT(rep.final_residual, 1e-10);
  const auto ref = oracle::monolithic(pb);
  EXPECT_LT(oracle::h1_difference(pb, st.u, ref.u), 1e-8);
}

TEST(SolveSchwarz, MatchesMonolithicOracleFourSubdomains) {
  const DecompositionProblem pb = make("four", 10.0);
  const auto [st, rep] = solve_schwarz(pb);
  ASSERT_TRUE(rep.converged);
  EXPECT_LT(oracle::h1_difference(pb, st.u, oracle::monolithic(pb).u), 1e-6);
}

TEST(SolveSchwarz, ReportContents) {
  const DecompositionProblem pb = make("two-small", 9.0);
  SolveOptions opt;
  opt.reference = from_oracle(oracle::monolithic(pb));
  const auto [st, rep] = solve_schwarz(pb, opt);
  EXPECT_EQ(rep.method, "schwarz");
  EXPECT_EQ(rep.records.size(), static_cast<std::size_t>(rep.iterations_used) + 1);
  EXPECT_EQ(rep.records.front().n, 0);
  EXPECT_DOUBLE_EQ(rep.final_residual, rep.records.back().jump_residual);
  EXPECT_DOUBLE_EQ(rep.alpha, 9.0);
  for (const auto& r : rep.records) {
    EXPECT_TRUE(std::isfinite(r.jump_residual));
    EXPECT_GE(r.energy, 0.0);
    EXPECT_GE(r.interface_energy, 0.0);
    ASSERT_TRUE(r.h1_error.has_value());
    ASSERT_TRUE(r.linf_error.has_value());
  }
  EXPECT_LT(*rep.records.back().h1_error, *rep.records.front().h1_error);
  EXPECT_LT(*rep.records.back().h1_error, 1e-6);
}

TEST(SolveSchwarz, IterationCapIsReportedNotThrown) {
  const DecompositionProblem pb = make("two-small", 9.0);
  SolveOptions opt;
  opt.max_iter = 3;
  const auto [st, rep] = solve_schwarz(pb, opt);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.iterations_used, 3);
  opt.tol = 0.0;
  EXPECT_THROW(solve_schwarz(pb, opt), std::invalid_argument);
}

TEST(SolveSchwarz, SingleSubdomainIsPlainFemSolve) {
  const DecompositionProblem pb = make("single", 1.0);
  const auto [st, rep] = solve_schwarz(pb);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations_used, 1);
  const Eigen::VectorXd u = solve_dirichlet(pb.subdomains[0].space, pb.model.rhs, pb.model.boundary);
  EXPECT_LT((st.u[0] - u).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SolveSchwarz, Deterministic) {
  const DecompositionProblem pb = make("four", 10.0);
  const auto a = solve_schwarz(pb).second;
  const auto b = solve_schwarz(pb).second;
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].jump_residual, b.records[i].jump_residual);
    EXPECT_EQ(a.records[i].energy, b.records[i].energy);
  }
}

TEST(EnergyEstimate, HomogeneousProblemDecays) {
  const DecompositionProblem pb = make("two", 11.0, "zero");
  SolveOptions opt;
  opt.initial = random_state(pb, 21);
  opt.tol = 1e-300;
  opt.max_iter = 200;
  const auto [st, rep] = solve_schwarz(pb, opt);
  const auto& r = rep.records;
  double partial = 0.0, kappa = 0.0;
  for (std::size_t n = 0; n + 1 < r.size(); ++n) {
    partial += r[n].energy;
    if (r[n].energy > 1e-28)
      kappa = std::max(kappa, (r[n + 1].energy + r[n + 1].interface_energy - r[n].interface_energy) /
                                  (pb.alpha * pb.h_max() * r[n].energy));
  }
  EXPECT_LE(r.back().energy, 1e-12);
  EXPECT_TRUE(std::isfinite(kappa));
  EXPECT_LT(partial, 10.0 * (r[0].energy + r[0].interface_energy));
}

TEST(FixedPointMap, AffineAndFixedPoint) {
  const DecompositionProblem pb = make("two-small", 6.0);
  const InterfaceFixedPointMap map(pb);
  const Eigen::Index n = map.size();
  EXPECT_EQ(n, (8 - 1) + (12 - 1));
  const Eigen::VectorXd c = map.constant();
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(n), y(n);
  for (auto& v : x) v = g(rng);
  for (auto& v : y) v = g(rng);
  const Eigen::VectorXd lhs = map.apply(2.0 * x - 0.5 * y) - c;
  const Eigen::VectorXd rhs = 2.0 * (map.apply(x) - c) - 0.5 * (map.apply(y) - c);
  EXPECT_LT((lhs - rhs).norm(), 1e-10 * rhs.norm());

  SolveOptions opt;
  opt.tol = 1e-13;
  const auto [st, rep] = solve_gmres(pb, opt);
  const Eigen::VectorXd lambda = map.join(incoming_moments(pb, st));
  EXPECT_LT((map.apply(lambda) - lambda).norm(), 1e-10 * lambda.norm());
  EXPECT_LT(estimate_spectral_radius(map), 1.0);
}

TEST(FixedPointMap, SplitRejectsWrongSize) {
  const DecompositionProblem pb = make("two-small", 6.0);
  const InterfaceFixedPointMap map(pb);
  EXPECT_THROW(map.split(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(SolveGmres, AgreesWithSchwarz) {
  for (const char* name : {"two", "four"}) {
    const DecompositionProblem pb = make(name, 10.0);
    const auto [s1, r1] = solve_schwarz(pb);
    const auto [s2, r2] = solve_gmres(pb);
    ASSERT_TRUE(r1.converged);
    ASSERT_TRUE(r2.converged);
    EXPECT_LT(h1_distance(pb, s1, s2), 1e-6) << name;
    EXPECT_LT(r2.iterations_used, r1.iterations_used) << name;
    EXPECT_EQ(r2.gmres_residuals.size(), static_cast<std::size_t>(r2.iterations_used) + 1);
    EXPECT_LT(r2.gmres_residuals.back(), 1e-8);
    EXPECT_EQ(r2.records.size(), static_cast<std::size_t>(r2.iterations_used) + 1);
  }
}

TEST(SolveGmres, MinimalInterface) {
  // Two single-row strips split into two cells each: one mortar unknown per side.
  StudyConfig cfg;
  cfg.subdomains = {{{0, 0, 0.5, 1}, 1, 2}, {{0.5, 0, 1, 1}, 1, 2}};
  finalize_config(cfg);
  const DecompositionProblem pb = build_problem(cfg, 0, AlphaRule{AlphaKind::Constant, 2.0, 1.0});
  EXPECT_EQ(interface_fixed_point_map(pb).size(), 2);
  const auto [st, rep] = solve_gmres(pb);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations_used, 2);
}

TEST(ConformingGrids, ProjectionIsIdentity) {
  const DecompositionProblem pb = make("four-conforming", 10.0);
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  for (const auto& side : pb.sides) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(side.grid.s.size()));
    for (auto& x : v) x = g(rng);
    // values of a mortar function: ends copied from the neighbours
    v[0] = v[1];
    v[v.size() - 1] = v[v.size() - 2];
    const Eigen::VectorXd c = side.from_neighbor.apply(v);
    EXPECT_LT((c - v.segment(1, c.size())).cwiseAbs().maxCoeff(), 1e-12);
  }
}
