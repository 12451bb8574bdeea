#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include "nmschwarz/nmschwarz.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <random>
#include <vector>

namespace oracle {

using nmschwarz::InterfaceGrid;

inline InterfaceGrid random_grid(std::mt19937& rng, int n, double length = 1.0) {
  std::uniform_real_distribution<double> u(0.0, length);
  for (;;) {
    std::vector<double> s{0.0, length};
    for (int i = 1; i < n; ++i) s.push_back(u(rng));
    std::sort(s.begin(), s.end());
    bool ok = true;
    for (std::size_t i = 1; i < s.size(); ++i) ok = ok && s[i] - s[i - 1] > 1e-6 * length;
    if (ok) return InterfaceGrid(s);
  }
}

inline double hat_value(const std::vector<double>& s, const Eigen::VectorXd& nodal, double x) {
  auto it = std::upper_bound(s.begin(), s.end(), x);
  std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - s.begin()), 1, s.size() - 1) - 1;
  const double t = (x - s[i]) / (s[i + 1] - s[i]);
  return (1.0 - t) * nodal[static_cast<Eigen::Index>(i)] + t * nodal[static_cast<Eigen::Index>(i + 1)];
}

// Mortar basis function j on grid s: hat at node j+1, extended as a constant
// over the first and last intervals.
inline double mortar_basis(const std::vector<double>& s, int j, double x) {
  const int n = static_cast<int>(s.size()) - 1;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
  e[j + 1] = 1.0;
  if (j == 0) e[0] = 1.0;
  if (j == n - 2) e[n] = 1.0;
  return hat_value(s, e, x);
}

// Sorted union of breakpoints, no tolerance logic beyond exact duplicates.
inline std::vector<double> union_points(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double x : all)
    if (out.empty() || x - out.back() > 1e-13) out.push_back(x);
  return out;
}

// Integral of f over [s0, sn] with a 10-point Gauss rule on every piece of \p breaks.
template <class F>
double integrate(const std::vector<double>& breaks, F&& f) {
  static const nmschwarz::GaussRule1D g = nmschwarz::gauss_legendre(10);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], h = breaks[k + 1] - breaks[k];
    for (std::size_t q = 0; q < g.nodes.size(); ++q) sum += 0.5 * h * g.weights[q] * f(a + 0.5 * h * (g.nodes[q] + 1.0));
  }
  return sum;
}

// Mortar coefficients of the L2 projection of a P1 trace on \p source onto the
// mortar space of \p target, by dense quadrature.
inline Eigen::VectorXd projection(const std::vector<double>& source, const Eigen::VectorXd& values,
                                  const std::vector<double>& target) {
  const auto breaks = union_points(source, target);
  const int dim = static_cast<int>(target.size()) - 2;
  Eigen::MatrixXd m(dim, dim);
  Eigen::VectorXd b(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j)
      m(i, j) = integrate(breaks, [&](double x) { return mortar_basis(target, i, x) * mortar_basis(target, j, x); });
    b[i] = integrate(breaks, [&](double x) { return mortar_basis(target, i, x) * hat_value(source, values, x); });
  }
  return m.fullPivLu().solve(b);
}

// Cross matrix X(i, j) = integral of mortar_i(target) * hat_j(source).
inline Eigen::MatrixXd cross(const std::vector<double>& source, const std::vector<double>& target) {
  const auto breaks = union_points(source, target);
  const int dim = static_cast<int>(target.size()) - 2;
  const int ns = static_cast<int>(source.size());
  Eigen::MatrixXd x(dim, ns);
  for (int j = 0; j < ns; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(ns);
    e[j] = 1.0;
    for (int i = 0; i < dim; ++i)
      x(i, j) = integrate(breaks, [&](double t) { return mortar_basis(target, i, t) * hat_value(source, e, t); });
  }
  return x;
}

// Nodal values of mortar coefficients on the target grid.
inline Eigen::VectorXd mortar_nodal(const std::vector<double>& target, const Eigen::VectorXd& c) {
  const int n = static_cast<int>(target.size()) - 1;
  Eigen::VectorXd v(n + 1);
  for (int i = 0; i <= n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < c.size(); ++j) sum += c[j] * mortar_basis(target, j, target[i]);
    v[i] = sum;
  }
  return v;
}

struct CoupledSolution {
  std::vector<Eigen::VectorXd> u;  // per subdomain, all vertices
  std::vector<Eigen::VectorXd> p;  // per ordered side, in problem side order
};

// Assembles the coupled discrete problem for all subdomains and multipliers at
// once and solves it with a sparse LU:
//   A_k u_k - sum_l B_kl^T p_kl = F_k                          (free rows)
//   u_k = g                                                    (Dirichlet rows)
//   M_kl p_kl + alpha B_kl u_k + X_kl (E_lk p_lk - alpha u_l|) = 0   (every ordered side)
inline CoupledSolution monolithic(const nmschwarz::DecompositionProblem& pb) {
  using namespace nmschwarz;
  const int ns = pb.num_subdomains();
  std::vector<int> u_off(ns + 1, 0);
  for (int k = 0; k < ns; ++k) u_off[k + 1] = u_off[k] + pb.subdomains[k].space.dof_count();
  const int nsides = pb.num_sides();
  std::vector<int> p_off(nsides + 1, u_off[ns]);
  for (int s = 0; s < nsides; ++s) p_off[s + 1] = p_off[s] + static_cast<int>(pb.sides[s].grid.s.size()) - 2;
  const int total = p_off[nsides];

  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
  for (int k = 0; k < ns; ++k) {
    const auto& sd = pb.subdomains[k];
    const P1Space& sp = sd.space;
    const SparseSymOperator a = assemble_stiffness_mass(sp);
    const Eigen::VectorXd f = assemble_load(sp, pb.model.rhs);
    for (int c = 0; c < a.outerSize(); ++c)
      for (SparseSymOperator::InnerIterator it(a, c); it; ++it)
        if (sp.is_free(static_cast<int>(it.row())))
          t.emplace_back(u_off[k] + it.row(), u_off[k] + it.col(), it.value());
    for (int v : sp.free_dofs) rhs[u_off[k] + v] = f[v];
    for (int v : sp.dirichlet_dofs) {
      t.emplace_back(u_off[k] + v, u_off[k] + v, 1.0);
      rhs[u_off[k] + v] = pb.model.boundary(sp.mesh->vertices[v].x, sp.mesh->vertices[v].y);
    }
  }
  for (int s = 0; s < nsides; ++s) {
    const auto& side = pb.sides[s];
    const auto& opp = pb.sides[side.opposite];
    const int k = side.owner, l = opp.owner;
    const std::vector<double>& own = side.grid.s;
    const std::vector<double>& other = opp.grid.s;
    const Eigen::MatrixXd b = cross(own, own);       // dim_k x trace_k
    const Eigen::MatrixXd x = cross(other, own);     // dim_k x trace_l
    const int dk = static_cast<int>(own.size()) - 2;
    const int dl = static_cast<int>(other.size()) - 2;
    // E_l: nodal values of side l's mortar basis on its own grid
    Eigen::MatrixXd e(other.size(), dl);
    for (int j = 0; j < dl; ++j) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(dl);
      c[j] = 1.0;
      e.col(j) = mortar_nodal(other, c);
    }
    Eigen::MatrixXd m(dk, dk);
    for (int i = 0; i < dk; ++i)
      for (int j = 0; j < dk; ++j)
        m(i, j) = integrate(own, [&](double z) { return mortar_basis(own, i, z) * mortar_basis(own, j, z); });
    const Eigen::MatrixXd xe = x * e;
    const auto& vk = side.trace.vertices;
    const auto& vl = opp.trace.vertices;
    const auto& spk = pb.subdomains[k].space;
    for (int i = 0; i < dk; ++i) {
      const int row = p_off[s] + i;
      for (int j = 0; j < dk; ++j) t.emplace_back(row, p_off[s] + j, m(i, j));
      for (std::size_t j = 0; j < vk.size(); ++j) t.emplace_back(row, u_off[k] + vk[j], pb.alpha * b(i, j));
      for (int j = 0; j < dl; ++j) t.emplace_back(row, p_off[side.opposite] + j, xe(i, j));
      for (std::size_t j = 0; j < vl.size(); ++j) t.emplace_back(row, u_off[l] + vl[j], -pb.alpha * x(i, j));
      // -B^T p in the free rows of subdomain k
      for (std::size_t j = 0; j < vk.size(); ++j)
        if (spk.is_free(vk[j])) t.emplace_back(u_off[k] + vk[j], row, -b(i, j));
    }
  }
  Eigen::SparseMatrix<double> mat(total, total);
  mat.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(mat);
  if (lu.info() != Eigen::Success) throw std::runtime_error("monolithic oracle: factorization failed");
  const Eigen::VectorXd sol = lu.solve(rhs);
  CoupledSolution out;
  for (int k = 0; k < ns; ++k) out.u.push_back(sol.segment(u_off[k], u_off[k + 1] - u_off[k]));
  for (int s = 0; s < nsides; ++s) out.p.push_back(sol.segment(p_off[s], p_off[s + 1] - p_off[s]));
  return out;
}

// Sum over subdomains of the squared H1 norm of a - b, square-rooted.
inline double h1_difference(const nmschwarz::DecompositionProblem& pb, const std::vector<Eigen::VectorXd>& a,
                            const std::vector<Eigen::VectorXd>& b) {
  double sum = 0.0;
  for (int k = 0; k < pb.num_subdomains(); ++k) {
    const Eigen::VectorXd d = a[k] - b[k];
    sum += d.dot(nmschwarz::assemble_stiffness_mass(pb.subdomains[k].space) * d);
  }
  return std::sqrt(sum);
}

}  // namespace oracle
