#pragma once

/// \file fem_p1.hpp
/// \brief P1 Lagrange assembly for (Id - Laplace) and the local Robin subdomain solve.

#include "nmschwarz/fields.hpp"
#include "nmschwarz/mesh2d.hpp"
#include "nmschwarz/mortar.hpp"
#include "nmschwarz/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nmschwarz {

using SparseSymOperator = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// P1 space on one subdomain mesh. Vertices on exterior-tagged edges carry
/// Dirichlet data; every other vertex (interface vertices included) is free.
struct P1Space {
  std::shared_ptr<const Mesh2D> mesh;
  std::vector<int> dirichlet_dofs;
  std::vector<int> free_dofs;
  std::vector<int> free_index;  ///< vertex -> position in free_dofs, or -1

  int dof_count() const { return static_cast<int>(mesh->num_vertices()); }
  bool is_free(int v) const { return free_index[v] >= 0; }
};

inline P1Space make_p1_space(std::shared_ptr<const Mesh2D> mesh) {
  P1Space sp;
  sp.mesh = std::move(mesh);
  const int nv = static_cast<int>(sp.mesh->num_vertices());
  std::vector<char> dirichlet(nv, 0);
  for (const auto& e : sp.mesh->boundary_edges)
    if (e.tag.is_exterior()) dirichlet[e.v[0]] = dirichlet[e.v[1]] = 1;
  sp.free_index.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (dirichlet[v]) {
      sp.dirichlet_dofs.push_back(v);
    } else {
      sp.free_index[v] = static_cast<int>(sp.free_dofs.size());
      sp.free_dofs.push_back(v);
    }
  }
  return sp;
}

inline P1Space make_p1_space(const Mesh2D& mesh) { return make_p1_space(std::make_shared<const Mesh2D>(mesh)); }

using ElementMatrix = Eigen::Matrix3d;

namespace detail {

// Gradients of the barycentric coordinates (rows) and twice the signed area.
inline std::pair<Eigen::Matrix<double, 3, 2>, double> barycentric_gradients(const Point2& a, const Point2& b,
                                                                             const Point2& c) {
  const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  if (!(std::abs(det) > 0.0)) throw std::invalid_argument("degenerate triangle (zero area)");
  Eigen::Matrix<double, 3, 2> g;
  g << (b.y - c.y), (c.x - b.x),  //
      (c.y - a.y), (a.x - c.x),   //
      (a.y - b.y), (b.x - a.x);
  g /= det;
  return {g, det};
}

}  // namespace detail

/// Exact element stiffness: integral of grad(phi_i) . grad(phi_j).
inline ElementMatrix element_stiffness(const Point2& a, const Point2& b, const Point2& c) {
  const auto [g, det] = detail::barycentric_gradients(a, b, c);
  return 0.5 * std::abs(det) * (g * g.transpose());
}

/// Exact element mass: |T|/12 [[2,1,1],[1,2,1],[1,1,2]].
inline ElementMatrix element_mass(const Point2& a, const Point2& b, const Point2& c) {
  const auto [g, det] = detail::barycentric_gradients(a, b, c);
  ElementMatrix m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return (0.5 * std::abs(det) / 12.0) * m;
}

/// Matrix of the bilinear form integral of (grad u . grad v + u v) over all vertices.
inline SparseSymOperator assemble_stiffness_mass(const P1Space& space) {
  const Mesh2D& m = *space.mesh;
  Triplets trip;
  trip.reserve(9 * m.num_triangles());
  for (const auto& tri : m.triangles) {
    const Point2 &a = m.vertices[tri[0]], &b = m.vertices[tri[1]], &c = m.vertices[tri[2]];
    const ElementMatrix k = element_stiffness(a, b, c) + element_mass(a, b, c);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], k(i, j));
  }
  SparseSymOperator A(space.dof_count(), space.dof_count());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

/// Load vector integral of f phi_i with a symmetric triangle rule of the given order.
inline Eigen::VectorXd assemble_load(const P1Space& space, const ScalarField2D& f, int quadrature_order = 4) {
  if (quadrature_order < 2) throw std::invalid_argument("assemble_load: quadrature order must be >= 2");
  const Mesh2D& m = *space.mesh;
  const auto rule = triangle_rule(quadrature_order);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.dof_count());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const Point2 &a = m.vertices[tri[0]], &b = m.vertices[tri[1]], &c = m.vertices[tri[2]];
    const double jac = 2.0 * std::abs(m.signed_area(t));
    for (const auto& q : rule) {
      const std::array<double, 3> phi{1.0 - q.xi - q.eta, q.xi, q.eta};
      const double x = phi[0] * a.x + phi[1] * b.x + phi[2] * c.x;
      const double y = phi[0] * a.y + phi[1] * b.y + phi[2] * c.y;
      const double fw = f(x, y) * q.weight * jac;
      for (int i = 0; i < 3; ++i) load[tri[i]] += fw * phi[i];
    }
  }
  return load;
}

/// Nodal interpolant of a field on every vertex.
inline Eigen::VectorXd interpolate(const P1Space& space, const ScalarField2D& g) {
  Eigen::VectorXd v(space.dof_count());
  for (int i = 0; i < space.dof_count(); ++i) v[i] = g(space.mesh->vertices[i].x, space.mesh->vertices[i].y);
  return v;
}

/// Values of g at the Dirichlet vertices, in the order of space.dirichlet_dofs.
inline Eigen::VectorXd dirichlet_values(const P1Space& space, const ScalarField2D& g) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(space.dirichlet_dofs.size()));
  for (std::size_t i = 0; i < space.dirichlet_dofs.size(); ++i) {
    const Point2& p = space.mesh->vertices[space.dirichlet_dofs[i]];
    v[static_cast<Eigen::Index>(i)] = g(p.x, p.y);
  }
  return v;
}

/// Restriction of a nodal vector to the vertices of an interface trace.
inline Eigen::VectorXd restrict_to_trace(const InterfaceTrace& trace, const Eigen::VectorXd& nodal) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(trace.vertices.size()));
  for (std::size_t i = 0; i < trace.vertices.size(); ++i) t[static_cast<Eigen::Index>(i)] = nodal[trace.vertices[i]];
  return t;
}

inline InterfaceGrid trace_grid(const InterfaceTrace& trace, int owner) {
  return InterfaceGrid(trace.coords, owner, trace.interface_id);
}

namespace detail {

inline void check_mortar_on_trace(const InterfaceTrace& trace, const MortarSpace& mortar) {
  const auto& s = mortar.grid().s;
  if (s.size() != trace.coords.size()) throw std::invalid_argument("mortar grid does not match the trace grid");
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::abs(s[i] - trace.coords[i]) > kBreakpointTol)
      throw std::invalid_argument("mortar grid does not match the trace grid");
}

}  // namespace detail

/// Cross mass restricted to the trace: Bt(i, j) = integral of psi_i chi_j for the
/// trace hat chi_j of the j-th trace vertex. Exact on the single matching grid.
inline Eigen::MatrixXd trace_cross_mass(const InterfaceTrace& trace, const MortarSpace& mortar) {
  detail::check_mortar_on_trace(trace, mortar);
  return mortar.nodal_basis().transpose() * trace_mass(mortar.grid());
}

/// B(i, v) = integral over the interface of psi_i phi_v for every mesh vertex v.
inline Eigen::SparseMatrix<double> assemble_interface_cross_mass(const P1Space& space, const InterfaceTrace& trace,
                                                                 const MortarSpace& mortar) {
  const Eigen::MatrixXd bt = trace_cross_mass(trace, mortar);
  Triplets trip;
  for (Eigen::Index i = 0; i < bt.rows(); ++i)
    for (Eigen::Index j = 0; j < bt.cols(); ++j)
      if (bt(i, j) != 0.0) trip.emplace_back(static_cast<int>(i), trace.vertices[j], bt(i, j));
  Eigen::SparseMatrix<double> b(mortar.dimension(), space.dof_count());
  b.setFromTriplets(trip.begin(), trip.end());
  return b;
}

/// One interface side as seen by the local solver.
struct InterfaceCoupling {
  InterfaceTrace trace;
  std::shared_ptr<const MortarSpace> mortar;
  Eigen::MatrixXd cross;  ///< trace_cross_mass(trace, *mortar)

  InterfaceCoupling() = default;
  InterfaceCoupling(InterfaceTrace t, std::shared_ptr<const MortarSpace> m)
      : trace(std::move(t)), mortar(std::move(m)), cross(trace_cross_mass(trace, *mortar)) {}
};

struct LocalSolution {
  Eigen::VectorXd u;               ///< nodal values on all vertices
  std::vector<Eigen::VectorXd> p;  ///< mortar coefficients, one per coupling
};

/// Solver for the local Robin problem on one subdomain
///
///   A u - sum_l B_l^T p_l = F        (rows of free vertices)
///   M_l p_l + alpha B_l u = G_l      (one block per interface side)
///
/// p is eliminated through the mortar mass, leaving the SPD system
/// (A + alpha sum B^T M^-1 B) u = F + sum B^T M^-1 G on the free vertices.
/// The factorization is computed once and reused for every right-hand side.
class LocalRobinSolver {
 public:
  LocalRobinSolver(const P1Space& space, const SparseSymOperator& stiffness,
                   std::vector<InterfaceCoupling> couplings, double alpha)
      : space_(space), couplings_(std::move(couplings)), alpha_(alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("LocalRobinSolver: alpha must be positive");
    const int nv = space_.dof_count();
    Triplets trip;
    trip.reserve(static_cast<std::size_t>(stiffness.nonZeros()));
    for (int k = 0; k < stiffness.outerSize(); ++k)
      for (SparseSymOperator::InnerIterator it(stiffness, k); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (const auto& c : couplings_) {
      const Eigen::MatrixXd minv_b = c.mortar->mass_factor().solve(c.cross);
      const Eigen::MatrixXd k = alpha_ * (c.cross.transpose() * minv_b);
      const auto& tv = c.trace.vertices;
      for (Eigen::Index i = 0; i < k.rows(); ++i)
        for (Eigen::Index j = 0; j < k.cols(); ++j) trip.emplace_back(tv[i], tv[j], k(i, j));
    }
    SparseSymOperator s(nv, nv);
    s.setFromTriplets(trip.begin(), trip.end());
    schur_ = s;

    const int nf = static_cast<int>(space_.free_dofs.size());
    const int nd = static_cast<int>(space_.dirichlet_dofs.size());
    std::vector<int> dir_index(nv, -1);
    for (int i = 0; i < nd; ++i) dir_index[space_.dirichlet_dofs[i]] = i;
    Triplets ff, fd;
    for (int k = 0; k < s.outerSize(); ++k) {
      for (SparseSymOperator::InnerIterator it(s, k); it; ++it) {
        const int r = space_.free_index[it.row()];
        if (r < 0) continue;
        const int cf = space_.free_index[it.col()];
        if (cf >= 0)
          ff.emplace_back(r, cf, it.value());
        else
          fd.emplace_back(r, dir_index[it.col()], it.value());
      }
    }
    s_ff_.resize(nf, nf);
    s_ff_.setFromTriplets(ff.begin(), ff.end());
    s_fd_.resize(nf, nd);
    s_fd_.setFromTriplets(fd.begin(), fd.end());
    if (nf > 0) {
      factor_.compute(s_ff_);
      if (factor_.info() != Eigen::Success) throw std::runtime_error("LocalRobinSolver: factorization failed");
    }
  }

  LocalRobinSolver(const LocalRobinSolver&) = delete;
  LocalRobinSolver& operator=(const LocalRobinSolver&) = delete;

  const P1Space& space() const { return space_; }
  const std::vector<InterfaceCoupling>& couplings() const { return couplings_; }
  double alpha() const { return alpha_; }
  /// Full Schur operator A + alpha sum B^T M^-1 B on all vertices.
  const SparseSymOperator& schur_operator() const { return schur_; }

  /// \param load       F on all vertices
  /// \param moments    G_l, one per coupling
  /// \param dirichlet  values at space.dirichlet_dofs
  LocalSolution solve(const Eigen::VectorXd& load, const std::vector<Eigen::VectorXd>& moments,
                      const Eigen::VectorXd& dirichlet) const {
    if (moments.size() != couplings_.size()) throw std::invalid_argument("LocalRobinSolver: one moment vector per side");
    if (dirichlet.size() != static_cast<Eigen::Index>(space_.dirichlet_dofs.size()))
      throw std::invalid_argument("LocalRobinSolver: wrong number of Dirichlet values");
    Eigen::VectorXd rhs = load;
    for (std::size_t l = 0; l < couplings_.size(); ++l) {
      const auto& c = couplings_[l];
      if (moments[l].size() != c.mortar->dimension()) throw std::invalid_argument("LocalRobinSolver: moment size");
      const Eigen::VectorXd contrib = c.cross.transpose() * c.mortar->solve_mass(moments[l]);
      for (std::size_t j = 0; j < c.trace.vertices.size(); ++j) rhs[c.trace.vertices[j]] += contrib[j];
    }
    Eigen::VectorXd rhs_f(static_cast<Eigen::Index>(space_.free_dofs.size()));
    for (std::size_t i = 0; i < space_.free_dofs.size(); ++i) rhs_f[i] = rhs[space_.free_dofs[i]];
    if (dirichlet.size() > 0) rhs_f -= s_fd_ * dirichlet;

    LocalSolution sol;
    sol.u = Eigen::VectorXd::Zero(space_.dof_count());
    if (rhs_f.size() > 0) {
      const Eigen::VectorXd u_f = factor_.solve(rhs_f);
      if (factor_.info() != Eigen::Success) throw std::runtime_error("LocalRobinSolver: solve failed");
      for (std::size_t i = 0; i < space_.free_dofs.size(); ++i) sol.u[space_.free_dofs[i]] = u_f[i];
    }
    for (std::size_t i = 0; i < space_.dirichlet_dofs.size(); ++i) sol.u[space_.dirichlet_dofs[i]] = dirichlet[i];
    sol.p.reserve(couplings_.size());
    for (std::size_t l = 0; l < couplings_.size(); ++l) {
      const auto& c = couplings_[l];
      const Eigen::VectorXd bu = c.cross * restrict_to_trace(c.trace, sol.u);
      sol.p.push_back(c.mortar->solve_mass(moments[l] - alpha_ * bu));
    }
    return sol;
  }

 private:
  P1Space space_;
  std::vector<InterfaceCoupling> couplings_;
  double alpha_;
  SparseSymOperator schur_;
  SparseSymOperator s_ff_;
  SparseSymOperator s_fd_;
  Eigen::SimplicialLDLT<SparseSymOperator> factor_;
};

/// One-shot local Robin solve.
inline LocalSolution solve_local_robin(const P1Space& space, const SparseSymOperator& stiffness,
                                       std::vector<InterfaceCoupling> couplings, double alpha,
                                       const Eigen::VectorXd& load, const std::vector<Eigen::VectorXd>& moments,
                                       const Eigen::VectorXd& dirichlet) {
  const LocalRobinSolver solver(space, stiffness, std::move(couplings), alpha);
  return solver.solve(load, moments, dirichlet);
}

/// Dirichlet solve of (Id - Laplace) u = f with u = g on the whole boundary.
inline Eigen::VectorXd solve_dirichlet(const P1Space& space, const ScalarField2D& f, const ScalarField2D& g,
                                       int quadrature_order = 4) {
  // Any positive alpha works: there are no couplings.
  const LocalRobinSolver solver(space, assemble_stiffness_mass(space), {}, 1.0);
  return solver.solve(assemble_load(space, f, quadrature_order), {}, dirichlet_values(space, g)).u;
}

struct ErrorNorms {
  double h1_error = 0.0;
  double l2_error = 0.0;
  double linf_nodal = 0.0;
  double h1_exact = 0.0;

  double relative_h1() const { return h1_error / h1_exact; }
};

/// H1 and L2 errors of a P1 field against an exact solution, by elementwise
/// quadrature of the given order, plus the max nodal error and the H1 norm of the exact solution.
inline ErrorNorms error_norms(const P1Space& space, const Eigen::VectorXd& uh, const ScalarField2D& exact,
                              int quadrature_order = 5) {
  if (!exact.has_gradient()) throw std::invalid_argument("error_norms: exact field needs a gradient");
  const Mesh2D& m = *space.mesh;
  const auto rule = triangle_rule(std::max(quadrature_order, 4));
  ErrorNorms e;
  double grad_err = 0.0, val_err = 0.0, ex = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const Point2 &a = m.vertices[tri[0]], &b = m.vertices[tri[1]], &c = m.vertices[tri[2]];
    const auto [g, det] = detail::barycentric_gradients(a, b, c);
    const double jac = std::abs(det);
    const Eigen::Vector3d ue(uh[tri[0]], uh[tri[1]], uh[tri[2]]);
    const Eigen::Vector2d grad_h = g.transpose() * ue;
    for (const auto& q : rule) {
      const std::array<double, 3> phi{1.0 - q.xi - q.eta, q.xi, q.eta};
      const double x = phi[0] * a.x + phi[1] * b.x + phi[2] * c.x;
      const double y = phi[0] * a.y + phi[1] * b.y + phi[2] * c.y;
      const double uval = exact(x, y);
      const auto ug = exact.gradient(x, y);
      const double vh = phi[0] * ue[0] + phi[1] * ue[1] + phi[2] * ue[2];
      const double w = q.weight * jac;
      const double dgx = grad_h[0] - ug[0], dgy = grad_h[1] - ug[1];
      grad_err += w * (dgx * dgx + dgy * dgy);
      val_err += w * (vh - uval) * (vh - uval);
      ex += w * (ug[0] * ug[0] + ug[1] * ug[1] + uval * uval);
    }
  }
  for (int v = 0; v < space.dof_count(); ++v)
    e.linf_nodal = std::max(e.linf_nodal, std::abs(uh[v] - exact(m.vertices[v].x, m.vertices[v].y)));
  e.h1_error = std::sqrt(grad_err + val_err);
  e.l2_error = std::sqrt(val_err);
  e.h1_exact = std::sqrt(ex);
  return e;
}

}  // namespace nmschwarz
