#pragma once

/// \file schwarz.hpp
/// \brief Robin-Schwarz iteration on non-matching grids and its GMRES acceleration.
///
/// Each subdomain k keeps a nodal field u_k and, for every neighbour l, mortar
/// coefficients p_kl of the outward normal flux. One Jacobi sweep solves all
/// local Robin problems with the incoming moments
///
///   G_kl = integral over Gamma_kl of (-p_lk + alpha u_l) psi,  psi in W_kl,
///
/// computed from the previous iterate of the neighbours. The same sweep read as
/// a map on the concatenated moments is affine, lambda -> T lambda + c, and its
/// fixed point is the coupled discrete solution; GMRES on (I - T) lambda = c
/// accelerates the sweep.

#include "nmschwarz/fem_p1.hpp"
#include "nmschwarz/fields.hpp"
#include "nmschwarz/gmres.hpp"
#include "nmschwarz/mesh2d.hpp"
#include "nmschwarz/mortar.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nmschwarz {

struct Subdomain {
  std::shared_ptr<const Mesh2D> mesh;
  P1Space space;
  SparseSymOperator stiffness;
  Eigen::VectorXd load;
  Eigen::VectorXd dirichlet;  ///< values at space.dirichlet_dofs
  std::vector<int> sides;     ///< interface sides owned by this subdomain, in coupling order
  std::shared_ptr<const LocalRobinSolver> solver;
};

/// Ordered interface side (owner, neighbor).
struct InterfaceSide {
  int interface_id = 0;
  int owner = 0;
  int neighbor = 0;
  int opposite = 0;  ///< index of the side (neighbor, owner)
  int slot = 0;      ///< position in the owner's coupling list
  InterfaceTrace trace;
  InterfaceGrid grid;
  std::shared_ptr<const MortarSpace> mortar;
  ProjectionOperator from_neighbor;  ///< neighbour trace grid -> own mortar space
  ProjectionOperator from_self;      ///< own trace grid -> own mortar space
};

struct DecompositionProblem {
  std::vector<Subdomain> subdomains;
  std::vector<InterfaceDecl> interfaces;
  std::vector<InterfaceSide> sides;
  double alpha = 1.0;
  ModelProblem model;

  int num_subdomains() const { return static_cast<int>(subdomains.size()); }
  int num_sides() const { return static_cast<int>(sides.size()); }
  /// All interface grids of both sides.
  std::vector<InterfaceGrid> interface_grids() const {
    std::vector<InterfaceGrid> g;
    for (const auto& s : sides) g.push_back(s.grid);
    return g;
  }
  double h_max() const {
    double h = 0.0;
    for (const auto& s : subdomains) h = std::max(h, s.mesh->h_max);
    return h;
  }
};

/// Assembles every subdomain operator, trace, mortar space and projection.
/// Interface declarations refer to subdomains by their index in \p meshes.
inline DecompositionProblem build_problem(std::vector<Mesh2D> meshes, std::vector<InterfaceDecl> interfaces,
                                          double alpha, ModelProblem model, int quadrature_order = 4) {
  if (!(alpha > 0.0)) throw std::invalid_argument("build_problem: alpha must be positive");
  DecompositionProblem pb;
  pb.alpha = alpha;
  pb.model = std::move(model);
  pb.interfaces = std::move(interfaces);
  const int ns = static_cast<int>(meshes.size());

  for (const auto& d : pb.interfaces) {
    if (d.left_subdomain < 0 || d.left_subdomain >= ns || d.right_subdomain < 0 || d.right_subdomain >= ns ||
        d.left_subdomain == d.right_subdomain)
      throw std::invalid_argument("build_problem: interface must reference two distinct subdomains");
    for (int k : {d.left_subdomain, d.right_subdomain})
      if (!meshes[k].has_interface(d.id))
        throw std::invalid_argument("build_problem: mesh does not know interface " + std::to_string(d.id));
  }

  pb.subdomains.resize(ns);
  for (int k = 0; k < ns; ++k) {
    auto& sd = pb.subdomains[k];
    sd.mesh = std::make_shared<const Mesh2D>(std::move(meshes[k]));
    sd.space = make_p1_space(sd.mesh);
    sd.stiffness = assemble_stiffness_mass(sd.space);
    sd.load = assemble_load(sd.space, pb.model.rhs, quadrature_order);
    sd.dirichlet = dirichlet_values(sd.space, pb.model.boundary);
  }

  for (const auto& d : pb.interfaces) {
    for (auto [owner, neighbor] : {std::pair{d.left_subdomain, d.right_subdomain},
                                   std::pair{d.right_subdomain, d.left_subdomain}}) {
      InterfaceSide side;
      side.interface_id = d.id;
      side.owner = owner;
      side.neighbor = neighbor;
      side.trace = interface_trace(*pb.subdomains[owner].mesh, d.id);
      side.grid = trace_grid(side.trace, owner);
      side.mortar = std::make_shared<const MortarSpace>(side.grid);
      side.slot = static_cast<int>(pb.subdomains[owner].sides.size());
      pb.subdomains[owner].sides.push_back(static_cast<int>(pb.sides.size()));
      pb.sides.push_back(std::move(side));
    }
    const int a = pb.num_sides() - 2, b = pb.num_sides() - 1;
    pb.sides[a].opposite = b;
    pb.sides[b].opposite = a;
  }
  for (auto& side : pb.sides) {
    const auto& opp = pb.sides[side.opposite];
    side.from_neighbor = ProjectionOperator(opp.grid, side.mortar);
    side.from_self = ProjectionOperator(side.grid, side.mortar);
  }
  for (auto& sd : pb.subdomains) {
    std::vector<InterfaceCoupling> couplings;
    for (int s : sd.sides) couplings.emplace_back(pb.sides[s].trace, pb.sides[s].mortar);
    sd.solver = std::make_shared<const LocalRobinSolver>(sd.space, sd.stiffness, std::move(couplings), alpha);
  }
  return pb;
}

struct SchwarzState {
  std::vector<Eigen::VectorXd> u;  ///< per subdomain, all vertices
  std::vector<Eigen::VectorXd> p;  ///< per interface side, mortar coefficients
};

/// u = 0 on free vertices and Dirichlet data on the exterior boundary, p = 0.
inline SchwarzState initial_state(const DecompositionProblem& pb, bool lift_dirichlet = false) {
  SchwarzState st;
  for (const auto& sd : pb.subdomains) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(sd.space.dof_count());
    if (lift_dirichlet)
      for (std::size_t i = 0; i < sd.space.dirichlet_dofs.size(); ++i) u[sd.space.dirichlet_dofs[i]] = sd.dirichlet[i];
    st.u.push_back(std::move(u));
  }
  for (const auto& s : pb.sides) st.p.push_back(Eigen::VectorXd::Zero(s.mortar->dimension()));
  return st;
}

inline SchwarzState zero_state(const DecompositionProblem& pb) { return initial_state(pb, false); }

/// Incoming Robin moments G for every side, computed from the neighbours' data in \p st.
inline std::vector<Eigen::VectorXd> incoming_moments(const DecompositionProblem& pb, const SchwarzState& st) {
  std::vector<Eigen::VectorXd> g;
  g.reserve(pb.sides.size());
  for (const auto& side : pb.sides) {
    const auto& opp = pb.sides[side.opposite];
    const Eigen::VectorXd u_trace = restrict_to_trace(opp.trace, st.u[side.neighbor]);
    g.push_back(robin_moment(side.from_neighbor, *opp.mortar, u_trace, st.p[side.opposite], pb.alpha));
  }
  return g;
}

/// Solves every local Robin problem with the given incoming moments.
inline SchwarzState local_solves(const DecompositionProblem& pb, const std::vector<Eigen::VectorXd>& moments) {
  if (moments.size() != pb.sides.size()) throw std::invalid_argument("local_solves: one moment vector per side");
  SchwarzState st;
  st.u.resize(pb.subdomains.size());
  st.p.resize(pb.sides.size());
  for (std::size_t k = 0; k < pb.subdomains.size(); ++k) {
    const auto& sd = pb.subdomains[k];
    std::vector<Eigen::VectorXd> g;
    for (int s : sd.sides) g.push_back(moments[s]);
    LocalSolution sol = sd.solver->solve(sd.load, g, sd.dirichlet);
    st.u[k] = std::move(sol.u);
    for (std::size_t l = 0; l < sd.sides.size(); ++l) st.p[sd.sides[l]] = std::move(sol.p[l]);
  }
  return st;
}

/// One Jacobi sweep: every subdomain advances from the same previous state.
inline SchwarzState schwarz_step(const DecompositionProblem& pb, const SchwarzState& st) {
  return local_solves(pb, incoming_moments(pb, st));
}

/// Largest mortar-mass L2 norm over ordered sides (k, l) of
/// (p_k + alpha pi(u_k)) - pi(-p_l + alpha u_l).
inline double jump_residual(const DecompositionProblem& pb, const SchwarzState& st) {
  const auto g = incoming_moments(pb, st);
  double r = 0.0;
  for (std::size_t s = 0; s < pb.sides.size(); ++s) {
    const auto& side = pb.sides[s];
    const Eigen::VectorXd own = restrict_to_trace(side.trace, st.u[side.owner]);
    const Eigen::VectorXd jump =
        st.p[s] + side.mortar->solve_mass(pb.alpha * side.from_self.moments(own) - g[s]);
    r = std::max(r, side.mortar->l2_norm(jump));
  }
  return r;
}

/// E = sum_k integral of |grad u_k|^2 + u_k^2.
inline double subdomain_energy(const DecompositionProblem& pb, const SchwarzState& st) {
  double e = 0.0;
  for (std::size_t k = 0; k < pb.subdomains.size(); ++k) e += st.u[k].dot(pb.subdomains[k].stiffness * st.u[k]);
  return e;
}

/// B = 1/(4 alpha) sum over sides of integral of (p_k - alpha pi(u_k))^2.
inline double interface_energy(const DecompositionProblem& pb, const SchwarzState& st) {
  double b = 0.0;
  for (std::size_t s = 0; s < pb.sides.size(); ++s) {
    const auto& side = pb.sides[s];
    const Eigen::VectorXd own = restrict_to_trace(side.trace, st.u[side.owner]);
    const Eigen::VectorXd q = st.p[s] - pb.alpha * side.from_self.apply(own);
    b += q.dot(side.mortar->mass() * q);
  }
  return b / (4.0 * pb.alpha);
}

/// Relative discrete H1 and max-norm distance between two states.
struct StateDistance {
  double h1 = 0.0;
  double linf = 0.0;
};

inline StateDistance relative_distance(const DecompositionProblem& pb, const SchwarzState& st,
                                       const SchwarzState& reference) {
  double num = 0.0, den = 0.0, emax = 0.0, rmax = 0.0;
  for (std::size_t k = 0; k < pb.subdomains.size(); ++k) {
    const Eigen::VectorXd e = st.u[k] - reference.u[k];
    num += e.dot(pb.subdomains[k].stiffness * e);
    den += reference.u[k].dot(pb.subdomains[k].stiffness * reference.u[k]);
    emax = std::max(emax, e.cwiseAbs().maxCoeff());
    rmax = std::max(rmax, reference.u[k].cwiseAbs().maxCoeff());
  }
  return {den > 0.0 ? std::sqrt(num / den) : std::sqrt(num), rmax > 0.0 ? emax / rmax : emax};
}

/// Absolute H1 distance sqrt(sum_k (u_k - v_k)^T A_k (u_k - v_k)).
inline double h1_distance(const DecompositionProblem& pb, const SchwarzState& a, const SchwarzState& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < pb.subdomains.size(); ++k) {
    const Eigen::VectorXd e = a.u[k] - b.u[k];
    s += e.dot(pb.subdomains[k].stiffness * e);
  }
  return std::sqrt(s);
}

struct IterationRecord {
  int n = 0;
  double jump_residual = 0.0;
  double energy = 0.0;            ///< E
  double interface_energy = 0.0;  ///< B
  std::optional<double> h1_error;
  std::optional<double> linf_error;
};

struct SolverReport {
  std::string method;
  std::vector<IterationRecord> records;
  std::vector<double> gmres_residuals;
  bool converged = false;
  int iterations_used = 0;
  double final_residual = 0.0;
  double alpha = 0.0;
  double h = 0.0;
  double tol = 0.0;
  int max_iter = 0;
  double wall_seconds = 0.0;
  std::string config;  ///< configuration echo, filled by the caller
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 1000;
  std::optional<SchwarzState> initial;
  /// When set, every record carries the relative H1 / max-norm distance to it.
  std::optional<SchwarzState> reference;
  /// GMRES only: rebuild the state at every iteration to fill the records.
  bool track_iterates = true;
};

namespace detail {

inline IterationRecord make_record(const DecompositionProblem& pb, const SchwarzState& st, int n,
                                   const SolveOptions& opt) {
  IterationRecord r;
  r.n = n;
  r.jump_residual = jump_residual(pb, st);
  r.energy = subdomain_energy(pb, st);
  r.interface_energy = interface_energy(pb, st);
  if (opt.reference) {
    const auto d = relative_distance(pb, st, *opt.reference);
    r.h1_error = d.h1;
    r.linf_error = d.linf;
  }
  return r;
}

inline SolverReport make_report(const DecompositionProblem& pb, const std::string& method, const SolveOptions& opt) {
  SolverReport rep;
  rep.method = method;
  rep.alpha = pb.alpha;
  rep.h = pb.h_max();
  rep.tol = opt.tol;
  rep.max_iter = opt.max_iter;
  return rep;
}

}  // namespace detail

/// Fixed-point Schwarz iteration until the jump residual drops below tol.
/// Reaching max_iter is reported through SolverReport::converged, not thrown.
inline std::pair<SchwarzState, SolverReport> solve_schwarz(const DecompositionProblem& pb,
                                                           const SolveOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_schwarz: tol must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  SolverReport rep = detail::make_report(pb, "schwarz", opt);
  SchwarzState st = opt.initial ? *opt.initial : zero_state(pb);
  rep.records.push_back(detail::make_record(pb, st, 0, opt));
  for (int n = 1; n <= opt.max_iter; ++n) {
    st = schwarz_step(pb, st);
    rep.records.push_back(detail::make_record(pb, st, n, opt));
    rep.iterations_used = n;
    if (rep.records.back().jump_residual < opt.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.final_residual = rep.records.back().jump_residual;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(st), std::move(rep)};
}

/// The affine map lambda -> T lambda + c on concatenated incoming moments.
class InterfaceFixedPointMap {
 public:
  explicit InterfaceFixedPointMap(const DecompositionProblem& pb) : pb_(&pb) {
    offsets_.push_back(0);
    for (const auto& s : pb.sides) offsets_.push_back(offsets_.back() + s.mortar->dimension());
  }

  Eigen::Index size() const { return offsets_.back(); }

  std::vector<Eigen::VectorXd> split(const Eigen::VectorXd& lambda) const {
    if (lambda.size() != size()) throw std::invalid_argument("InterfaceFixedPointMap: size mismatch");
    std::vector<Eigen::VectorXd> parts;
    for (std::size_t s = 0; s + 1 < offsets_.size(); ++s)
      parts.push_back(lambda.segment(offsets_[s], offsets_[s + 1] - offsets_[s]));
    return parts;
  }

  Eigen::VectorXd join(const std::vector<Eigen::VectorXd>& parts) const {
    Eigen::VectorXd v(size());
    for (std::size_t s = 0; s < parts.size(); ++s) v.segment(offsets_[s], offsets_[s + 1] - offsets_[s]) = parts[s];
    return v;
  }

  /// State produced by the local solves for the moments lambda.
  SchwarzState state(const Eigen::VectorXd& lambda) const { return local_solves(*pb_, split(lambda)); }

  Eigen::VectorXd apply(const Eigen::VectorXd& lambda) const {
    return join(incoming_moments(*pb_, state(lambda)));
  }

  Eigen::VectorXd constant() const { return apply(Eigen::VectorXd::Zero(size())); }

 private:
  const DecompositionProblem* pb_;
  std::vector<Eigen::Index> offsets_;
};

inline InterfaceFixedPointMap interface_fixed_point_map(const DecompositionProblem& pb) {
  return InterfaceFixedPointMap(pb);
}

/// Power-iteration estimate of the spectral radius of T. Uses the growth of
/// ||T^k x|| over the last iterations, which also handles complex-conjugate
/// dominant pairs.
inline double estimate_spectral_radius(const InterfaceFixedPointMap& map, int iterations = 200,
                                       unsigned seed = 12345) {
  const Eigen::VectorXd c = map.constant();
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(map.size());
  for (auto& v : x) v = normal(rng);
  x.normalize();
  double log_growth = 0.0;
  const int tail = std::max(1, iterations / 2);
  for (int k = 0; k < iterations; ++k) {
    Eigen::VectorXd y = map.apply(x) - c;
    const double nrm = y.norm();
    if (nrm == 0.0) return 0.0;
    if (k >= iterations - tail) log_growth += std::log(nrm);
    x = y / nrm;
  }
  return std::exp(log_growth / tail);
}

/// GMRES on (I - T) lambda = c, followed by one pass of local solves.
inline std::pair<SchwarzState, SolverReport> solve_gmres(const DecompositionProblem& pb,
                                                         const SolveOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_gmres: tol must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  SolverReport rep = detail::make_report(pb, "gmres", opt);
  const InterfaceFixedPointMap map(pb);
  const Eigen::VectorXd c = map.constant();
  rep.records.push_back(detail::make_record(pb, zero_state(pb), 0, opt));
  const auto op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x - (map.apply(x) - c); };
  std::function<void(int, const Eigen::VectorXd&, double)> cb;
  if (opt.track_iterates) {
    cb = [&](int k, const Eigen::VectorXd& x, double) {
      rep.records.push_back(detail::make_record(pb, map.state(x), k, opt));
    };
  }
  const GmresResult g = gmres(op, c, opt.tol, opt.max_iter, cb);
  SchwarzState st = map.state(g.x);
  rep.gmres_residuals = g.residuals;
  rep.iterations_used = g.iterations;
  rep.converged = g.converged;
  if (!opt.track_iterates || rep.records.back().n != g.iterations)
    rep.records.push_back(detail::make_record(pb, st, g.iterations, opt));
  rep.final_residual = rep.records.back().jump_residual;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(st), std::move(rep)};
}

}  // namespace nmschwarz
