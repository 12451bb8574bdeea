#pragma once

/// \file mortar.hpp
/// \brief Interface grids, mortar multiplier spaces and L2 projections between non-matching traces.
///
/// An interface side is described by the arclength breakpoints s_0 < ... < s_n
/// of its mesh trace. Its mortar space holds the continuous piecewise-linear
/// functions on that partition that are constant on the two end intervals;
/// it has one degree of freedom per interior breakpoint. All interface
/// integrals are computed on the merged partition of the two grids with a
/// 2-point Gauss rule per merged segment, which is exact for the quadratic
/// products that appear.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nmschwarz {

/// Tolerance for collapsing nearly coincident breakpoints and matching endpoints.
inline constexpr double kBreakpointTol = 1e-12;

struct InterfaceGrid {
  std::vector<double> s;  ///< breakpoints, strictly increasing
  int owner = -1;         ///< subdomain owning this side
  int interface_id = -1;

  InterfaceGrid() = default;
  InterfaceGrid(std::vector<double> breakpoints, int owner_id = -1, int iface = -1)
      : s(std::move(breakpoints)), owner(owner_id), interface_id(iface) {
    validate();
  }

  int segments() const { return static_cast<int>(s.size()) - 1; }
  double length() const { return s.back() - s.front(); }
  double segment_length(int i) const { return s[i + 1] - s[i]; }

  void validate() const {
    if (s.size() < 2) throw std::invalid_argument("InterfaceGrid: need at least 2 breakpoints");
    for (std::size_t i = 1; i < s.size(); ++i)
      if (!(s[i] > s[i - 1])) throw std::invalid_argument("InterfaceGrid: breakpoints must be strictly increasing");
  }

  /// Segment index containing \p x (clamped to the grid).
  int locate(double x) const {
    auto it = std::upper_bound(s.begin(), s.end(), x);
    int i = static_cast<int>(it - s.begin()) - 1;
    return std::clamp(i, 0, segments() - 1);
  }
};

/// Continuous piecewise-linear function given by its values at the grid breakpoints.
struct PiecewiseLinearTrace {
  InterfaceGrid grid;
  Eigen::VectorXd values;

  PiecewiseLinearTrace() = default;
  PiecewiseLinearTrace(InterfaceGrid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != static_cast<Eigen::Index>(grid.s.size()))
      throw std::invalid_argument("PiecewiseLinearTrace: value count must equal breakpoint count");
  }

  double operator()(double x) const {
    const int i = grid.locate(x);
    const double t = (x - grid.s[i]) / grid.segment_length(i);
    return (1.0 - t) * values[i] + t * values[i + 1];
  }
};

/// Hat-function mass matrix of a single grid (tridiagonal, stored dense).
inline Eigen::MatrixXd trace_mass(const InterfaceGrid& g) {
  const int n = g.segments();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i < n; ++i) {
    const double h = g.segment_length(i);
    m(i, i) += h / 3.0;
    m(i + 1, i + 1) += h / 3.0;
    m(i, i + 1) += h / 6.0;
    m(i + 1, i) += h / 6.0;
  }
  return m;
}

/// Sorted union of two breakpoint lists with the same endpoints.
inline std::vector<double> merge_grids(const InterfaceGrid& a, const InterfaceGrid& b) {
  if (std::abs(a.s.front() - b.s.front()) > kBreakpointTol || std::abs(a.s.back() - b.s.back()) > kBreakpointTol)
    throw std::invalid_argument("merge_grids: grids do not span the same segment");
  std::vector<double> all;
  all.reserve(a.s.size() + b.s.size());
  std::merge(a.s.begin(), a.s.end(), b.s.begin(), b.s.end(), std::back_inserter(all));
  std::vector<double> out;
  out.reserve(all.size());
  for (double x : all)
    if (out.empty() || x - out.back() > kBreakpointTol) out.push_back(x);
  // Endpoints taken from grid a so the merged grid spans it exactly.
  out.front() = a.s.front();
  out.back() = a.s.back();
  return out;
}

/// Cross mass of hat functions: X(i, j) = integral of chi^row_i chi^col_j over the merged partition.
inline Eigen::MatrixXd hat_cross_mass(const InterfaceGrid& row, const InterfaceGrid& col) {
  const std::vector<double> merged = merge_grids(row, col);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(row.segments() + 1, col.segments() + 1);
  constexpr double g = 0.57735026918962576451;  // 1/sqrt(3)
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    const double a = merged[k], b = merged[k + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const int ir = row.locate(mid), ic = col.locate(mid);
    for (double q : {-g, g}) {
      const double xq = mid + half * q;
      const double tr = (xq - row.s[ir]) / row.segment_length(ir);
      const double tc = (xq - col.s[ic]) / col.segment_length(ic);
      const std::array<double, 2> vr{1.0 - tr, tr}, vc{1.0 - tc, tc};
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) x(ir + r, ic + c) += half * vr[r] * vc[c];
    }
  }
  return x;
}

/// Integral of the product of two piecewise-linear traces on the merged partition.
inline double integrate_product(const PiecewiseLinearTrace& u, const PiecewiseLinearTrace& v) {
  return u.values.dot(hat_cross_mass(u.grid, v.grid) * v.values);
}

inline double l2_norm(const PiecewiseLinearTrace& u) { return std::sqrt(integrate_product(u, u)); }

/// Mortar space on one interface side.
class MortarSpace {
 public:
  MortarSpace() = default;

  explicit MortarSpace(InterfaceGrid grid) : grid_(std::move(grid)) {
    grid_.validate();
    const int n = grid_.segments();
    if (n < 2) throw std::invalid_argument("MortarSpace: interface side needs at least one interior node");
    const int dim = n - 1;
    basis_ = Eigen::MatrixXd::Zero(n + 1, dim);
    for (int j = 0; j < dim; ++j) basis_(j + 1, j) = 1.0;
    basis_(0, 0) = 1.0;
    basis_(n, dim - 1) = 1.0;
    mass_ = basis_.transpose() * trace_mass(grid_) * basis_;
    mass_factor_.compute(mass_);
    if (mass_factor_.info() != Eigen::Success) throw std::runtime_error("MortarSpace: mass matrix not SPD");
  }

  const InterfaceGrid& grid() const { return grid_; }
  int dimension() const { return static_cast<int>(basis_.cols()); }

  /// Nodal values of the basis at the breakpoints, (n+1) x dimension.
  const Eigen::MatrixXd& nodal_basis() const { return basis_; }
  /// M_W(i, j) = integral of psi_i psi_j.
  const Eigen::MatrixXd& mass() const { return mass_; }
  const Eigen::LLT<Eigen::MatrixXd>& mass_factor() const { return mass_factor_; }

  Eigen::VectorXd solve_mass(const Eigen::VectorXd& rhs) const { return mass_factor_.solve(rhs); }

  Eigen::VectorXd to_nodal(const Eigen::VectorXd& coeffs) const { return basis_ * coeffs; }
  PiecewiseLinearTrace to_trace(const Eigen::VectorXd& coeffs) const { return {grid_, to_nodal(coeffs)}; }

  double eval_basis(int j, double x) const {
    const int i = grid_.locate(x);
    const double t = (x - grid_.s[i]) / grid_.segment_length(i);
    return (1.0 - t) * basis_(i, j) + t * basis_(i + 1, j);
  }

  double l2_norm(const Eigen::VectorXd& coeffs) const { return std::sqrt(coeffs.dot(mass_ * coeffs)); }

  /// Coefficients of a nodal trace that already lies in the space (values at interior nodes).
  Eigen::VectorXd coefficients_of(const Eigen::VectorXd& nodal) const { return nodal.segment(1, dimension()); }

 private:
  InterfaceGrid grid_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd mass_;
  Eigen::LLT<Eigen::MatrixXd> mass_factor_;
};

inline MortarSpace build_mortar(const InterfaceGrid& grid) { return MortarSpace(grid); }

/// L2-orthogonal projection of traces on a source grid onto a target mortar space.
class ProjectionOperator {
 public:
  ProjectionOperator() = default;

  ProjectionOperator(InterfaceGrid source, std::shared_ptr<const MortarSpace> target)
      : source_(std::move(source)), target_(std::move(target)) {
    if (!target_) throw std::invalid_argument("ProjectionOperator: null target");
    if (source_.interface_id != target_->grid().interface_id)
      throw std::invalid_argument("ProjectionOperator: source and target belong to different interfaces");
    cross_ = target_->nodal_basis().transpose() * hat_cross_mass(target_->grid(), source_);
  }

  const InterfaceGrid& source() const { return source_; }
  const MortarSpace& target() const { return *target_; }
  /// C(i, j) = integral of psi^target_i chi^source_j.
  const Eigen::MatrixXd& cross() const { return cross_; }

  /// Moments of a source trace against the target basis.
  Eigen::VectorXd moments(const Eigen::VectorXd& source_values) const {
    if (source_values.size() != cross_.cols()) throw std::invalid_argument("ProjectionOperator: size mismatch");
    return cross_ * source_values;
  }
  /// Mortar coefficients of pi(v).
  Eigen::VectorXd apply(const Eigen::VectorXd& source_values) const {
    return target_->solve_mass(moments(source_values));
  }

 private:
  InterfaceGrid source_;
  std::shared_ptr<const MortarSpace> target_;
  Eigen::MatrixXd cross_;
};

inline ProjectionOperator build_projection(const InterfaceGrid& source, std::shared_ptr<const MortarSpace> target) {
  return ProjectionOperator(source, std::move(target));
}

inline ProjectionOperator build_projection(const InterfaceGrid& source, const MortarSpace& target) {
  return ProjectionOperator(source, std::make_shared<const MortarSpace>(target));
}

/// Moments of the incoming Robin data, G_i = integral of (-p + alpha u) psi_i, where
/// (u, p) live on the source side and psi_i spans the target mortar space of
/// \p to_target.
inline Eigen::VectorXd robin_moment(const ProjectionOperator& to_target, const MortarSpace& source_mortar,
                                    const Eigen::VectorXd& u_trace, const Eigen::VectorXd& p, double alpha) {
  if (source_mortar.grid().interface_id != to_target.source().interface_id)
    throw std::invalid_argument("robin_moment: mismatched interface ids");
  if (p.size() != source_mortar.dimension()) throw std::invalid_argument("robin_moment: p has wrong length");
  return to_target.moments(alpha * u_trace - source_mortar.to_nodal(p));
}

inline Eigen::VectorXd robin_moment(const MortarSpace& source_mortar, const Eigen::VectorXd& u_trace,
                                    const Eigen::VectorXd& p, double alpha, const MortarSpace& target) {
  return robin_moment(build_projection(source_mortar.grid(), target), source_mortar, u_trace, p, alpha);
}

/// Test function associated with a trace vanishing at both ends: equal to eta
/// on the interior intervals and constant on each end interval, with the value
/// of eta at the adjacent interior node. The result lies in the mortar space of
/// the same grid.
inline PiecewiseLinearTrace end_interval_psi(const PiecewiseLinearTrace& eta) {
  const int n = eta.grid.segments();
  if (n < 2) throw std::invalid_argument("end_interval_psi: need at least one interior node");
  const double scale = eta.values.cwiseAbs().maxCoeff();
  const double tol = 1e-14 * std::max(scale, 1.0);
  if (std::abs(eta.values[0]) > tol || std::abs(eta.values[n]) > tol)
    throw std::invalid_argument("end_interval_psi: eta must vanish at both endpoints");
  Eigen::VectorXd psi = eta.values;
  psi[0] = eta.values[1];
  psi[n] = eta.values[n - 1];
  return {eta.grid, psi};
}

}  // namespace nmschwarz
