#pragma once

/// \file legendre.hpp
/// \brief Numerical check of the end-interval polynomial lemma for high-order mortars.
///
/// For eta in P^p([-1,1]) with eta(-1) = 0, the maximiser psi = S(eta) of
///
///   J(psi; eta) = integral of (eta psi - 1/4 (eta - psi)^2)
///
/// over psi in P^{p-1} with psi(1) = eta(1) has the closed form
/// psi = 3 eta - 3 eta_p L_p - mu R_{p-1}, R_{p-1} = sum (2m+1) L_m, and the
/// optimal value equals -Delta(eta) / (2 p^2) with
///
///   Delta(eta) = (2 eta(1) - 3 eta_p)^2 + p^2 (-4 ||eta||^2 + 9 eta_p^2 / (2p+1)).
///
/// J(S(eta); eta) > 0 for all eta != 0 therefore holds exactly when the
/// quadratic form Delta is negative definite, which is what extremal_scan checks.

#include "nmschwarz/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nmschwarz::legendre {

/// L_0..L_max at x by the three-term recurrence.
inline std::vector<double> values(int max_degree, double x) {
  std::vector<double> v(static_cast<std::size_t>(max_degree) + 1);
  v[0] = 1.0;
  if (max_degree >= 1) v[1] = x;
  for (int m = 1; m < max_degree; ++m) v[m + 1] = ((2.0 * m + 1.0) * x * v[m] - m * v[m - 1]) / (m + 1.0);
  return v;
}

inline double value(int m, double x) { return values(m, x)[static_cast<std::size_t>(m)]; }

/// L'_0..L'_max at x from L'_{m+1} = L'_{m-1} + (2m+1) L_m (valid at the endpoints too).
inline std::vector<double> derivatives(int max_degree, double x) {
  const auto l = values(max_degree, x);
  std::vector<double> d(static_cast<std::size_t>(max_degree) + 1, 0.0);
  if (max_degree >= 1) d[1] = 1.0;
  for (int m = 1; m < max_degree; ++m) d[m + 1] = d[m - 1] + (2.0 * m + 1.0) * l[m];
  return d;
}

inline double derivative(int m, double x) { return derivatives(m, x)[static_cast<std::size_t>(m)]; }

/// ||L_m||^2 on [-1, 1].
inline double norm_sq(int m) { return 2.0 / (2.0 * m + 1.0); }

/// Legendre coefficients of L'_m = sum over k = m-1, m-3, ... of (2k+1) L_k.
inline Eigen::VectorXd derivative_coefficients(int m, int size) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(size);
  for (int k = m - 1; k >= 0; k -= 2) c[k] = 2.0 * k + 1.0;
  return c;
}

/// Polynomial given by its Legendre coefficients c_0..c_d.
struct LegendreSeries {
  Eigen::VectorXd coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double operator()(double x) const {
    const auto l = values(degree(), x);
    double s = 0.0;
    for (int m = 0; m <= degree(); ++m) s += coeffs[m] * l[m];
    return s;
  }
  double l2_norm_sq() const {
    double s = 0.0;
    for (int m = 0; m <= degree(); ++m) s += coeffs[m] * coeffs[m] * norm_sq(m);
    return s;
  }
};

/// eta = sum_{m=1}^{p} eta_m (L_m + L_{m-1}); every basis function vanishes at -1.
struct EtaPoly {
  Eigen::VectorXd coeffs;  ///< eta_1 .. eta_p stored at 0 .. p-1

  EtaPoly() = default;
  explicit EtaPoly(Eigen::VectorXd c) : coeffs(std::move(c)) {
    if (coeffs.size() < 1) throw std::invalid_argument("EtaPoly: degree must be >= 1");
  }

  int degree() const { return static_cast<int>(coeffs.size()); }
  double eta(int m) const { return coeffs[m - 1]; }  ///< 1-based
  double leading() const { return coeffs[degree() - 1]; }

  LegendreSeries legendre() const {
    const int p = degree();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p + 1);
    for (int m = 1; m <= p; ++m) {
      c[m] += eta(m);
      c[m - 1] += eta(m);
    }
    return {c};
  }

  double operator()(double x) const { return legendre()(x); }
  double at_one() const { return 2.0 * coeffs.sum(); }
  double l2_norm_sq() const { return legendre().l2_norm_sq(); }

  /// Inverse of legendre(): requires the series to vanish at -1.
  static EtaPoly from_legendre(const Eigen::VectorXd& c, double tol = 1e-10) {
    const int p = static_cast<int>(c.size()) - 1;
    if (p < 1) throw std::invalid_argument("EtaPoly::from_legendre: degree must be >= 1");
    Eigen::VectorXd e(p);
    e[p - 1] = c[p];
    for (int m = p - 1; m >= 1; --m) e[m - 1] = c[m] - e[m];
    const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    if (std::abs(c[0] - e[0]) > tol * scale)
      throw std::invalid_argument("EtaPoly::from_legendre: polynomial does not vanish at -1");
    return EtaPoly(e);
  }
};

/// psi = sum_{m=0}^{p-1} psi_m L_m.
struct PsiPoly {
  Eigen::VectorXd coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  LegendreSeries legendre() const { return {coeffs}; }
  double operator()(double x) const { return legendre()(x); }
  double at_one() const { return coeffs.sum(); }
  double l2_norm_sq() const { return legendre().l2_norm_sq(); }
};

/// ||R_{p-1}||^2 with R_{p-1} = sum_{m<p} (2m+1) L_m, by Legendre orthogonality.
inline double r_norm_sq(int p) {
  double s = 0.0;
  for (int m = 0; m < p; ++m) s += (2.0 * m + 1.0) * (2.0 * m + 1.0) * norm_sq(m);
  return s;
}

/// Vertex of the dual function G(mu; eta).
inline double optimal_multiplier(const EtaPoly& eta) {
  const int p = eta.degree();
  return (2.0 * eta.at_one() - 3.0 * eta.leading()) / (static_cast<double>(p) * p);
}

/// The constrained maximiser S(eta).
inline PsiPoly compute_S(const EtaPoly& eta) {
  const int p = eta.degree();
  if (p < 1) throw std::invalid_argument("compute_S: degree must be >= 1");
  const double mu = optimal_multiplier(eta);
  const LegendreSeries e = eta.legendre();
  PsiPoly psi;
  psi.coeffs.resize(p);
  for (int m = 0; m < p; ++m) psi.coeffs[m] = 3.0 * e.coeffs[m] - mu * (2.0 * m + 1.0);
  // 3 eta - 3 eta_p L_p removes the degree-p term exactly.
  return psi;
}

/// Fixed 64-point Gauss-Legendre rule, exact through degree 127.
inline const GaussRule1D& default_rule() {
  static const GaussRule1D rule = gauss_legendre(64);
  return rule;
}

/// J(psi; eta) by Gauss-Legendre quadrature.
inline double functional_J(const PsiPoly& psi, const EtaPoly& eta, const GaussRule1D& rule = default_rule()) {
  const LegendreSeries e = eta.legendre(), s = psi.legendre();
  double j = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double ev = e(rule.nodes[q]), sv = s(rule.nodes[q]);
    j += rule.weights[q] * (ev * sv - 0.25 * (ev - sv) * (ev - sv));
  }
  return j;
}

/// G(mu; eta) = p^2/2 mu^2 - mu (2 eta(1) - 3 eta_p) + 2 ||eta||^2 - 9/2 eta_p^2 / (2p+1).
inline double dual_G(double mu, const EtaPoly& eta) {
  const int p = eta.degree();
  const double ep = eta.leading();
  return 0.5 * p * p * mu * mu - mu * (2.0 * eta.at_one() - 3.0 * ep) + 2.0 * eta.l2_norm_sq() -
         4.5 * ep * ep / (2.0 * p + 1.0);
}

inline double discriminant_delta(const EtaPoly& eta) {
  const int p = eta.degree();
  const double ep = eta.leading();
  const double b = 2.0 * eta.at_one() - 3.0 * ep;
  return b * b + static_cast<double>(p) * p * (-4.0 * eta.l2_norm_sq() + 9.0 * ep * ep / (2.0 * p + 1.0));
}

/// Symmetric matrix Q of Delta on the eta-coefficient space, by polarization.
inline Eigen::MatrixXd delta_form(int p) {
  if (p < 1) throw std::invalid_argument("delta_form: degree must be >= 1");
  Eigen::MatrixXd q(p, p);
  const auto unit = [p](int i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
    e[i] = 1.0;
    return e;
  };
  for (int i = 0; i < p; ++i) q(i, i) = discriminant_delta(EtaPoly(unit(i)));
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      q(i, j) = q(j, i) = 0.5 * (discriminant_delta(EtaPoly(unit(i) + unit(j))) - q(i, i) - q(j, j));
  return q;
}

/// Gram matrix of the basis {L_m + L_{m-1}} in L2(-1, 1).
inline Eigen::MatrixXd eta_gram(int p) {
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    const int m = i + 1;
    n(i, i) = norm_sq(m) + norm_sq(m - 1);
    if (i + 1 < p) n(i, i + 1) = n(i + 1, i) = norm_sq(m);
  }
  return n;
}

struct SymmetricEigen {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< columns
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is below tol
/// (relative to the matrix norm). Rotation order is fixed, so results are deterministic.
inline SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, double tol = 1e-12, int max_sweeps = 100) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("jacobi_eigen: matrix must be square");
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    if (std::sqrt(off) <= tol * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  out.sweeps = sweep;
  return out;
}

struct ExtremalResult {
  int degree = 0;
  double largest_eigenvalue = 0.0;
  EtaPoly eigenvector;  ///< unit coefficient vector attaining it
};

/// Largest eigenvalue of the quadratic form Delta; Delta is negative definite iff it is < 0.
inline ExtremalResult extremal_scan(int p) {
  if (p < 2 || p > 20) throw std::invalid_argument("extremal_scan: degree must be in [2, 20]");
  const SymmetricEigen eig = jacobi_eigen(delta_form(p));
  ExtremalResult r;
  r.degree = p;
  r.largest_eigenvalue = eig.values[p - 1];
  r.eigenvector = EtaPoly(eig.vectors.col(p - 1));
  return r;
}

/// b^2 - 4ac of a binary quadratic form a x^2 + b x y + c y^2 given by its symmetric matrix.
inline double binary_form_discriminant(const Eigen::Matrix2d& q) {
  const double a = q(0, 0), b = 2.0 * q(0, 1), c = q(1, 1);
  return b * b - 4.0 * a * c;
}

namespace detail {

// Largest eigenvalue of the pencil (K, N) with N SPD, via Cholesky whitening.
inline std::pair<double, Eigen::VectorXd> largest_generalized(const Eigen::MatrixXd& k, const Eigen::MatrixXd& n) {
  const Eigen::LLT<Eigen::MatrixXd> llt(n);
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd linv = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n.rows(), n.cols()));
  Eigen::MatrixXd w = linv * k * linv.transpose();
  w = 0.5 * (w + w.transpose());
  const SymmetricEigen eig = jacobi_eigen(w);
  const Eigen::Index last = eig.values.size() - 1;
  const Eigen::VectorXd x = l.transpose().triangularView<Eigen::Upper>().solve(eig.vectors.col(last));
  return {eig.values[last], x};
}

// Matrix of the linear map S from eta coefficients to psi Legendre coefficients.
inline Eigen::MatrixXd s_matrix(int p) {
  Eigen::MatrixXd s(p, p);
  for (int i = 0; i < p; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
    e[i] = 1.0;
    s.col(i) = compute_S(EtaPoly(e)).coeffs;
  }
  return s;
}

}  // namespace detail

/// min over eta != 0 of J(S(eta); eta) / ||eta||^2, i.e. -max(Delta/||eta||^2) / (2 p^2).
inline double min_J_ratio(int p) {
  const auto [lmax, vec] = detail::largest_generalized(delta_form(p), eta_gram(p));
  return -lmax / (2.0 * p * p);
}

/// Smallest C with ||S(eta)||^2 <= C ||eta||^2.
inline double stability_constant(int p) {
  const Eigen::MatrixXd s = detail::s_matrix(p);
  Eigen::MatrixXd psi_gram = Eigen::MatrixXd::Zero(p, p);
  for (int m = 0; m < p; ++m) psi_gram(m, m) = norm_sq(m);
  const Eigen::MatrixXd k = s.transpose() * psi_gram * s;
  return detail::largest_generalized(k, eta_gram(p)).first;
}

}  // namespace nmschwarz::legendre
