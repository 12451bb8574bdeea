#pragma once

/// \file gmres.hpp
/// \brief Restart-free GMRES with modified Gram-Schmidt and Givens rotations.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace nmschwarz {

struct GmresResult {
  Eigen::VectorXd x;
  std::vector<double> residuals;  ///< relative residual estimates, entry 0 is the initial one
  int iterations = 0;
  bool converged = false;
};

/// Solves op(x) = b starting from x0 = 0 until ||b - op(x)|| < tol ||b||.
///
/// \p on_iterate, when set, is called after every iteration with the iterate
/// and its residual estimate; forming the iterate costs one small triangular
/// solve and one basis combination.
template <class Operator>
GmresResult gmres(Operator&& op, const Eigen::VectorXd& b, double tol, int max_iter,
                  const std::function<void(int, const Eigen::VectorXd&, double)>& on_iterate = {}) {
  const Eigen::Index n = b.size();
  GmresResult res;
  res.x = Eigen::VectorXd::Zero(n);
  const double beta = b.norm();
  res.residuals.push_back(beta > 0.0 ? 1.0 : 0.0);
  if (beta == 0.0 || n == 0) {
    res.converged = true;
    return res;
  }
  const int m = static_cast<int>(std::min<Eigen::Index>(max_iter, n));
  std::vector<Eigen::VectorXd> basis;
  basis.reserve(static_cast<std::size_t>(m) + 1);
  basis.push_back(b / beta);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
  g[0] = beta;

  const auto iterate = [&](int k) {
    // y solves the leading k-by-k upper-triangular system
    const Eigen::VectorXd y =
        hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < k; ++i) x += y[i] * basis[static_cast<std::size_t>(i)];
    return x;
  };

  int k = 0;
  while (k < m) {
    Eigen::VectorXd w = op(basis[static_cast<std::size_t>(k)]);
    for (int i = 0; i <= k; ++i) {
      hess(i, k) = w.dot(basis[static_cast<std::size_t>(i)]);
      w -= hess(i, k) * basis[static_cast<std::size_t>(i)];
    }
    const double wn = w.norm();
    hess(k + 1, k) = wn;
    for (int i = 0; i < k; ++i) {
      const double t = cs[i] * hess(i, k) + sn[i] * hess(i + 1, k);
      hess(i + 1, k) = -sn[i] * hess(i, k) + cs[i] * hess(i + 1, k);
      hess(i, k) = t;
    }
    const double r = std::hypot(hess(k, k), hess(k + 1, k));
    cs[k] = hess(k, k) / r;
    sn[k] = hess(k + 1, k) / r;
    hess(k, k) = r;
    hess(k + 1, k) = 0.0;
    g[k + 1] = -sn[k] * g[k];
    g[k] = cs[k] * g[k];
    ++k;
    const double rel = std::abs(g[k]) / beta;
    res.residuals.push_back(rel);
    const bool breakdown = wn <= 1e-14 * beta;
    if (on_iterate) on_iterate(k, iterate(k), rel);
    if (rel < tol || breakdown) {
      res.converged = true;
      break;
    }
    basis.push_back(w / wn);
  }
  res.iterations = k;
  res.x = iterate(k);
  return res;
}

}  // namespace nmschwarz
