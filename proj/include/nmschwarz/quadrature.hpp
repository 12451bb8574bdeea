#pragma once

/// \file quadrature.hpp
/// \brief Gauss-Legendre rules on [-1,1] and symmetric rules on the reference triangle.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmschwarz {

/// 1D quadrature rule on [-1, 1].
struct GaussRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with \p n points. Nodes are the roots of L_n found by
/// Newton iteration from the Chebyshev initial guess.
inline GaussRule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule1D rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  // Returns (L_n(x), L_n'(x)).
  const auto eval = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int m = 1; m < n; ++m) {
      const double p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
      p0 = p1;
      p1 = p2;
    }
    return std::array<double, 2>{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [value, slope] = eval(x);
      const double dx = value / slope;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double slope = eval(x)[1];
    const double w = 2.0 / ((1.0 - x * x) * slope * slope);
    rule.nodes[i] = x;
    rule.nodes[n - 1 - i] = -x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Point on the reference triangle (0,0),(1,0),(0,1) with weight; weights sum to 1/2.
struct TrianglePoint {
  double xi;
  double eta;
  double weight;
};

namespace detail {

inline void push_orbit3(std::vector<TrianglePoint>& pts, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  pts.push_back({a, a, w});
  pts.push_back({b, a, w});
  pts.push_back({a, b, w});
}

}  // namespace detail

/// Quadrature on the reference triangle exact for total degree \p order.
///
/// Orders 1, 2, 4 and 5 use the classical symmetric rules (1, 3, 6 and 7
/// points). Any other order falls back to a collapsed (Duffy) product of
/// Gauss-Legendre rules, which is exact for the requested degree.
inline std::vector<TrianglePoint> triangle_rule(int order) {
  if (order < 1) throw std::invalid_argument("triangle_rule: order must be >= 1");
  std::vector<TrianglePoint> pts;
  switch (order) {
    case 1:
      pts.push_back({1.0 / 3.0, 1.0 / 3.0, 0.5});
      return pts;
    case 2:
      detail::push_orbit3(pts, 1.0 / 6.0, 1.0 / 6.0);
      return pts;
    case 3:
    case 4:
      detail::push_orbit3(pts, 0.445948490915965, 0.5 * 0.223381589678011);
      detail::push_orbit3(pts, 0.091576213509771, 0.5 * 0.109951743655322);
      return pts;
    case 5:
      pts.push_back({1.0 / 3.0, 1.0 / 3.0, 0.5 * 0.225});
      detail::push_orbit3(pts, 0.470142064105115, 0.5 * 0.132394152788506);
      detail::push_orbit3(pts, 0.101286507323456, 0.5 * 0.125939180544827);
      return pts;
    default:
      break;
  }
  // (xi, eta) = (u (1 - v), v) maps the unit square onto the triangle; jacobian (1 - v).
  const int n = (order + 3) / 2;
  const GaussRule1D g = gauss_legendre(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = 0.5 * (g.nodes[i] + 1.0);
      const double v = 0.5 * (g.nodes[j] + 1.0);
      pts.push_back({u * (1.0 - v), v, 0.25 * g.weights[i] * g.weights[j] * (1.0 - v)});
    }
  }
  return pts;
}

}  // namespace nmschwarz
