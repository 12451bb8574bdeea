#pragma once

/// \file fields.hpp
/// \brief Scalar fields on the plane and the manufactured test problem.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace nmschwarz {

struct ScalarField2D {
  using Value = std::function<double(double, double)>;
  using Gradient = std::function<std::array<double, 2>(double, double)>;

  Value value;
  Gradient gradient;  ///< may be empty

  double operator()(double x, double y) const { return value(x, y); }
  bool has_gradient() const { return static_cast<bool>(gradient); }

  static ScalarField2D constant(double c) {
    return {[c](double, double) { return c; }, [](double, double) { return std::array<double, 2>{0.0, 0.0}; }};
  }
  static ScalarField2D zero() { return constant(0.0); }
  /// a + b x + c y
  static ScalarField2D affine(double a, double b, double c) {
    return {[=](double x, double y) { return a + b * x + c * y; },
            [=](double, double) { return std::array<double, 2>{b, c}; }};
  }
};

/// Solution, right-hand side and boundary data of a problem (Id - Laplace) u = f on the unit square.
struct ModelProblem {
  std::string name;
  ScalarField2D rhs;
  ScalarField2D boundary;
  ScalarField2D exact;  ///< value may be empty when no closed form is known

  bool has_exact() const { return static_cast<bool>(exact.value); }
};

/// u(x, y) = x^3 y^2 + sin(x y); f = x^3 (y^2 - 2) - 6 x y^2 + (1 + x^2 + y^2) sin(x y).
inline ModelProblem manufactured_problem() {
  ScalarField2D exact{
      [](double x, double y) { return x * x * x * y * y + std::sin(x * y); },
      [](double x, double y) {
        const double c = std::cos(x * y);
        return std::array<double, 2>{3.0 * x * x * y * y + y * c, 2.0 * x * x * x * y + x * c};
      }};
  ScalarField2D rhs{[](double x, double y) {
                      return x * x * x * (y * y - 2.0) - 6.0 * x * y * y + (1.0 + x * x + y * y) * std::sin(x * y);
                    },
                    {}};
  return {"paper4", rhs, exact, exact};
}

/// f = 0 and g = 0: the discrete solution is zero, iterates measure the error directly.
inline ModelProblem homogeneous_problem() {
  return {"zero", ScalarField2D::zero(), ScalarField2D::zero(), ScalarField2D::zero()};
}

inline ModelProblem problem_by_name(const std::string& name) {
  if (name == "paper4") return manufactured_problem();
  if (name == "zero") return homogeneous_problem();
  throw std::invalid_argument("unknown problem '" + name + "'");
}

}  // namespace nmschwarz
