#pragma once

#include "agflow/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace agflow {

/// Drift coefficient with analytic first and second space derivatives.
/// hessian(t,x)[i] is the d x d matrix of second partials of component i.
struct VectorField {
  int dim = 0;
  int growth_exponent = 1;  // polynomial growth degree of eval
  std::function<Vec(double, const Vec&)> eval;
  std::function<Mat(double, const Vec&)> jacobian;
  std::function<Bilinear(double, const Vec&)> hessian;
};

/// Diffusion coefficient, d x m. `is_additive` marks state-independence.
struct DiffusionField {
  int rows = 0;
  int cols = 0;
  bool is_additive = false;
  std::function<Mat(double, const Vec&)> eval;
};

/// C^2 test function f: R^d -> R^k with growth constants (c, q):
/// ||f(x)||/(1+||x||), ||f'(x)||, ||f''(x)|| all bounded by c(1+||x||^q).
struct TestFunction {
  int in_dim = 0;
  int out_dim = 0;
  double growth_c = 1.0;
  double growth_q = 0.0;
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> derivative;  // k x d
  std::function<Bilinear(const Vec&)> second; // k components of d x d
};

inline DiffusionField constant_diffusion(Mat b) {
  DiffusionField out;
  out.rows = static_cast<int>(b.rows());
  out.cols = static_cast<int>(b.cols());
  out.is_additive = true;
  out.eval = [mat = std::move(b)](double, const Vec&) { return mat; };
  return out;
}

inline DiffusionField zero_diffusion(int d, int m) {
  return constant_diffusion(Mat::Zero(d, m));
}

/// Linear drift a*x in any dimension; jacobian a*I, hessian 0.
inline VectorField linear_field(double a, int d) {
  VectorField f;
  f.dim = d;
  f.growth_exponent = 1;
  f.eval = [a](double, const Vec& x) -> Vec { return a * x; };
  f.jacobian = [a, d](double, const Vec&) -> Mat { return a * Mat::Identity(d, d); };
  f.hessian = [d](double, const Vec&) { return zero_bilinear(d, d); };
  return f;
}

inline TestFunction identity_test_function(int d) {
  TestFunction f;
  f.in_dim = d;
  f.out_dim = d;
  f.growth_c = 1.0;
  f.growth_q = 0.0;
  f.value = [](const Vec& x) { return x; };
  f.derivative = [d](const Vec&) -> Mat { return Mat::Identity(d, d); };
  f.second = [d](const Vec&) { return zero_bilinear(d, d); };
  return f;
}

/// Scalar drift coef*x^3 + shift.
inline VectorField scalar_cubic_field(double coef, double shift) {
  VectorField f;
  f.dim = 1;
  f.growth_exponent = 3;
  f.eval = [coef, shift](double, const Vec& x) {
    return Vec::Constant(1, coef * x[0] * x[0] * x[0] + shift);
  };
  f.jacobian = [coef](double, const Vec& x) {
    return Mat::Constant(1, 1, 3.0 * coef * x[0] * x[0]);
  };
  f.hessian = [coef](double, const Vec& x) {
    return Bilinear{Mat::Constant(1, 1, 6.0 * coef * x[0])};
  };
  return f;
}

/// f(x) = (x^2, sin x) on the line; exercises vector-valued test functions.
inline TestFunction square_sin_test_function() {
  TestFunction f;
  f.in_dim = 1;
  f.out_dim = 2;
  f.growth_c = 2.0;
  f.growth_q = 1.0;
  f.value = [](const Vec& x) {
    Vec v(2);
    v[0] = x[0] * x[0];
    v[1] = std::sin(x[0]);
    return v;
  };
  f.derivative = [](const Vec& x) {
    Mat m(2, 1);
    m(0, 0) = 2.0 * x[0];
    m(1, 0) = std::cos(x[0]);
    return m;
  };
  f.second = [](const Vec& x) {
    Bilinear b = zero_bilinear(2, 1);
    b[0](0, 0) = 2.0;
    b[1](0, 0) = -std::sin(x[0]);
    return b;
  };
  return f;
}

/// f(x) = ||x||^2 as a scalar test function.
inline TestFunction squared_norm_test_function(int d) {
  TestFunction f;
  f.in_dim = d;
  f.out_dim = 1;
  f.growth_c = 2.0;
  f.growth_q = 1.0;
  f.value = [](const Vec& x) { return Vec::Constant(1, x.squaredNorm()); };
  f.derivative = [](const Vec& x) -> Mat { return 2.0 * x.transpose(); };
  f.second = [d](const Vec&) { return Bilinear{2.0 * Mat::Identity(d, d)}; };
  return f;
}

// ---- finite-difference verification -------------------------------------

/// max over probe points of the relative error between the analytic jacobian
/// and a central difference of eval.
inline double jacobian_fd_max_rel_error(const VectorField& field, double t,
                                        const std::vector<Vec>& probes, double eps) {
  double worst = 0.0;
  for (const Vec& x : probes) {
    const Mat jac = field.jacobian(t, x);
    Mat fd(field.dim, field.dim);
    for (int j = 0; j < field.dim; ++j) {
      Vec xp = x, xm = x;
      xp[j] += eps;
      xm[j] -= eps;
      fd.col(j) = (field.eval(t, xp) - field.eval(t, xm)) / (2.0 * eps);
    }
    const double scale = std::max(1.0, jac.norm());
    worst = std::max(worst, (jac - fd).norm() / scale);
  }
  return worst;
}

inline double hessian_fd_max_rel_error(const VectorField& field, double t,
                                       const std::vector<Vec>& probes, double eps) {
  double worst = 0.0;
  for (const Vec& x : probes) {
    const Bilinear hess = field.hessian(t, x);
    double scale = std::max(1.0, bilinear_frobenius_norm(hess));
    double err = 0.0;
    for (int j = 0; j < field.dim; ++j) {
      Vec xp = x, xm = x;
      xp[j] += eps;
      xm[j] -= eps;
      const Mat dj = (field.jacobian(t, xp) - field.jacobian(t, xm)) / (2.0 * eps);
      // dj(i, l) approximates d^2 f_i / dx_l dx_j
      for (int i = 0; i < field.dim; ++i)
        for (int l = 0; l < field.dim; ++l) err = std::max(err, std::abs(dj(i, l) - hess[i](l, j)));
    }
    worst = std::max(worst, err / scale);
  }
  return worst;
}

inline double test_function_fd_max_rel_error(const TestFunction& f,
                                             const std::vector<Vec>& probes, double eps,
                                             bool second_order) {
  double worst = 0.0;
  for (const Vec& x : probes) {
    if (!second_order) {
      const Mat der = f.derivative(x);
      Mat fd(f.out_dim, f.in_dim);
      for (int j = 0; j < f.in_dim; ++j) {
        Vec xp = x, xm = x;
        xp[j] += eps;
        xm[j] -= eps;
        fd.col(j) = (f.value(xp) - f.value(xm)) / (2.0 * eps);
      }
      worst = std::max(worst, (der - fd).norm() / std::max(1.0, der.norm()));
    } else {
      const Bilinear hess = f.second(x);
      double scale = std::max(1.0, bilinear_frobenius_norm(hess));
      double err = 0.0;
      for (int j = 0; j < f.in_dim; ++j) {
        Vec xp = x, xm = x;
        xp[j] += eps;
        xm[j] -= eps;
        const Mat dj = (f.derivative(xp) - f.derivative(xm)) / (2.0 * eps);
        for (int i = 0; i < f.out_dim; ++i)
          for (int l = 0; l < f.in_dim; ++l)
            err = std::max(err, std::abs(dj(i, l) - hess[i](l, j)));
      }
      worst = std::max(worst, err / scale);
    }
  }
  return worst;
}

/// Growth-envelope check of (c, q) on probe points; returns the worst ratio
/// quantity / (c (1 + ||x||^q)), which should be <= 1.
inline double test_function_growth_worst_ratio(const TestFunction& f,
                                               const std::vector<Vec>& probes) {
  double worst = 0.0;
  for (const Vec& x : probes) {
    const double envelope = f.growth_c * (1.0 + std::pow(x.norm(), f.growth_q));
    const double v0 = f.value(x).norm() / (1.0 + x.norm());
    const double v1 = f.derivative(x).norm();
    const double v2 = bilinear_frobenius_norm(f.second(x));
    worst = std::max(worst, std::max({v0, v1, v2}) / envelope);
  }
  return worst;
}

}  // namespace agflow
