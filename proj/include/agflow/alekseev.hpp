#pragma once

#include "agflow/fields.hpp"
#include "agflow/flow.hpp"
#include "agflow/types.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace agflow {

/// Deterministic flow X_{s,t} of dy/dt = mu(t,y) with the first variational
/// process, advanced jointly by the classical 4th-order Runge-Kutta method:
/// the pair (X, X1) solves dX = mu(t,X) dt, dX1 = mu'(t,X) X1 dt, X1(s) = I.
struct OdeFlowResult {
  Vec x;
  Mat x1;
};

inline OdeFlowResult ode_flow_with_jacobian(const VectorField& mu, double s, const Vec& x0,
                                            double t1, int steps) {
  if (steps < 1) throw std::domain_error("ode_flow_with_jacobian: steps must be >= 1");
  const int d = mu.dim;
  const double h = (t1 - s) / steps;

  Vec x = x0;
  Mat j = Mat::Identity(d, d);
  for (int k = 0; k < steps; ++k) {
    const double t = s + k * h;
    const Vec k1 = mu.eval(t, x);
    const Mat m1 = mu.jacobian(t, x) * j;
    const Vec x2 = x + 0.5 * h * k1;
    const Vec k2 = mu.eval(t + 0.5 * h, x2);
    const Mat m2 = mu.jacobian(t + 0.5 * h, x2) * (j + 0.5 * h * m1);
    const Vec x3 = x + 0.5 * h * k2;
    const Vec k3 = mu.eval(t + 0.5 * h, x3);
    const Mat m3 = mu.jacobian(t + 0.5 * h, x3) * (j + 0.5 * h * m2);
    const Vec x4 = x + h * k3;
    const Vec k4 = mu.eval(t + h, x4);
    const Mat m4 = mu.jacobian(t + h, x4) * (j + h * m3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    j += (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    if (!x.allFinite()) throw DivergedSampleError(k);
  }
  return {x, j};
}

/// Both sides of the nonlinear variation-of-constants identity
///   f(X_{0,T}^{Y_0}) - f(Y_T) = int_0^T f'(X_{s,T}^{Y_s}) dX_{s,T}^{Y_s}/dx
///                                (mu(s,Y_s) - dY/ds) ds
/// for an ODE pair: X is the flow of mu, Y solves dY/ds = y_drift(s, Y).
struct AgResult {
  Vec lhs;
  Vec rhs;
  Vec residual;  // lhs - rhs
};

/// Composite midpoint rule over outer_steps nodes; every node restarts a
/// joint flow/variational RK4 solve from (s_j, Y_{s_j}) to T at inner
/// resolution, and dY/ds enters analytically as y_drift(s_j, Y_{s_j}).
inline AgResult ag_residual(const VectorField& mu, const VectorField& y_drift, const Vec& y0,
                            const TestFunction& f, double T, int outer_steps, int inner_steps) {
  if (!(T > 0.0)) throw std::domain_error("ag_residual: horizon must be positive");
  if (outer_steps < 1 || inner_steps < 1)
    throw std::domain_error("ag_residual: step counts must be >= 1");
  if (mu.dim != y_drift.dim || f.in_dim != mu.dim)
    throw std::invalid_argument("ag_residual: dimension mismatch");

  // Y on a uniform grid that contains all outer midpoints; resolution at
  // least inner_steps so the quadrature error dominates everywhere.
  const int per_half = std::max(1, (inner_steps + 2 * outer_steps - 1) / (2 * outer_steps));
  const int y_steps = 2 * outer_steps * per_half;
  const double hy = T / y_steps;
  std::vector<Vec> y_nodes(static_cast<std::size_t>(y_steps) + 1);
  y_nodes[0] = y0;
  {
    Vec y = y0;
    for (int k = 0; k < y_steps; ++k) {
      const double t = k * hy;
      const Vec k1 = y_drift.eval(t, y);
      const Vec k2 = y_drift.eval(t + 0.5 * hy, y + 0.5 * hy * k1);
      const Vec k3 = y_drift.eval(t + 0.5 * hy, y + 0.5 * hy * k2);
      const Vec k4 = y_drift.eval(t + hy, y + hy * k3);
      y += (hy / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!y.allFinite()) throw DivergedSampleError(k);
      y_nodes[static_cast<std::size_t>(k) + 1] = y;
    }
  }

  AgResult out;
  out.lhs = f.value(ode_flow_with_jacobian(mu, 0.0, y0, T, inner_steps).x) -
            f.value(y_nodes.back());

  Vec rhs = Vec::Zero(f.out_dim);
  const double h_outer = T / outer_steps;
  for (int j = 0; j < outer_steps; ++j) {
    const double s = (j + 0.5) * h_outer;
    const Vec& ys = y_nodes[static_cast<std::size_t>((2 * j + 1) * per_half)];
    const int n = std::max(1, static_cast<int>(
                                  std::ceil(inner_steps * (T - s) / T)));
    const OdeFlowResult flow = ode_flow_with_jacobian(mu, s, ys, T, n);
    rhs += h_outer * (f.derivative(flow.x) * (flow.x1 * (mu.eval(s, ys) - y_drift.eval(s, ys))));
  }
  out.rhs = rhs;
  out.residual = out.lhs - out.rhs;
  return out;
}

}  // namespace agflow
