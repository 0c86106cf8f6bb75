#pragma once

#include "agflow/brownian.hpp"
#include "agflow/fields.hpp"
#include "agflow/grid.hpp"
#include "agflow/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace agflow {

/// A state went non-finite mid-integration. Carries the offending step so
/// Monte-Carlo drivers can report and exclude the sample.
class DivergedSampleError : public std::runtime_error {
 public:
  explicit DivergedSampleError(int step)
      : std::runtime_error("trajectory diverged at step " + std::to_string(step)),
        step_index(step) {}
  int step_index;
};

/// Terminal value of the flow started at (node s, x) together with its first
/// and second derivatives in the initial condition. x2 is component-major:
/// x2[i](j,l) = d^2 X_i / dx_j dx_l.
struct FlowResult {
  Vec x;
  Mat x1;       // empty unless derivatives were requested
  Bilinear x2;  // empty unless derivatives were requested
  int start_index = 0;
  double start_time = 0.0;
  double end_time = 0.0;
};

namespace detail {

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace detail

/// Euler-Maruyama flow X_{s,T} on the path's grid, optionally carrying the
/// first and second variational processes. The variational equations
///   dX1 = mu'(X) X1 dr,           X1(s) = I
///   dX2(v,w) = [mu''(X)(X1 v, X1 w) + mu'(X) X2(v,w)] dr,   X2(s) = 0
/// hold pathwise for additive noise, so all three are advanced jointly with
/// one explicit Euler pass over the same nodes. Derivative output therefore
/// requires sigma.is_additive.
inline FlowResult flow_solve(const VectorField& mu, const DiffusionField& sigma, int s_index,
                             const Vec& x0, const BrownianPath& path, bool with_derivatives,
                             int end_index = -1) {
  const TimeGrid& grid = path.grid();
  const int d = mu.dim;
  if (end_index < 0) end_index = grid.steps;
  if (s_index < 0 || s_index > end_index || end_index > grid.steps)
    throw std::invalid_argument("flow_solve: start/end indices outside the grid");
  if (x0.size() != d) throw std::invalid_argument("flow_solve: state dimension mismatch");
  if (sigma.rows != d || sigma.cols != path.dim())
    throw std::invalid_argument("flow_solve: diffusion shape mismatch");
  if (with_derivatives && !sigma.is_additive)
    throw std::invalid_argument("flow_solve: derivatives require additive diffusion");

  const double h = grid.dt();
  FlowResult out;
  out.start_index = s_index;
  out.start_time = grid.node(s_index);
  out.end_time = grid.node(end_index);
  out.x = x0;
  if (with_derivatives) {
    out.x1 = Mat::Identity(d, d);
    out.x2 = zero_bilinear(d, d);
  }

  Bilinear x2_next;
  if (with_derivatives) x2_next = zero_bilinear(d, d);

  for (int k = s_index; k < end_index; ++k) {
    const double t = grid.node(k);
    const Vec drift = mu.eval(t, out.x);
    if (with_derivatives) {
      const Mat jac = mu.jacobian(t, out.x);
      const Bilinear hess = mu.hessian(t, out.x);
      for (int i = 0; i < d; ++i) {
        x2_next[i] = out.x1.transpose() * hess[i] * out.x1;
        for (int a = 0; a < d; ++a) x2_next[i] += jac(i, a) * out.x2[a];
        x2_next[i] = out.x2[i] + h * x2_next[i];
      }
      out.x1 += h * (jac * out.x1).eval();
      std::swap(out.x2, x2_next);
    }
    out.x += h * drift + sigma.eval(t, out.x) * path.increment(k);
    if (!detail::all_finite(out.x)) throw DivergedSampleError(k);
  }
  return out;
}

/// One tamed Euler trajectory on `grid`, driven by block sums of a finer
/// path. drift_applied records the taming indicator per step.
struct SchemeTrajectory {
  TimeGrid grid;
  Mat states;                       // (N+1) x d, row k = Y at node k
  std::vector<char> drift_applied;  // 1 when the drift increment was kept

  Vec state(int k) const { return states.row(k).transpose(); }
  Vec terminal() const { return states.row(states.rows() - 1).transpose(); }

  double taming_fraction() const {
    if (drift_applied.empty()) return 0.0;
    std::size_t tamed = 0;
    for (char c : drift_applied)
      if (!c) ++tamed;
    return static_cast<double>(tamed) / static_cast<double>(drift_applied.size());
  }
};

/// Tamed Euler step: the drift increment mu(Y_k) h is kept only while
/// ||mu(Y_k)||^2 < N/T; the additive noise column always advances the state.
inline SchemeTrajectory tamed_euler(const VectorField& mu, const Mat& beta_column, const Vec& xi,
                                    const TimeGrid& grid, const BrownianPath& path) {
  if (!path.grid().refines(grid))
    throw std::domain_error("tamed_euler: path grid must refine the scheme grid");
  const int d = mu.dim;
  if (xi.size() != d) throw std::invalid_argument("tamed_euler: initial value dimension mismatch");
  if (beta_column.rows() != d || beta_column.cols() != path.dim())
    throw std::invalid_argument("tamed_euler: diffusion column shape mismatch");

  const int factor = path.grid().steps / grid.steps;
  const double h = grid.dt();
  const double threshold = grid.steps / grid.horizon;  // N/T

  SchemeTrajectory traj;
  traj.grid = grid;
  traj.states.resize(grid.steps + 1, d);
  traj.drift_applied.assign(static_cast<std::size_t>(grid.steps), 0);
  traj.states.row(0) = xi.transpose();

  Vec y = xi;
  for (int k = 0; k < grid.steps; ++k) {
    const Vec drift = mu.eval(grid.node(k), y);
    const bool keep = drift.squaredNorm() < threshold;
    traj.drift_applied[static_cast<std::size_t>(k)] = keep ? 1 : 0;
    if (keep) y += h * drift;
    y += beta_column * path.increment_sum(k * factor, (k + 1) * factor);
    traj.states.row(k + 1) = y.transpose();
  }
  return traj;
}

/// Intra-step interpolant of the tamed scheme at a node of the fine path:
/// Y(kh + eps) = Y_k + mu(Y_k) eps 1{kept} + beta (W(kh+eps) - W(kh)).
inline Vec tamed_state_at(const VectorField& mu, const Mat& beta_column,
                          const SchemeTrajectory& traj, const BrownianPath& path,
                          int fine_index) {
  const int factor = path.grid().steps / traj.grid.steps;
  if (fine_index < 0 || fine_index > path.grid().steps)
    throw std::invalid_argument("tamed_state_at: fine index outside the path grid");
  const int k = std::min(fine_index / factor, traj.grid.steps - 1);
  const double eps = path.grid().node(fine_index) - traj.grid.node(k);
  Vec y = traj.state(k);
  if (traj.drift_applied[static_cast<std::size_t>(k)]) y += eps * mu.eval(traj.grid.node(k), y);
  y += beta_column * path.increment_sum(k * factor, fine_index);
  return y;
}

/// Coupling reference: the tamed scheme run on the path's own (finest) grid.
inline Vec reference_solution(const VectorField& mu, const DiffusionField& sigma, const Vec& xi,
                              const BrownianPath& path) {
  if (!sigma.is_additive)
    throw std::invalid_argument("reference_solution: diffusion must be additive");
  const Mat beta = sigma.eval(0.0, xi);
  return tamed_euler(mu, beta, xi, path.grid(), path).terminal();
}

}  // namespace agflow
