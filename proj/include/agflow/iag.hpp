#pragma once

#include "agflow/brownian.hpp"
#include "agflow/fields.hpp"
#include "agflow/flow.hpp"
#include "agflow/parallel.hpp"
#include "agflow/stats.hpp"
#include "agflow/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace agflow {

/// An Ito process Y = xi + int A ds + int B dW realized on an outer grid.
/// y has one value per node; a and b hold the left-endpoint (predictable)
/// samples used by the left-point Riemann sums.
struct ItoRealization {
  TimeGrid outer;
  std::vector<Vec> y;
  std::vector<Vec> a;
  std::vector<Mat> b;
};

using ItoProcessSpec = std::function<ItoRealization(const BrownianPath&, const TimeGrid&)>;

/// Y_t = xi + A t + B W_t, realized exactly from the path's increments.
inline ItoProcessSpec ito_constant_coefficients(Vec xi, Vec a_const, Mat b_const) {
  return [xi = std::move(xi), a_const = std::move(a_const), b_const = std::move(b_const)](
             const BrownianPath& path, const TimeGrid& outer) {
    const int factor = path.grid().steps / outer.steps;
    ItoRealization out;
    out.outer = outer;
    out.y.resize(static_cast<std::size_t>(outer.steps) + 1);
    out.a.assign(static_cast<std::size_t>(outer.steps), a_const);
    out.b.assign(static_cast<std::size_t>(outer.steps), b_const);
    for (int j = 0; j <= outer.steps; ++j)
      out.y[static_cast<std::size_t>(j)] =
          xi + outer.node(j) * a_const + b_const * path.increment_sum(0, j * factor);
    return out;
  };
}

/// Y = tamed Euler scheme at its own level, evaluated between scheme nodes
/// through the intra-step interpolant. A at an outer node r is the scheme's
/// frozen drift mu(Y_{floor(r)}) 1{kept}; B is the constant noise column.
inline ItoProcessSpec ito_tamed_scheme(VectorField mu, Mat beta_column, Vec xi,
                                       int scheme_steps) {
  return [mu = std::move(mu), beta_column = std::move(beta_column), xi = std::move(xi),
          scheme_steps](const BrownianPath& path, const TimeGrid& outer) {
    const TimeGrid scheme_grid{outer.horizon, scheme_steps};
    if (!path.grid().refines(scheme_grid))
      throw std::domain_error("ito_tamed_scheme: path must refine the scheme grid");
    const SchemeTrajectory traj = tamed_euler(mu, beta_column, xi, scheme_grid, path);
    const int factor = path.grid().steps / outer.steps;
    const int scheme_factor = path.grid().steps / scheme_steps;

    ItoRealization out;
    out.outer = outer;
    out.y.resize(static_cast<std::size_t>(outer.steps) + 1);
    out.a.resize(static_cast<std::size_t>(outer.steps));
    out.b.assign(static_cast<std::size_t>(outer.steps), beta_column);
    for (int j = 0; j <= outer.steps; ++j)
      out.y[static_cast<std::size_t>(j)] =
          tamed_state_at(mu, beta_column, traj, path, j * factor);
    for (int j = 0; j < outer.steps; ++j) {
      const int k = std::min((j * factor) / scheme_factor, scheme_steps - 1);
      const Vec drift = mu.eval(traj.grid.node(k), traj.state(k));
      out.a[static_cast<std::size_t>(j)] =
          traj.drift_applied[static_cast<std::size_t>(k)] ? drift : Vec::Zero(mu.dim).eval();
    }
    return out;
  };
}

/// Y follows the same Euler-Maruyama recursion as the flow itself on the fine
/// grid (zero-perturbation case: A = mu(Y), B = sigma(Y) sampled at the
/// outer nodes).
inline ItoProcessSpec ito_exact_flow(VectorField mu, DiffusionField sigma, Vec xi) {
  return [mu = std::move(mu), sigma = std::move(sigma), xi = std::move(xi)](
             const BrownianPath& path, const TimeGrid& outer) {
    const TimeGrid& fine = path.grid();
    const int factor = fine.steps / outer.steps;
    ItoRealization out;
    out.outer = outer;
    out.y.resize(static_cast<std::size_t>(outer.steps) + 1);
    out.a.resize(static_cast<std::size_t>(outer.steps));
    out.b.resize(static_cast<std::size_t>(outer.steps));

    Vec y = xi;
    const double h = fine.dt();
    for (int k = 0; k <= fine.steps; ++k) {
      if (k % factor == 0) {
        const int j = k / factor;
        out.y[static_cast<std::size_t>(j)] = y;
        if (j < outer.steps) {
          out.a[static_cast<std::size_t>(j)] = mu.eval(fine.node(k), y);
          out.b[static_cast<std::size_t>(j)] = sigma.eval(fine.node(k), y);
        }
      }
      if (k == fine.steps) break;
      const double t = fine.node(k);
      y += h * mu.eval(t, y) + sigma.eval(t, y) * path.increment(k);
      if (!y.allFinite()) throw DivergedSampleError(k);
    }
    return out;
  };
}

/// The three computable terms of the pathwise perturbation identity
///   f(X_{0,T}^{Y_0}) - f(Y_T)
///     = int f'(X) X1 (mu - A) dr                     (lebesgue_term)
///     + [Skorohod integral]                          (skorohod_residual)
///     + 1/2 sum_{i,j} (sigma sigma* - B B*)_{i,j}
///         (f''(X)(X1.,X1.) + f'(X) X2)(e_i,e_j) dr   (trace_term)
/// The Skorohod term has no constructive pathwise evaluation, so it is
/// reported as the residual; lhs == lebesgue + trace + residual bit-exactly.
struct IagTerms {
  Vec lhs;
  Vec lebesgue_term;
  Vec trace_term;
  Vec skorohod_residual;
  // Per-node Skorohod integrand samples u_{r_j} = f'(X) X1 (sigma - B),
  // flattened k x m row-major; consumed by the duality check.
  std::vector<Mat> skorohod_integrand;
};

inline IagTerms iag_terms(const VectorField& mu, const DiffusionField& sigma,
                          const ItoProcessSpec& ito, const TestFunction& f,
                          const BrownianPath& path, int outer_steps) {
  const TimeGrid& fine = path.grid();
  if (outer_steps < 1 || fine.steps % outer_steps != 0)
    throw std::domain_error("iag_terms: outer grid must divide the path grid");
  if (!sigma.is_additive)
    throw std::invalid_argument("iag_terms: derivatives require additive diffusion");
  const int d = mu.dim;
  const int k = f.out_dim;
  const int factor = fine.steps / outer_steps;
  const TimeGrid outer{fine.horizon, outer_steps};
  const double h_outer = outer.dt();

  const ItoRealization real = ito(path, outer);

  IagTerms out;
  out.lhs = f.value(flow_solve(mu, sigma, 0, real.y.front(), path, false).x) -
            f.value(real.y.back());
  out.lebesgue_term = Vec::Zero(k);
  out.trace_term = Vec::Zero(k);
  out.skorohod_integrand.reserve(static_cast<std::size_t>(outer_steps));

  for (int j = 0; j < outer_steps; ++j) {
    const double r = outer.node(j);
    const Vec& yr = real.y[static_cast<std::size_t>(j)];
    const FlowResult flow = flow_solve(mu, sigma, j * factor, yr, path, true);
    const Mat fprime = f.derivative(flow.x);
    const Mat sig = sigma.eval(r, yr);
    const Mat& b = real.b[static_cast<std::size_t>(j)];

    out.lebesgue_term +=
        h_outer * (fprime * (flow.x1 * (mu.eval(r, yr) - real.a[static_cast<std::size_t>(j)])));
    out.skorohod_integrand.push_back(fprime * flow.x1 * (sig - b));

    const Mat mismatch = sig * sig.transpose() - b * b.transpose();
    if (!mismatch.isZero(0.0)) {
      const Bilinear fsecond = f.second(flow.x);
      for (int c = 0; c < k; ++c) {
        Mat s = flow.x1.transpose() * fsecond[static_cast<std::size_t>(c)] * flow.x1;
        for (int a = 0; a < d; ++a) s += fprime(c, a) * flow.x2[static_cast<std::size_t>(a)];
        out.trace_term[c] += 0.5 * h_outer * mismatch.cwiseProduct(s).sum();
      }
    }
  }
  out.skorohod_residual = out.lhs - out.lebesgue_term - out.trace_term;
  return out;
}

// ---- Monte-Carlo drivers --------------------------------------------------

struct IagSetup {
  VectorField mu;
  DiffusionField sigma;
  ItoProcessSpec ito;
  TestFunction f;
  double horizon = 1.0;
  int fine_steps = 0;
  int brownian_dim = 1;
  int outer_steps = 0;
  std::string tag = "iag";
};

struct TermStats {
  std::string name;
  std::vector<MeanSe> components;  // one entry per output component of f
};

struct WeakIdentityStats {
  std::vector<TermStats> terms;  // lhs, lebesgue, trace, skorohod_residual
  std::int64_t samples = 0;
  std::int64_t diverged = 0;
  bool divergence_ok = true;  // diverged <= 0.1% of M
  bool pass = false;          // |mean residual| <= 3 SE componentwise
};

/// Sample means and standard errors of every identity term.
inline WeakIdentityStats weak_identity_check(const IagSetup& setup, std::int64_t M,
                                             std::uint64_t seed, int workers = 1) {
  if (M < 100) throw std::domain_error("weak_identity_check: need at least 100 samples");
  const int k = setup.f.out_dim;
  const TimeGrid fine{setup.horizon, setup.fine_steps};

  constexpr int kTerms = 4;
  std::vector<std::vector<double>> data(
      static_cast<std::size_t>(kTerms * k), std::vector<double>(static_cast<std::size_t>(M)));
  std::vector<char> valid(static_cast<std::size_t>(M), 0);

  parallel_samples(M, workers, [&](std::int64_t i) {
    try {
      const BrownianPath path = sample_brownian(seed, static_cast<std::uint64_t>(i), fine,
                                                setup.brownian_dim, setup.tag);
      const IagTerms t =
          iag_terms(setup.mu, setup.sigma, setup.ito, setup.f, path, setup.outer_steps);
      const Vec* terms[kTerms] = {&t.lhs, &t.lebesgue_term, &t.trace_term, &t.skorohod_residual};
      for (int w = 0; w < kTerms; ++w)
        for (int c = 0; c < k; ++c)
          data[static_cast<std::size_t>(w * k + c)][static_cast<std::size_t>(i)] = (*terms[w])[c];
      valid[static_cast<std::size_t>(i)] = 1;
    } catch (const DivergedSampleError&) {
      valid[static_cast<std::size_t>(i)] = 0;
    }
  });

  WeakIdentityStats out;
  std::vector<std::size_t> keep;
  keep.reserve(static_cast<std::size_t>(M));
  for (std::int64_t i = 0; i < M; ++i)
    if (valid[static_cast<std::size_t>(i)]) keep.push_back(static_cast<std::size_t>(i));
  out.samples = static_cast<std::int64_t>(keep.size());
  out.diverged = M - out.samples;
  out.divergence_ok = static_cast<double>(out.diverged) <= 1e-3 * static_cast<double>(M);

  const char* names[kTerms] = {"lhs", "lebesgue", "trace", "skorohod_residual"};
  std::vector<double> buffer(keep.size());
  for (int w = 0; w < kTerms; ++w) {
    TermStats ts;
    ts.name = names[w];
    for (int c = 0; c < k; ++c) {
      const auto& src = data[static_cast<std::size_t>(w * k + c)];
      for (std::size_t p = 0; p < keep.size(); ++p) buffer[p] = src[keep[p]];
      ts.components.push_back(mean_se(buffer));
    }
    out.terms.push_back(std::move(ts));
  }

  out.pass = out.divergence_ok;
  for (const MeanSe& ms : out.terms.back().components)
    if (std::abs(ms.mean) > 3.0 * ms.se) out.pass = false;
  return out;
}

/// Functional Z = g(W_T) of the terminal Brownian value, with dZ/dW = g'.
struct DualFunctional {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> g_prime;
};

struct DualityResult {
  std::string name;
  MeanSe lhs;   // E[ Z * skorohod_residual ]
  MeanSe rhs;   // E[ g'(W_T) * int u_r dr ]
  MeanSe diff;  // paired difference on common samples
  bool pass = false;
};

/// Adjointness check E[<F, delta(u)>] = E[<D F, u>] for the residual-valued
/// Skorohod term, restricted to the scalar constant-coefficient setting where
/// the integrand u_r is explicit. D_r Z = g'(W_T), constant in r.
inline std::vector<DualityResult> skorohod_duality_check(const IagSetup& setup,
                                                         const std::vector<DualFunctional>& zs,
                                                         std::int64_t M, std::uint64_t seed,
                                                         int workers = 1) {
  if (setup.mu.dim != 1 || setup.brownian_dim != 1 || setup.f.out_dim != 1)
    throw std::invalid_argument("skorohod_duality_check: scalar constant-coefficient case only");
  if (M < 100) throw std::domain_error("skorohod_duality_check: need at least 100 samples");
  const TimeGrid fine{setup.horizon, setup.fine_steps};
  const double h_outer = setup.horizon / setup.outer_steps;

  const std::size_t nz = zs.size();
  std::vector<std::vector<double>> lhs_data(nz, std::vector<double>(static_cast<std::size_t>(M)));
  std::vector<std::vector<double>> rhs_data(nz, std::vector<double>(static_cast<std::size_t>(M)));

  parallel_samples(M, workers, [&](std::int64_t i) {
    const BrownianPath path =
        sample_brownian(seed, static_cast<std::uint64_t>(i), fine, 1, setup.tag);
    const IagTerms t =
        iag_terms(setup.mu, setup.sigma, setup.ito, setup.f, path, setup.outer_steps);
    const double wt = path.terminal_value()[0];
    double integral_u = 0.0;
    for (const Mat& u : t.skorohod_integrand) integral_u += h_outer * u(0, 0);
    for (std::size_t z = 0; z < nz; ++z) {
      lhs_data[z][static_cast<std::size_t>(i)] = zs[z].g(wt) * t.skorohod_residual[0];
      rhs_data[z][static_cast<std::size_t>(i)] = zs[z].g_prime(wt) * integral_u;
    }
  });

  std::vector<DualityResult> out;
  std::vector<double> diff(static_cast<std::size_t>(M));
  for (std::size_t z = 0; z < nz; ++z) {
    DualityResult r;
    r.name = zs[z].name;
    r.lhs = mean_se(lhs_data[z]);
    r.rhs = mean_se(rhs_data[z]);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = lhs_data[z][i] - rhs_data[z][i];
    r.diff = mean_se(diff);
    r.pass = std::abs(r.diff.mean) <= 3.0 * std::max(r.diff.se, 1e-300);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace agflow
