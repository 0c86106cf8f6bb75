#pragma once

#include "agflow/brownian.hpp"
#include "agflow/fields.hpp"
#include "agflow/flow.hpp"
#include "agflow/parallel.hpp"
#include "agflow/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace agflow::vdp {

/// Van der Pol oscillator with additive forcing on the velocity component:
/// drift mu(x1,x2) = (x2, (gamma - alpha x1^2) x2 - delta x1), noise (0,beta).
struct VdpParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double delta = 1.0;
  Vec xi = Vec::Zero(2);
  double horizon = 1.0;

  void validate() const {
    if (!(alpha > 0.0 && beta > 0.0 && gamma > 0.0 && delta > 0.0))
      throw std::domain_error("VdpParams: coefficients must be strictly positive");
    if (xi.size() != 2) throw std::invalid_argument("VdpParams: xi must be 2-dimensional");
    if (!(horizon > 0.0)) throw std::domain_error("VdpParams: horizon must be positive");
  }
};

inline Vec drift(const Vec& x, const VdpParams& p) {
  Vec out(2);
  out[0] = x[1];
  out[1] = (p.gamma - p.alpha * x[0] * x[0]) * x[1] - p.delta * x[0];
  return out;
}

inline Mat drift_jacobian(const Vec& x, const VdpParams& p) {
  Mat j(2, 2);
  j(0, 0) = 0.0;
  j(0, 1) = 1.0;
  j(1, 0) = -2.0 * p.alpha * x[0] * x[1] - p.delta;
  j(1, 1) = p.gamma - p.alpha * x[0] * x[0];
  return j;
}

inline Bilinear drift_hessian(const Vec& x, const VdpParams& p) {
  Bilinear h = zero_bilinear(2, 2);
  h[1](0, 0) = -2.0 * p.alpha * x[1];
  h[1](0, 1) = -2.0 * p.alpha * x[0];
  h[1](1, 0) = -2.0 * p.alpha * x[0];
  return h;
}

inline VectorField drift_field(const VdpParams& p) {
  VectorField f;
  f.dim = 2;
  f.growth_exponent = 3;
  f.eval = [p](double, const Vec& x) { return drift(x, p); };
  f.jacobian = [p](double, const Vec& x) { return drift_jacobian(x, p); };
  f.hessian = [p](double, const Vec& x) { return drift_hessian(x, p); };
  return f;
}

inline Mat noise_column(const VdpParams& p) {
  Mat b = Mat::Zero(2, 1);
  b(1, 0) = p.beta;
  return b;
}

/// E[exp(c (a + b X)^2)] for standard normal X, valid while 2 b^2 c < 1:
/// (1 - 2 b^2 c)^{-1/2} exp(a^2 (c + 2 (b c)^2 / (1 - 2 b^2 c))).
inline double gaussian_square_mgf(double a, double b, double c) {
  const double denom = 1.0 - 2.0 * b * b * c;
  if (!(denom > 0.0))
    throw std::domain_error("gaussian_square_mgf: divergent expectation (2 b^2 c >= 1)");
  return std::exp(a * a * (c + 2.0 * (b * c) * (b * c) / denom)) / std::sqrt(denom);
}

// ---- moment-generating-function spot check --------------------------------

struct MgfTriple {
  double a = 0.0, b = 0.0, c = 0.0;
  double closed_form = 0.0;
  MeanSe monte_carlo;
  bool pass = false;
};

struct MgfCheckResult {
  std::vector<MgfTriple> triples;
  std::int64_t samples_per_triple = 0;
  bool pass = false;
};

/// Closed form vs Monte-Carlo mean of exp(c (a + b X)^2) for random
/// admissible triples. 2 b^2 c is kept in [0.05, 0.45] and triples whose
/// estimator has a theoretical relative standard deviation above 4 are
/// redrawn (the second moment is the same closed form at 2c): beyond that,
/// the variance lives in tail events that M samples cannot resolve and an
/// empirical 3-SE gate stops being a test.
inline MgfCheckResult mgf_check(std::uint64_t seed, int n_triples, std::int64_t M,
                                int workers = 1) {
  if (n_triples < 1 || M < 2) throw std::domain_error("mgf_check: bad sizes");
  MgfCheckResult out;
  out.samples_per_triple = M;
  out.pass = true;

  RandomStream triple_stream(seed, "mgf-triples", 0);
  std::vector<double> values(static_cast<std::size_t>(M));
  for (int t = 0; t < n_triples; ++t) {
    MgfTriple triple;
    double rel_sd = 0.0;
    do {
      triple.a = -2.0 + 4.0 * triple_stream.next_uniform();
      triple.b = 0.2 + 1.3 * triple_stream.next_uniform();
      if (triple_stream.next_uniform() < 0.5) triple.b = -triple.b;
      const double target = 0.05 + 0.40 * triple_stream.next_uniform();  // 2 b^2 c
      triple.c = target / (2.0 * triple.b * triple.b);
      triple.closed_form = gaussian_square_mgf(triple.a, triple.b, triple.c);
      const double second = gaussian_square_mgf(triple.a, triple.b, 2.0 * triple.c);
      rel_sd = std::sqrt(std::max(0.0, second - triple.closed_form * triple.closed_form)) /
               triple.closed_form;
    } while (rel_sd > 4.0);

    const std::uint64_t base = static_cast<std::uint64_t>(t) << 32;
    parallel_samples(M, workers, [&](std::int64_t i) {
      RandomStream rs(seed, "mgf", base + static_cast<std::uint64_t>(i));
      const double x = rs.next_gaussian();
      const double arg = triple.a + triple.b * x;
      values[static_cast<std::size_t>(i)] = std::exp(triple.c * arg * arg);
    });
    triple.monte_carlo = mean_se(values);
    triple.pass =
        std::abs(triple.monte_carlo.mean - triple.closed_form) <= 3.0 * triple.monte_carlo.se;
    out.pass = out.pass && triple.pass;
    out.triples.push_back(triple);
  }
  return out;
}

// ---- exponential-moment bound ----------------------------------------------

struct ExpMomentNode {
  double time = 0.0;
  MeanSe empirical;  // E[exp(c ||Y_r||^2)]
  bool pass = false;
};

struct ExpMomentResult {
  double c = 0.0;
  double bound = 0.0;  // exp((2 beta^2 + 1) T + ||xi||^2)
  std::vector<ExpMomentNode> nodes;
  bool pass = false;
};

/// Empirical E[exp(c ||Y^N_r||^2)] at every scheme node against the bound
/// exp((2 beta^2 + 1)T + ||xi||^2), with c at its maximal admissible value
/// exp(-T(1 + 3 beta^2 + delta + 2 gamma)). Requires N >= max{6 beta^2 T, T}.
inline ExpMomentResult exp_moment_check(const VdpParams& p, int N, std::int64_t M,
                                        std::uint64_t seed, int workers = 1) {
  p.validate();
  const double T = p.horizon;
  if (static_cast<double>(N) < std::max(6.0 * p.beta * p.beta * T, T))
    throw std::domain_error("exp_moment_check: N must satisfy N >= max{6 beta^2 T, T}");
  if (M < 2) throw std::domain_error("exp_moment_check: need at least 2 samples");

  ExpMomentResult out;
  out.c = std::exp(-T * (1.0 + 3.0 * p.beta * p.beta + p.delta + 2.0 * p.gamma));
  out.bound = std::exp((2.0 * p.beta * p.beta + 1.0) * T + p.xi.squaredNorm());

  const TimeGrid grid{T, N};
  const VectorField mu = drift_field(p);
  const Mat beta_col = noise_column(p);

  std::vector<std::vector<double>> node_values(
      static_cast<std::size_t>(N) + 1, std::vector<double>(static_cast<std::size_t>(M)));
  parallel_samples(M, workers, [&](std::int64_t i) {
    const BrownianPath path =
        sample_brownian(seed, static_cast<std::uint64_t>(i), grid, 1, "expmoment");
    const SchemeTrajectory traj = tamed_euler(mu, beta_col, p.xi, grid, path);
    for (int kk = 0; kk <= N; ++kk)
      node_values[static_cast<std::size_t>(kk)][static_cast<std::size_t>(i)] =
          std::exp(out.c * traj.states.row(kk).squaredNorm());
  });

  out.pass = true;
  for (int kk = 0; kk <= N; ++kk) {
    ExpMomentNode node;
    node.time = grid.node(kk);
    node.empirical = mean_se(node_values[static_cast<std::size_t>(kk)]);
    node.pass = node.empirical.mean <= out.bound + 3.0 * node.empirical.se;
    out.pass = out.pass && node.pass;
    out.nodes.push_back(node);
  }
  return out;
}

// ---- flow-derivative moments ----------------------------------------------

struct FlowMomentEntry {
  double r = 0.0;
  double t = 0.0;
  MeanSe x1_moment;  // E ||X1_{r,t}||_F^p
  MeanSe x2_moment;  // E ||X2_{r,t}||_F^p
};

struct FlowMomentResult {
  double p_exponent = 1.0;
  std::vector<FlowMomentEntry> entries;
  double sup_x1 = 0.0;
  double sup_x2 = 0.0;
  std::int64_t diverged = 0;
};

/// Empirical p-th moments of the first/second flow derivatives over a 5x5
/// grid of (r, t) pairs, restarting from the running flow state X_{0,r}.
/// Reported for finiteness and stability; no analytic bound is asserted.
inline FlowMomentResult flow_derivative_moments(const VectorField& mu,
                                                const DiffusionField& sigma, const Vec& xi,
                                                double horizon, double p_exponent,
                                                std::int64_t M, std::uint64_t seed,
                                                int fine_steps, int workers = 1,
                                                const std::string& tag = "flowmoment") {
  if (p_exponent < 1.0) throw std::domain_error("flow_derivative_moments: p must be >= 1");
  if (fine_steps % 25 != 0)
    throw std::domain_error("flow_derivative_moments: fine steps must be divisible by 25");
  if (M < 2) throw std::domain_error("flow_derivative_moments: need at least 2 samples");

  const TimeGrid grid{horizon, fine_steps};
  constexpr int kAnchors = 5;
  struct Pair {
    int r_idx, t_idx;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < kAnchors; ++i) {
    const int r_idx = i * fine_steps / kAnchors;
    const int span = fine_steps - r_idx;
    for (int j = 0; j < kAnchors; ++j)
      pairs.push_back({r_idx, r_idx + (j + 1) * span / kAnchors});
  }

  std::vector<std::vector<double>> x1_data(pairs.size(),
                                           std::vector<double>(static_cast<std::size_t>(M)));
  std::vector<std::vector<double>> x2_data(pairs.size(),
                                           std::vector<double>(static_cast<std::size_t>(M)));
  std::vector<char> valid(static_cast<std::size_t>(M), 0);

  parallel_samples(M, workers, [&](std::int64_t i) {
    try {
      const BrownianPath path =
          sample_brownian(seed, static_cast<std::uint64_t>(i), grid, sigma.cols, tag);
      // running flow states at the anchor nodes
      std::vector<Vec> anchors(kAnchors);
      Vec x = xi;
      int next_anchor = 0;
      const double h = grid.dt();
      for (int k = 0; k <= fine_steps; ++k) {
        if (next_anchor < kAnchors && k == next_anchor * fine_steps / kAnchors)
          anchors[static_cast<std::size_t>(next_anchor++)] = x;
        if (k == fine_steps) break;
        const double t = grid.node(k);
        x += h * mu.eval(t, x) + sigma.eval(t, x) * path.increment(k);
        if (!x.allFinite()) throw DivergedSampleError(k);
      }
      for (std::size_t q = 0; q < pairs.size(); ++q) {
        const int anchor = pairs[q].r_idx * kAnchors / fine_steps;
        const FlowResult flow = flow_solve(mu, sigma, pairs[q].r_idx,
                                           anchors[static_cast<std::size_t>(anchor)], path, true,
                                           pairs[q].t_idx);
        x1_data[q][static_cast<std::size_t>(i)] = std::pow(flow.x1.norm(), p_exponent);
        x2_data[q][static_cast<std::size_t>(i)] =
            std::pow(bilinear_frobenius_norm(flow.x2), p_exponent);
      }
      valid[static_cast<std::size_t>(i)] = 1;
    } catch (const DivergedSampleError&) {
      valid[static_cast<std::size_t>(i)] = 0;
    }
  });

  FlowMomentResult out;
  out.p_exponent = p_exponent;
  std::vector<double> buffer;
  buffer.reserve(static_cast<std::size_t>(M));
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    FlowMomentEntry e;
    e.r = grid.node(pairs[q].r_idx);
    e.t = grid.node(pairs[q].t_idx);
    buffer.clear();
    for (std::int64_t i = 0; i < M; ++i)
      if (valid[static_cast<std::size_t>(i)]) buffer.push_back(x1_data[q][static_cast<std::size_t>(i)]);
    e.x1_moment = mean_se(buffer);
    buffer.clear();
    for (std::int64_t i = 0; i < M; ++i)
      if (valid[static_cast<std::size_t>(i)]) buffer.push_back(x2_data[q][static_cast<std::size_t>(i)]);
    e.x2_moment = mean_se(buffer);
    out.sup_x1 = std::max(out.sup_x1, e.x1_moment.mean);
    out.sup_x2 = std::max(out.sup_x2, e.x2_moment.mean);
    out.entries.push_back(e);
  }
  std::int64_t kept = 0;
  for (char v : valid) kept += v;
  out.diverged = M - kept;
  return out;
}

inline FlowMomentResult flow_moment_check(const VdpParams& p, double p_exponent, std::int64_t M,
                                          std::uint64_t seed, int fine_steps = 500,
                                          int workers = 1) {
  p.validate();
  return flow_derivative_moments(drift_field(p), constant_diffusion(noise_column(p)), p.xi,
                                 p.horizon, p_exponent, M, seed, fine_steps, workers);
}

// ---- strong convergence rate ------------------------------------------------

struct RateLevel {
  int steps = 0;
  RmsSe rms;
};

struct ExperimentReport {
  std::vector<RateLevel> levels;
  double slope = 0.0;
  double intercept = 0.0;
  std::int64_t samples = 0;
  std::int64_t diverged = 0;
  std::uint64_t master_seed = 0;
  double wall_seconds = 0.0;
};

/// Coupled strong-error study: one path per sample at N_ref resolution drives
/// the reference scheme and, through block-sum coarsening, every coarse
/// scheme. Reports per-level RMS terminal error and the OLS slope of
/// log2(RMS) against log2(N).
inline ExperimentReport strong_rate_study(const VdpParams& p, const std::vector<int>& levels,
                                          int n_ref, std::int64_t M, std::uint64_t seed,
                                          int workers = 1) {
  p.validate();
  if (levels.empty()) throw std::domain_error("strong_rate_study: need at least one level");
  for (int n : levels)
    if (n < 1 || n_ref % n != 0)
      throw std::domain_error("strong_rate_study: every level must divide the reference level");
  if (M < 2) throw std::domain_error("strong_rate_study: need at least 2 samples");

  const auto t0 = std::chrono::steady_clock::now();
  const TimeGrid ref_grid{p.horizon, n_ref};
  const VectorField mu = drift_field(p);
  const Mat beta_col = noise_column(p);

  std::vector<std::vector<double>> errors(levels.size(),
                                          std::vector<double>(static_cast<std::size_t>(M)));
  std::vector<char> valid(static_cast<std::size_t>(M), 0);

  parallel_samples(M, workers, [&](std::int64_t i) {
    try {
      const BrownianPath path =
          sample_brownian(seed, static_cast<std::uint64_t>(i), ref_grid, 1, "vdp-rate");
      const Vec y_ref = tamed_euler(mu, beta_col, p.xi, ref_grid, path).terminal();
      for (std::size_t l = 0; l < levels.size(); ++l) {
        const TimeGrid grid{p.horizon, levels[l]};
        const Vec y = tamed_euler(mu, beta_col, p.xi, grid, path).terminal();
        errors[l][static_cast<std::size_t>(i)] = (y_ref - y).norm();
      }
      valid[static_cast<std::size_t>(i)] = 1;
    } catch (const DivergedSampleError&) {
      valid[static_cast<std::size_t>(i)] = 0;
    }
  });

  ExperimentReport report;
  report.master_seed = seed;
  std::vector<double> buffer;
  buffer.reserve(static_cast<std::size_t>(M));
  std::vector<double> xs, ys;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    buffer.clear();
    for (std::int64_t i = 0; i < M; ++i)
      if (valid[static_cast<std::size_t>(i)]) buffer.push_back(errors[l][static_cast<std::size_t>(i)]);
    RateLevel level;
    level.steps = levels[l];
    level.rms = rms_se(buffer);
    report.levels.push_back(level);
    if (level.rms.rms > 0.0) {
      xs.push_back(std::log2(static_cast<double>(levels[l])));
      ys.push_back(std::log2(level.rms.rms));
    }
  }
  std::int64_t kept = 0;
  for (char v : valid) kept += v;
  report.samples = kept;
  report.diverged = M - kept;
  if (xs.size() >= 2) {
    const LineFit fit = ols_fit(xs, ys);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace agflow::vdp
