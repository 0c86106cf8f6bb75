#include "agflow/flow.hpp"

#include "agflow/brownian.hpp"
#include "agflow/fields.hpp"
#include "agflow/stats.hpp"
#include "agflow/vdp.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace agflow;

namespace {
constexpr std::uint64_t kSeed = 0x5eed0002u;

BrownianPath zero_path(const TimeGrid& grid, int m) {
  return BrownianPath(grid, m,
                      std::vector<double>(static_cast<std::size_t>(grid.steps) * m, 0.0), 0, 0);
}
}  // namespace

TEST_CASE("linear ODE flow reproduces the exponential with derivatives", "[flow]") {
  const TimeGrid grid = make_grid(1.0, 1 << 14);
  const VectorField mu = linear_field(1.0, 1);
  const DiffusionField sigma = zero_diffusion(1, 1);
  const FlowResult r = flow_solve(mu, sigma, 0, Vec::Constant(1, 1.0), zero_path(grid, 1), true);
  CHECK(r.x[0] == Catch::Approx(std::exp(1.0)).epsilon(1e-4));
  CHECK(r.x1(0, 0) == Catch::Approx(std::exp(1.0)).epsilon(1e-4));
  CHECK(r.x2[0](0, 0) == 0.0);
}

TEST_CASE("flow started at the terminal node is the identity", "[flow]") {
  const TimeGrid grid = make_grid(1.0, 16);
  const BrownianPath path = sample_brownian(kSeed, 0, grid, 1);
  const vdp::VdpParams p;
  const FlowResult r = flow_solve(vdp::drift_field(p), constant_diffusion(vdp::noise_column(p)),
                                  grid.steps, p.xi, path, true);
  CHECK(r.x == p.xi);
  CHECK(r.x1 == Mat::Identity(2, 2));
  CHECK(r.x2[0].isZero(0.0));
  CHECK(r.x2[1].isZero(0.0));
}

TEST_CASE("first variational process matches same-path finite differences", "[flow]") {
  const vdp::VdpParams p;
  const TimeGrid grid = make_grid(1.0, 1 << 10);
  const BrownianPath path = sample_brownian(kSeed, 5, grid, 1);
  const VectorField mu = vdp::drift_field(p);
  const DiffusionField sigma = constant_diffusion(vdp::noise_column(p));
  Vec x0(2);
  x0 << 1.0, 0.5;

  const FlowResult base = flow_solve(mu, sigma, 0, x0, path, true);
  const double eps = 1e-5;
  for (int j = 0; j < 2; ++j) {
    Vec xp = x0, xm = x0;
    xp[j] += eps;
    xm[j] -= eps;
    const Vec col = (flow_solve(mu, sigma, 0, xp, path, false).x -
                     flow_solve(mu, sigma, 0, xm, path, false).x) /
                    (2.0 * eps);
    const double rel = (base.x1.col(j) - col).norm() / base.x1.col(j).norm();
    CHECK(rel <= 1e-3);
  }
}

TEST_CASE("second variational process vanishes exactly for linear drift", "[flow]") {
  const TimeGrid grid = make_grid(1.0, 256);
  const BrownianPath path = sample_brownian(kSeed, 9, grid, 1);
  Mat b(2, 1);
  b << 0.3, -0.2;
  Vec x0(2);
  x0 << 0.4, -1.0;
  const FlowResult r =
      flow_solve(linear_field(-0.7, 2), constant_diffusion(b), 0, x0, path, true);
  CHECK(r.x2[0].isZero(0.0));
  CHECK(r.x2[1].isZero(0.0));
}

TEST_CASE("flow semigroup property is exact at node resolution", "[flow]") {
  const vdp::VdpParams p;
  const TimeGrid grid = make_grid(1.0, 128);
  const BrownianPath path = sample_brownian(kSeed, 2, grid, 1);
  const VectorField mu = vdp::drift_field(p);
  const DiffusionField sigma = constant_diffusion(vdp::noise_column(p));

  const int mid = 48;
  const FlowResult full = flow_solve(mu, sigma, 0, p.xi, path, false);
  const FlowResult first = flow_solve(mu, sigma, 0, p.xi, path, false, mid);
  const FlowResult rest = flow_solve(mu, sigma, mid, first.x, path, false);
  CHECK(rest.x == full.x);
}

TEST_CASE("fine integrator converges at strong order one for additive noise", "[flow]") {
  const vdp::VdpParams p;
  const VectorField mu = vdp::drift_field(p);
  const DiffusionField sigma = constant_diffusion(vdp::noise_column(p));
  const int n_fine = 1 << 10;
  const TimeGrid fine = make_grid(1.0, n_fine);

  std::vector<double> err_n, err_2n;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const BrownianPath path = sample_brownian(kSeed, i, fine, 1, "order");
    const Vec ref = flow_solve(mu, sigma, 0, p.xi, path, false).x;
    const Vec at_n = flow_solve(mu, sigma, 0, p.xi, coarsen(path, 4), false).x;
    const Vec at_2n = flow_solve(mu, sigma, 0, p.xi, coarsen(path, 2), false).x;
    err_n.push_back((at_n - ref).norm());
    err_2n.push_back((at_2n - ref).norm());
  }
  const double ratio = mean_se(err_n).mean / mean_se(err_2n).mean;
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 2.8);
}

TEST_CASE("taming indicator suppresses the drift beyond the threshold", "[flow]") {
  const vdp::VdpParams p;
  const VectorField mu = vdp::drift_field(p);
  const Mat beta = vdp::noise_column(p);
  const TimeGrid grid = make_grid(1.0, 4);  // threshold N/T = 4
  const BrownianPath path = sample_brownian(kSeed, 3, grid, 1);
  Vec xi(2);
  xi << 3.0, 3.0;  // ||mu(xi)||^2 = 738 >= 4
  REQUIRE(vdp::drift(xi, p).squaredNorm() >= 4.0);

  const SchemeTrajectory traj = tamed_euler(mu, beta, xi, grid, path);
  CHECK(traj.drift_applied[0] == 0);
  const Vec expected = xi + beta * path.increment(0);
  CHECK(traj.state(1) == expected);
}

TEST_CASE("pure-noise scheme accumulates exactly the driving increments", "[flow]") {
  const TimeGrid grid = make_grid(1.0, 32);
  const BrownianPath path = sample_brownian(kSeed, 4, grid, 1);
  Mat beta(2, 1);
  beta << 0.0, 1.7;
  Vec xi(2);
  xi << 0.25, -0.5;
  const SchemeTrajectory traj = tamed_euler(linear_field(0.0, 2), beta, xi, grid, path);
  const Vec expected = xi + beta * path.terminal_value();
  CHECK((traj.terminal() - expected).norm() <= 1e-13);
}

TEST_CASE("inactive taming reproduces the plain Euler recursion", "[flow]") {
  const vdp::VdpParams p;
  const VectorField mu = vdp::drift_field(p);
  const Mat beta = vdp::noise_column(p);
  const TimeGrid grid = make_grid(1.0, 512);
  const BrownianPath path = sample_brownian(kSeed, 6, grid, 1);

  const SchemeTrajectory traj = tamed_euler(mu, beta, p.xi, grid, path);
  for (char c : traj.drift_applied) REQUIRE(c == 1);

  Vec y = p.xi;
  const double h = grid.dt();
  for (int k = 0; k < grid.steps; ++k) {
    y += h * mu.eval(grid.node(k), y);
    y += beta * path.increment(k);
  }
  CHECK(traj.terminal() == y);
}

TEST_CASE("taming fraction decays as the grid refines", "[flow]") {
  const vdp::VdpParams p;
  const VectorField mu = vdp::drift_field(p);
  const Mat beta = vdp::noise_column(p);
  Vec xi(2);
  xi << 2.0, 2.0;

  double prev = 1.0;
  std::vector<double> fractions;
  for (int n : {16, 128, 1024}) {
    const TimeGrid fine = make_grid(1.0, 1024);
    double frac = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const BrownianPath path = sample_brownian(kSeed, i, fine, 1, "taming");
      frac += tamed_euler(mu, beta, xi, TimeGrid{1.0, n}, path).taming_fraction();
    }
    frac /= 200.0;
    CHECK(frac <= prev + 1e-12);
    prev = frac;
    fractions.push_back(frac);
  }
  CHECK(fractions.back() == 0.0);
}

TEST_CASE("scheme driven by the fine path equals scheme on the coarsened path", "[flow]") {
  const vdp::VdpParams p;
  const TimeGrid fine = make_grid(1.0, 256);
  const BrownianPath path = sample_brownian(kSeed, 8, fine, 1);
  const TimeGrid coarse{1.0, 32};
  const SchemeTrajectory via_fine =
      tamed_euler(vdp::drift_field(p), vdp::noise_column(p), p.xi, coarse, path);
  const SchemeTrajectory via_coarse =
      tamed_euler(vdp::drift_field(p), vdp::noise_column(p), p.xi, coarse, coarsen(path, 8));
  CHECK(via_fine.states == via_coarse.states);
}

TEST_CASE("intra-step interpolant matches the stored nodes and moves with the noise", "[flow]") {
  const vdp::VdpParams p;
  const VectorField mu = vdp::drift_field(p);
  const Mat beta = vdp::noise_column(p);
  const TimeGrid fine = make_grid(1.0, 64);
  const BrownianPath path = sample_brownian(kSeed, 10, fine, 1);
  const TimeGrid coarse{1.0, 8};
  const SchemeTrajectory traj = tamed_euler(mu, beta, p.xi, coarse, path);

  for (int k = 0; k <= 8; ++k) {
    const Vec at_node = tamed_state_at(mu, beta, traj, path, 8 * k);
    CHECK((at_node - traj.state(k)).norm() == 0.0);
  }
  // mid-step value = left node + drift*eps + actual Brownian increment
  const int fine_idx = 8 * 3 + 4;
  const Vec y = tamed_state_at(mu, beta, traj, path, fine_idx);
  Vec expected = traj.state(3);
  if (traj.drift_applied[3])
    expected += (fine.node(fine_idx) - coarse.node(3)) * mu.eval(coarse.node(3), traj.state(3));
  expected += beta * path.increment_sum(24, fine_idx);
  CHECK(y == expected);
}

TEST_CASE("reference solution equals the scheme at the same resolution", "[flow]") {
  const vdp::VdpParams p;
  const TimeGrid grid = make_grid(1.0, 64);
  const BrownianPath path = sample_brownian(kSeed, 12, grid, 1);
  const Vec ref =
      reference_solution(vdp::drift_field(p), constant_diffusion(vdp::noise_column(p)), p.xi, path);
  const Vec scheme =
      tamed_euler(vdp::drift_field(p), vdp::noise_column(p), p.xi, grid, path).terminal();
  CHECK(ref == scheme);
}

TEST_CASE("reference solution tracks the Ornstein-Uhlenbeck closed form at order h", "[flow]") {
  const double a = -0.5, s = 0.3, T = 1.0;
  const VectorField mu = linear_field(a, 1);
  const DiffusionField sigma = constant_diffusion(Mat::Constant(1, 1, s));
  const Vec xi = Vec::Constant(1, 1.0);

  auto closed_form = [&](const BrownianPath& path) {
    // e^{aT} xi + s * sum e^{a(T - t_k)} dW_k (left-point discretization)
    double acc = std::exp(a * T) * xi[0];
    for (int k = 0; k < path.grid().steps; ++k)
      acc += s * std::exp(a * (T - path.grid().node(k))) * path.increment(k)[0];
    return acc;
  };

  std::vector<double> err_n, err_2n;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const BrownianPath path = sample_brownian(kSeed, i, make_grid(T, 1 << 11), 1, "ou");
    const BrownianPath half = coarsen(path, 2);
    err_2n.push_back(std::abs(reference_solution(mu, sigma, xi, path)[0] - closed_form(path)));
    err_n.push_back(std::abs(reference_solution(mu, sigma, xi, half)[0] - closed_form(half)));
  }
  const double mean_n = mean_se(err_n).mean;
  const double mean_2n = mean_se(err_2n).mean;
  CHECK(mean_n <= 5e-3);
  const double ratio = mean_n / mean_2n;
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 2.7);
}

TEST_CASE("driftless reference is the initial value plus scaled noise", "[flow]") {
  const TimeGrid grid = make_grid(1.0, 128);
  const BrownianPath path = sample_brownian(kSeed, 14, grid, 1);
  Mat col(2, 1);
  col << 0.0, 2.0;
  Vec xi(2);
  xi << 1.0, -1.0;
  const Vec ref = reference_solution(linear_field(0.0, 2), constant_diffusion(col), xi, path);
  CHECK((ref - (xi + col * path.terminal_value())).norm() <= 1e-13);
}

TEST_CASE("divergence raises an error carrying the step index", "[flow]") {
  const TimeGrid grid = make_grid(1.0, 16);
  const VectorField mu = scalar_cubic_field(1.0, 0.0);
  try {
    flow_solve(mu, zero_diffusion(1, 1), 0, Vec::Constant(1, 50.0), zero_path(grid, 1), false);
    FAIL("expected divergence");
  } catch (const DivergedSampleError& e) {
    CHECK(e.step_index >= 0);
    CHECK(e.step_index < 16);
  }
}

TEST_CASE("derivative request rejects multiplicative diffusion", "[flow]") {
  DiffusionField mult;
  mult.rows = 1;
  mult.cols = 1;
  mult.is_additive = false;
  mult.eval = [](double, const Vec& x) { return Mat::Constant(1, 1, x[0]); };
  const TimeGrid grid = make_grid(1.0, 4);
  const BrownianPath path = sample_brownian(kSeed, 15, grid, 1);
  CHECK_THROWS_AS(flow_solve(linear_field(0.5, 1), mult, 0, Vec::Ones(1), path, true),
                  std::invalid_argument);
  CHECK_NOTHROW(flow_solve(linear_field(0.5, 1), mult, 0, Vec::Ones(1), path, false));
}
