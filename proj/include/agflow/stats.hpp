#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace agflow {

/// Project-wide deterministic summation: balanced binary tree splitting at the
/// midpoint. For power-of-two lengths the tree is the dyadic one, so a sum of
/// dyadic block sums is bit-identical to the sum of the underlying elements.
/// Declared once here; Brownian coarsening and Monte-Carlo aggregation both
/// use it, which is what makes results independent of worker count.
inline double pairwise_sum(const double* data, std::size_t n, std::size_t stride = 1) {
  if (n == 0) return 0.0;
  if (n == 1) return data[0];
  if (n == 2) return data[0] + data[stride];
  const std::size_t half = n / 2;
  return pairwise_sum(data, half, stride) + pairwise_sum(data + half * stride, n - half, stride);
}

inline double pairwise_sum(std::span<const double> xs) {
  return pairwise_sum(xs.data(), xs.size());
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;        // standard error of the mean
  double variance = 0.0;  // unbiased sample variance
  std::size_t n = 0;
};

inline MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  out.n = xs.size();
  if (out.n == 0) return out;
  out.mean = pairwise_sum(xs) / static_cast<double>(out.n);
  if (out.n < 2) return out;
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - out.mean;
    sq[i] = d * d;
  }
  out.variance = pairwise_sum(sq) / static_cast<double>(out.n - 1);
  out.se = std::sqrt(out.variance / static_cast<double>(out.n));
  return out;
}

/// RMS of the entries with a delta-method standard error:
/// se(rms) = se(mean of squares) / (2 rms).
struct RmsSe {
  double rms = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

inline RmsSe rms_se(std::span<const double> values) {
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = values[i] * values[i];
  const MeanSe ms = mean_se(sq);
  RmsSe out;
  out.n = ms.n;
  out.rms = std::sqrt(ms.mean);
  out.se = out.rms > 0.0 ? ms.se / (2.0 * out.rms) : 0.0;
  return out;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope*x + intercept.
inline LineFit ols_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("ols_fit: need two matched points or more");
  const double n = static_cast<double>(xs.size());
  const double mx = pairwise_sum(xs) / n;
  const double my = pairwise_sum(ys) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_fit: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

inline double sample_correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("sample_correlation: need two matched points or more");
  const double n = static_cast<double>(xs.size());
  const double mx = pairwise_sum(xs) / n;
  const double my = pairwise_sum(ys) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace agflow
