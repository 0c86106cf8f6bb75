#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace agflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A bilinear map (R^d)^2 -> R^n stored component-major: one d x d matrix per
// output component, so apply(v, w)[i] = v^T * comps[i] * w.
using Bilinear = std::vector<Mat>;

inline Vec apply_bilinear(const Bilinear& comps, const Vec& v, const Vec& w) {
  Vec out(static_cast<Eigen::Index>(comps.size()));
  for (std::size_t i = 0; i < comps.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v.dot(comps[i] * w);
  return out;
}

inline Bilinear zero_bilinear(int out_dim, int in_dim) {
  return Bilinear(static_cast<std::size_t>(out_dim), Mat::Zero(in_dim, in_dim));
}

inline double bilinear_frobenius_norm(const Bilinear& comps) {
  double s = 0.0;
  for (const Mat& m : comps) s += m.squaredNorm();
  return std::sqrt(s);
}

}  // namespace agflow
