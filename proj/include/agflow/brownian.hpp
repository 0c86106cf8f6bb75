#pragma once

#include "agflow/grid.hpp"
#include "agflow/rng.hpp"
#include "agflow/stats.hpp"
#include "agflow/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agflow {

/// Increments of an m-dimensional Wiener process on a uniform grid.
/// One path is the single source of randomness for everything coupled to it:
/// the reference scheme, every coarsened scheme, and all restarted flows read
/// these increments (or their block sums) and nothing else.
class BrownianPath {
 public:
  BrownianPath(TimeGrid grid, int dim, std::vector<double> increments,
               std::uint64_t master_seed, std::uint64_t sample_index)
      : grid_(grid),
        dim_(dim),
        data_(std::move(increments)),
        master_seed_(master_seed),
        sample_index_(sample_index) {
    if (dim_ < 1) throw std::domain_error("BrownianPath: dimension must be >= 1");
    if (data_.size() != static_cast<std::size_t>(grid_.steps) * static_cast<std::size_t>(dim_))
      throw std::invalid_argument("BrownianPath: increment buffer size mismatch");
  }

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t sample_index() const { return sample_index_; }

  /// Increment W_{t_{k+1}} - W_{t_k}.
  Eigen::Map<const Vec> increment(int k) const {
    return Eigen::Map<const Vec>(data_.data() + static_cast<std::size_t>(k) * dim_, dim_);
  }

  /// Pairwise sum of increments [first, last) per component.
  Vec increment_sum(int first, int last) const {
    Vec out = Vec::Zero(dim_);
    if (last <= first) return out;
    for (int c = 0; c < dim_; ++c)
      out[c] = pairwise_sum(data_.data() + static_cast<std::size_t>(first) * dim_ + c,
                            static_cast<std::size_t>(last - first),
                            static_cast<std::size_t>(dim_));
    return out;
  }

  /// W at node k (W_0 = 0).
  Vec value_at(int k) const { return increment_sum(0, k); }

  /// W_T; bit-identical across dyadic coarsenings of the same path.
  Vec terminal_value() const { return increment_sum(0, grid_.steps); }

  const std::vector<double>& raw() const { return data_; }

 private:
  TimeGrid grid_;
  int dim_;
  std::vector<double> data_;  // steps x dim, row-major
  std::uint64_t master_seed_;
  std::uint64_t sample_index_;
};

/// Draw a path; deterministic in every argument, independent of host threads.
inline BrownianPath sample_brownian(std::uint64_t master_seed, std::uint64_t sample_index,
                                    const TimeGrid& grid, int dim,
                                    std::string_view tag = "brownian") {
  if (dim < 1) throw std::domain_error("sample_brownian: dimension must be >= 1");
  RandomStream rs(master_seed, tag, sample_index);
  const double sd = std::sqrt(grid.dt());
  std::vector<double> incr(static_cast<std::size_t>(grid.steps) * static_cast<std::size_t>(dim));
  for (double& v : incr) v = sd * rs.next_gaussian();
  return BrownianPath(grid, dim, std::move(incr), master_seed, sample_index);
}

/// Block-sum coarsening: coarse increment j is the pairwise sum of fine
/// increments [j*factor, (j+1)*factor). Coupling device for every
/// multi-resolution experiment.
inline BrownianPath coarsen(const BrownianPath& path, int factor) {
  if (factor < 1 || path.grid().steps % factor != 0)
    throw std::domain_error("coarsen: factor must divide the number of steps");
  const int coarse_steps = path.grid().steps / factor;
  const int m = path.dim();
  std::vector<double> incr(static_cast<std::size_t>(coarse_steps) * static_cast<std::size_t>(m));
  for (int j = 0; j < coarse_steps; ++j) {
    const Vec block = path.increment_sum(j * factor, (j + 1) * factor);
    for (int c = 0; c < m; ++c) incr[static_cast<std::size_t>(j) * m + c] = block[c];
  }
  return BrownianPath(TimeGrid{path.grid().horizon, coarse_steps}, m, std::move(incr),
                      path.master_seed(), path.sample_index());
}

}  // namespace agflow
