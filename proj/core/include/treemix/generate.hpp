#pragma once

#include <cstdint>

#include "treemix/model.hpp"
#include "treemix/rng.hpp"

namespace treemix {

/// Parameters of the random model generator.
struct GenOptions {
  int alphabet = 2;
  /// Number of levels below the root.
  int depth = 3;
  /// Maximum nodes per level; each level draws its size from 1..width.
  int width = 2;
  /// Every kernel has contraction coefficient at most theta_max.
  double theta_max = 0.9;
  /// Total node cap (0 = no cap). Levels are truncated once reached.
  int max_nodes = 0;
  /// Probability that a kernel column is made sparse (one state gets no
  /// mass). Sparse columns raise theta above theta_max for that edge.
  double zero_fraction = 0.0;
};

/// Random probability vector, uniform on the simplex.
std::vector<double> random_distribution(int size, Stream& rng);

/// Random kernel with contraction coefficient at most theta_max, given
/// column-stochastic (child-state rows, parent-state columns).
std::vector<double> random_kernel(int alphabet, double theta_max, Stream& rng,
                                  double zero_fraction = 0.0);

/// Random tree by levels, shuffled input labels, then canonicalized.
MarkovTreeModel generate_model(const GenOptions& opts, Stream& rng);

/// Chain 1 -> 2 -> ... -> n with random kernels.
MarkovTreeModel generate_chain(int n, int alphabet, double theta_max, Stream& rng);

/// Builds a model on an existing canonical tree with random kernels.
MarkovTreeModel random_model_on(const TreeTopology& tree, int alphabet, double theta_max,
                                Stream& rng, double zero_fraction = 0.0);

}  // namespace treemix
