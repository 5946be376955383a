#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "treemix/tree.hpp"
#include "treemix/tv.hpp"

namespace treemix {

/// Default cap on |S|^n for exhaustive enumeration.
inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// The enumeration cap in effect: TREEMIX_MAX_ENUM when set to a positive
/// integer, kDefaultEnumerationCap otherwise.
std::uint64_t enumeration_cap();

/// Transition kernel on a tree edge. matrix(x, x') = p_uv(x | x'): columns
/// are indexed by the parent state, rows by the child state.
struct Kernel {
  Edge edge;
  StochasticOperator matrix;

  double prob(int child_state, int parent_state) const {
    return matrix(static_cast<std::size_t>(child_state), static_cast<std::size_t>(parent_state));
  }
};

/// Kernel as it appears in model files: row y is the distribution of the
/// child given parent state y.
struct ParentMajorKernel {
  Edge edge;
  std::vector<std::vector<double>> rows;
};

/// Rescales a probability vector so its entries sum to 1. Vectors already
/// within a few ulps of 1 are left untouched, which makes the operation
/// idempotent. Throws DomainError when the sum is off by more than
/// kStochasticTolerance or an entry is negative.
void renormalize(std::span<double> probs);

/// Markov tree process on a canonical tree: root distribution plus one
/// kernel per edge. Immutable after construction.
class MarkovTreeModel {
 public:
  /// Kernels may be given in any order; each tree edge needs exactly one.
  MarkovTreeModel(TreeTopology tree, int alphabet, std::vector<double> root_dist,
                  std::vector<Kernel> kernels);

  const TreeTopology& tree() const { return tree_; }
  int alphabet() const { return alphabet_; }
  int size() const { return tree_.size(); }
  std::span<const double> root_dist() const { return root_dist_; }

  /// Kernel on the edge entering `child`.
  const Kernel& kernel_into(Node child) const;
  /// Throws DomainError for edges not in the tree.
  const Kernel& kernel(Edge e) const;

 private:
  TreeTopology tree_;
  int alphabet_;
  std::vector<double> root_dist_;
  std::vector<Kernel> kernels_;  // kernels_[v] enters v; index 0 and 1 unused
};

/// A model built from arbitrarily labeled input plus the relabeling applied.
struct LabeledModel {
  MarkovTreeModel model;
  std::vector<Node> to_canonical;
  std::vector<Node> from_canonical;
};

/// Canonicalizes the tree, transposes parent-major kernels to
/// column-stochastic form and renormalizes every distribution.
LabeledModel make_model(int n, int alphabet, std::vector<double> root_dist,
                        std::span<const ParentMajorKernel> kernels);

/// mu(x) = p0(x_1) prod_{(i,j) in E} p_ij(x_j | x_i).
double joint_probability(const MarkovTreeModel& m, std::span<const int> x);

/// theta_uv: max over parent-state pairs of the TV distance between the
/// corresponding kernel columns.
double contraction_coefficient(const MarkovTreeModel& m, Edge e);

/// Full joint law of a model as a dense table over S^n in lexicographic
/// order (node 1 most significant).
class JointTable {
 public:
  JointTable(int n, int alphabet, std::vector<double> probs);

  int nodes() const { return n_; }
  int alphabet() const { return alphabet_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::uint64_t x) const { return probs_[x]; }
  std::uint64_t size() const { return probs_.size(); }

  /// Marginal law of the sorted node set `keep` as a tensor.
  IndexedTensor marginal(std::span<const Node> keep) const;

 private:
  int n_;
  int alphabet_;
  std::vector<double> probs_;
};

/// Enumerates mu over S^n. Throws EnumerationCapError when |S|^n > cap.
JointTable joint_table(const MarkovTreeModel& m, std::uint64_t cap = enumeration_cap());

/// Law of X_targets given X_1..X_i = prefix, by exhaustive enumeration.
/// targets must be nonempty and contained in {i+1..n}.
IndexedTensor conditional_future_law(const MarkovTreeModel& m, std::span<const int> prefix,
                                     std::span<const Node> targets,
                                     std::uint64_t cap = enumeration_cap());

/// Same as above on a precomputed joint table.
IndexedTensor conditional_future_law(const JointTable& table, std::span<const int> prefix,
                                     std::span<const Node> targets);

/// count paths of length n, row-major.
struct SampleSet {
  int nodes = 0;
  std::size_t count = 0;
  std::vector<int> states;

  std::span<const int> path(std::size_t k) const {
    return {states.data() + k * static_cast<std::size_t>(nodes),
            static_cast<std::size_t>(nodes)};
  }
};

/// Ancestral sampling in breadth-first order. Path k draws from the
/// stream (seed, k, domain), so output is independent of `threads`.
SampleSet sample_paths(const MarkovTreeModel& m, std::uint64_t seed, std::size_t count,
                       int threads = 1, std::uint64_t domain = 0);

struct MarkovCheck {
  bool passed = true;
  double max_violation = 0.0;
};

/// Conditional independence of the child subtrees of u given X_u, checked
/// for every pair of children and every parent state of positive
/// probability. `tree` supplies the subtrees; `table` may be any joint law.
/// Throws DomainError when u has fewer than two children.
MarkovCheck markov_violation(const JointTable& table, const TreeTopology& tree, Node u,
                             double tol = 1e-12);

MarkovCheck verify_markov_property(const MarkovTreeModel& m, Node u, double tol = 1e-12,
                                   std::uint64_t cap = enumeration_cap());

}  // namespace treemix
