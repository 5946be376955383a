#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "treemix/model.hpp"

namespace treemix {

/// Where the entries of a mixing matrix come from.
enum class Source { exact, level_bound, uniform_bound };

std::string_view to_string(Source s);
/// Accepts "exact", "level", "level-bound", "uniform", "uniform-bound".
std::optional<Source> parse_source(std::string_view text);

/// Exact eta_ij(y, w, w') and eta-bar_ij by enumeration of the joint law.
///
/// eta_ij(y, w, w') is the TV distance between the laws of X_j..X_n given
/// X_1..X_{i-1} = y with X_i = w versus X_i = w'. eta-bar takes the sup
/// over prefixes y and state pairs for which both conditioning events have
/// positive probability.
class ExactMixing {
 public:
  explicit ExactMixing(const MarkovTreeModel& m, std::uint64_t cap = enumeration_cap());

  const JointTable& table() const { return table_; }

  /// prefix holds the states of nodes 1..i-1. Throws ZeroProbabilityError
  /// when either conditioning event is null.
  double eta(Node i, Node j, std::span<const int> prefix, int w, int w2) const;

  /// eta_ij(y, w, w') for every prefix y and state pair, at flat index
  /// (y |S| + w) |S| + w'. NaN where either conditioning event is null.
  std::vector<double> eta_all(Node i, Node j) const;

  double eta_bar(Node i, Node j) const;

 private:
  // Marginal over nodes {1..i} ∪ {j..n}, prefix digits most significant.
  IndexedTensor prefix_suffix_marginal(Node i, Node j) const;

  TreeTopology tree_;
  JointTable table_;
};

double eta_exact(const MarkovTreeModel& m, Node i, Node j, std::span<const int> prefix, int w,
                 int w2, std::uint64_t cap = enumeration_cap());

double eta_bar_exact(const MarkovTreeModel& m, Node i, Node j,
                     std::uint64_t cap = enumeration_cap());

/// eta_ij depends only on the subtree of i: it equals eta_{i j0} when
/// j0 = min(T_i ∩ {j..n}) exists and vanishes otherwise.
struct J0Reduction {
  std::optional<Node> j0;
  bool vanishes() const { return !j0.has_value(); }
};
J0Reduction reduce_via_j0(const MarkovTreeModel& m, Node i, Node j);

/// Largest contraction coefficient over all edges (0 for a single node).
double max_contraction(const MarkovTreeModel& m);

/// alpha{theta_uv : (u,v) in T_i, dep(v) = d} for d = dep(i)+1 .. dep(j0).
/// Empty when j0 does not exist.
std::vector<double> level_alpha_factors(const MarkovTreeModel& m, Node i, Node j);

/// Product of level_alpha_factors; 0 when j0 does not exist.
double eta_bar_bound_levels(const MarkovTreeModel& m, Node i, Node j);

/// 1 - (1 - theta)^L, computed so that L = 1 returns theta bit-exactly.
double width_contraction(double theta, int L);

/// (1 - (1 - theta)^L)^floor((j - i) / L). Requires 0 <= theta < 1, L >= 1, i < j.
double eta_bar_bound_uniform(double theta, int L, Node i, Node j);

/// theta-tilde = (1 - (1 - theta)^L)^(1 / (2L - 1)); eta-bar_ij <= theta-tilde^(j-i)
/// once j >= i + L. Requires 0 <= theta < 1 and L >= 1.
double geometric_rate(double theta, int L);

/// Bound for trees whose levels grow at most linearly, |lev(d)| <= c d.
struct LinearGrowthBound {
  enum class Branch { vanishing, product, closed_form };

  Branch branch = Branch::vanishing;
  /// min(1, prod_{k=1}^h sum_{(u,v) in E_k} theta_uv), h = dep(j0) - dep(i).
  double product_bound = 0.0;
  /// max_k c (dep(i) + k) theta_k, where theta_k is the largest theta on E_k.
  double beta = 0.0;
  /// sqrt(2 (j - i) / c) - dep(i) - 1.
  double exponent = 0.0;
  /// min(1, beta^max(exponent, 0)); present only when the level-growth
  /// premise holds and beta < 1.
  std::optional<double> closed_form;
  bool premise_holds = true;
  bool beta_below_one = true;
  /// exponent <= 0, so the closed form carries no information.
  bool vacuous = false;
  /// Smallest valid bound among the branches computed.
  double bound = 0.0;
};
LinearGrowthBound eta_bar_bound_linear_growth(const MarkovTreeModel& m, Node i, Node j, double c);

/// Intermediate quantities of the level-by-level factorization
/// eta_ij(y, w, w') = ||B f||, f = A^(d_|D|) ... A^(d_2) h, h = A^(d_1)[., w] - A^(d_1)[., w'].
/// Used to cross-check eta_bar_bound_levels against its own derivation.
struct TensorChainTrace {
  Node j0 = 0;
  CutSets cuts;
  double h_norm = 0.0;
  /// ||A^(d_k)|| for k = 1..|D|.
  std::vector<double> level_norms;
  /// alpha{||A^(u,v)|| : (u,v) in E_{d_k}} for k = 1..|D|.
  std::vector<double> level_alphas;
  double f_norm = 0.0;
  double B_norm = 0.0;
  double Bf_norm = 0.0;
};
std::optional<TensorChainTrace> tensor_chain_trace(const MarkovTreeModel& m, Node i, Node j,
                                                   int w, int w2);

/// Every eta-bar figure available for one pair (i, j).
struct EtaReport {
  Node i = 0;
  Node j = 0;
  std::optional<double> exact;
  double level_bound = 0.0;
  double uniform_bound = 1.0;
  std::optional<double> geometric_bound;
  std::optional<Node> j0;
};

/// `exact` may be null to skip enumeration.
EtaReport eta_report(const MarkovTreeModel& m, Node i, Node j, const ExactMixing* exact);

/// Uniform bound for a model: theta = max theta_uv, L = wid(T). A model
/// with theta = 1 only admits the trivial bound 1.
double model_uniform_bound(const MarkovTreeModel& m, Node i, Node j);

}  // namespace treemix
