#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace treemix {

/// Node label. Canonical trees use 1..n with breadth-first numbering.
using Node = int;

struct Edge {
  Node parent = 0;
  Node child = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Sets used to factor the mixing coefficient of (i, j) through the
/// subtree of i. All sets are sorted ascending.
struct CutSets {
  std::optional<Node> j0;
  std::vector<Node> Z;
  std::vector<Node> C;
  std::vector<Node> C0;
  std::vector<Node> C1;
  std::vector<Node> Z0;
};

class TreeTopology;

/// Result of canonicalizing an arbitrarily labeled tree.
struct CanonicalTree;

/// Rooted directed tree with breadth-first numbering 1..n. The root is
/// always node 1 and dep(u) < dep(v) implies u < v. Immutable once built.
class TreeTopology {
 public:
  /// Empty placeholder; use build() for a real tree.
  TreeTopology() = default;

  /// Builds the canonical breadth-first relabeling of a tree given as
  /// (parent, child) pairs over labels 1..n. Within a level nodes are
  /// ordered by (canonical number of parent, input label).
  /// Throws TreeError on cycles, multiple parents, disconnection, or n < 1.
  static CanonicalTree build(int n, std::span<const Edge> edges);

  int size() const { return static_cast<int>(parent_.size()) - 1; }
  Node root() const { return 1; }

  /// Parent of v, or nullopt for the root.
  std::optional<Node> parent(Node v) const;
  const std::vector<Node>& children(Node v) const;
  int depth(Node v) const;

  /// dep(T): maximum node depth.
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  const std::vector<std::vector<Node>>& levels() const { return levels_; }
  const std::vector<Node>& level(int d) const;

  /// Greatest level cardinality over depths d >= 1; a single-node tree
  /// has width 1.
  int width() const { return width_; }

  /// Edges sorted by child.
  std::vector<Edge> edges() const;
  bool has_edge(Edge e) const;

  /// True when u is an ancestor of v or u == v.
  bool precedes_or_equal(Node u, Node v) const;

  /// V_u: all v with u an ancestor-or-self of v, sorted ascending.
  std::vector<Node> subtree(Node u) const;

  /// min(T_i ∩ {j..n}), or nullopt when that set is empty.
  /// Requires 1 <= i < j <= n.
  std::optional<Node> first_descendant_at_or_after(Node i, Node j) const;

  CutSets cut_sets(Node i, Node j) const;

  void check_node(Node v) const;
  void check_pair(Node i, Node j) const;

 private:
  std::vector<Node> parent_;  // parent_[v], 0 for root; index 0 unused
  std::vector<std::vector<Node>> children_;
  std::vector<int> depth_;
  std::vector<std::vector<Node>> levels_;
  std::vector<int> enter_;  // preorder interval for ancestor queries
  std::vector<int> leave_;
  int width_ = 1;
};

struct CanonicalTree {
  TreeTopology tree;
  /// to_canonical[label - 1] is the canonical number of input label.
  std::vector<Node> to_canonical;
  /// from_canonical[v - 1] is the input label of canonical node v.
  std::vector<Node> from_canonical;
};

/// floor(k / L) >= k / (2L - 1) for k >= L >= 1, evaluated in integer
/// arithmetic.
bool floor_ratio_dominates(long k, long L);

}  // namespace treemix
