#include "treemix/tree.hpp"

#include <algorithm>
#include <string>

#include "treemix/error.hpp"

namespace treemix {

CanonicalTree TreeTopology::build(int n, std::span<const Edge> edges) {
  if (n < 1) throw TreeError("tree must have at least one node");

  std::vector<Node> in_parent(n + 1, 0);
  std::vector<std::vector<Node>> in_children(n + 1);
  for (const Edge& e : edges) {
    if (e.parent < 1 || e.parent > n || e.child < 1 || e.child > n) {
      throw TreeError("edge (" + std::to_string(e.parent) + "," +
                      std::to_string(e.child) + ") references a label outside 1.." +
                      std::to_string(n));
    }
    if (e.parent == e.child) {
      throw TreeError("cycle detected: self-loop at node " + std::to_string(e.child));
    }
    if (in_parent[e.child] != 0) {
      throw TreeError("node " + std::to_string(e.child) + " has two parents");
    }
    in_parent[e.child] = e.parent;
    in_children[e.parent].push_back(e.child);
  }

  std::vector<Node> roots;
  for (Node v = 1; v <= n; ++v) {
    if (in_parent[v] == 0) roots.push_back(v);
  }
  if (roots.empty()) throw TreeError("cycle detected: every node has a parent");

  // Label-ordered children; the level sweep then yields the
  // (parent canonical number, input label) ordering directly.
  for (auto& c : in_children) std::sort(c.begin(), c.end());

  std::vector<Node> order;  // input labels in canonical order
  order.reserve(n);
  std::vector<int> in_depth(n + 1, -1);
  order.push_back(roots.front());
  in_depth[roots.front()] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const Node u = order[head];
    for (Node c : in_children[u]) {
      in_depth[c] = in_depth[u] + 1;
      order.push_back(c);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    if (roots.size() > 1) {
      throw TreeError("graph is disconnected: " + std::to_string(roots.size()) +
                      " nodes have no parent");
    }
    throw TreeError("cycle detected: nodes unreachable from root " +
                    std::to_string(roots.front()));
  }

  CanonicalTree out;
  out.to_canonical.assign(n, 0);
  out.from_canonical.assign(n, 0);
  for (int k = 0; k < n; ++k) {
    out.to_canonical[order[k] - 1] = k + 1;
    out.from_canonical[k] = order[k];
  }

  TreeTopology& t = out.tree;
  t.parent_.assign(n + 1, 0);
  t.children_.assign(n + 1, {});
  t.depth_.assign(n + 1, 0);
  for (int k = 0; k < n; ++k) {
    const Node label = order[k];
    const Node v = k + 1;
    t.depth_[v] = in_depth[label];
    if (in_parent[label] != 0) {
      const Node p = out.to_canonical[in_parent[label] - 1];
      t.parent_[v] = p;
      t.children_[p].push_back(v);
    }
  }
  const int max_depth = *std::max_element(t.depth_.begin() + 1, t.depth_.end());
  t.levels_.assign(max_depth + 1, {});
  for (Node v = 1; v <= n; ++v) t.levels_[t.depth_[v]].push_back(v);
  t.width_ = 1;
  for (int d = 1; d <= max_depth; ++d) {
    t.width_ = std::max(t.width_, static_cast<int>(t.levels_[d].size()));
  }

  // Preorder intervals for O(1) ancestor tests.
  t.enter_.assign(n + 1, 0);
  t.leave_.assign(n + 1, 0);
  int clock = 0;
  std::vector<std::pair<Node, std::size_t>> stack{{1, 0}};
  t.enter_[1] = clock++;
  while (!stack.empty()) {
    auto& [u, next] = stack.back();
    if (next < t.children_[u].size()) {
      const Node c = t.children_[u][next++];
      t.enter_[c] = clock++;
      stack.emplace_back(c, 0);
    } else {
      t.leave_[u] = clock;
      stack.pop_back();
    }
  }
  return out;
}

void TreeTopology::check_node(Node v) const {
  if (v < 1 || v > size()) {
    throw DomainError("node " + std::to_string(v) + " out of range 1.." +
                      std::to_string(size()));
  }
}

void TreeTopology::check_pair(Node i, Node j) const {
  check_node(i);
  check_node(j);
  if (!(i < j)) {
    throw DomainError("index order violated: need i < j, got i=" + std::to_string(i) +
                      ", j=" + std::to_string(j));
  }
}

std::optional<Node> TreeTopology::parent(Node v) const {
  check_node(v);
  if (parent_[v] == 0) return std::nullopt;
  return parent_[v];
}

const std::vector<Node>& TreeTopology::children(Node v) const {
  check_node(v);
  return children_[v];
}

int TreeTopology::depth(Node v) const {
  check_node(v);
  return depth_[v];
}

const std::vector<Node>& TreeTopology::level(int d) const {
  if (d < 0 || d > depth()) {
    throw DomainError("level " + std::to_string(d) + " out of range");
  }
  return levels_[d];
}

std::vector<Edge> TreeTopology::edges() const {
  std::vector<Edge> out;
  out.reserve(size() > 0 ? size() - 1 : 0);
  for (Node v = 2; v <= size(); ++v) out.push_back({parent_[v], v});
  return out;
}

bool TreeTopology::has_edge(Edge e) const {
  return e.child >= 2 && e.child <= size() && parent_[e.child] == e.parent;
}

bool TreeTopology::precedes_or_equal(Node u, Node v) const {
  check_node(u);
  check_node(v);
  return enter_[u] <= enter_[v] && enter_[v] < leave_[u];
}

std::vector<Node> TreeTopology::subtree(Node u) const {
  check_node(u);
  std::vector<Node> out;
  for (Node v = u; v <= size(); ++v) {
    if (enter_[u] <= enter_[v] && enter_[v] < leave_[u]) out.push_back(v);
  }
  return out;
}

std::optional<Node> TreeTopology::first_descendant_at_or_after(Node i, Node j) const {
  check_pair(i, j);
  for (Node v = j; v <= size(); ++v) {
    if (enter_[i] <= enter_[v] && enter_[v] < leave_[i]) return v;
  }
  return std::nullopt;
}

CutSets TreeTopology::cut_sets(Node i, Node j) const {
  CutSets cs;
  cs.j0 = first_descendant_at_or_after(i, j);
  if (!cs.j0) return cs;
  const Node j0 = *cs.j0;
  const int top = depth_[j0];
  for (Node v : subtree(i)) {
    if (v > i && v < j0) cs.Z.push_back(v);
    if (v >= j0 && parent_[v] < j0) cs.C.push_back(v);
  }
  for (Node v : cs.C) (depth_[v] == top ? cs.C0 : cs.C1).push_back(v);
  for (Node v : subtree(i)) {
    if (depth_[v] == top && !std::binary_search(cs.C0.begin(), cs.C0.end(), v)) {
      cs.Z0.push_back(v);
    }
  }
  return cs;
}

bool floor_ratio_dominates(long k, long L) {
  if (L < 1 || k < L) throw DomainError("floor ratio bound needs k >= L >= 1");
  return (k / L) * (2 * L - 1) >= k;
}

}  // namespace treemix
