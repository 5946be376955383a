#pragma once

// Model builders shared by the test binaries.

#include <vector>

#include "treemix/model.hpp"

namespace treemix::test {

using Rows = std::vector<std::vector<double>>;

/// Same parent-major kernel on every edge.
inline MarkovTreeModel uniform_kernel_model(int n, std::vector<Edge> edges, std::vector<double> root,
                                            const Rows& rows) {
  std::vector<ParentMajorKernel> ks;
  for (const Edge& e : edges) ks.push_back({e, rows});
  const int alphabet = static_cast<int>(root.size());
  return make_model(n, alphabet, std::move(root), ks).model;
}

inline std::vector<Edge> chain_edges(int n) {
  std::vector<Edge> out;
  for (int v = 2; v <= n; ++v) out.push_back({v - 1, v});
  return out;
}

/// Full binary tree on 2^(levels) - 1 nodes in heap order.
inline std::vector<Edge> binary_edges(int n) {
  std::vector<Edge> out;
  for (int v = 2; v <= n; ++v) out.push_back({v / 2, v});
  return out;
}

/// Kernel with columns (0.9, 0.1) and (0.2, 0.8): theta = 0.7.
inline Rows kernel_07() { return {{0.9, 0.1}, {0.2, 0.8}}; }

/// Binary kernel with contraction exactly theta: child copies the parent
/// with probability theta and is a fair coin otherwise.
inline Rows copy_kernel(double theta) {
  const double stay = theta + (1.0 - theta) / 2.0;
  return {{stay, 1.0 - stay}, {1.0 - stay, stay}};
}

inline Rows constant_kernel(int a) {
  return Rows(static_cast<std::size_t>(a), std::vector<double>(static_cast<std::size_t>(a), 1.0 / a));
}

inline Rows identity_kernel(int a) {
  Rows r(static_cast<std::size_t>(a), std::vector<double>(static_cast<std::size_t>(a), 0.0));
  for (int k = 0; k < a; ++k) r[k][k] = 1.0;
  return r;
}

}  // namespace treemix::test
