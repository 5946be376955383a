#include "treemix/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "treemix/error.hpp"

namespace treemix {

std::vector<double> random_distribution(int size, Stream& rng) {
  std::vector<double> p(static_cast<std::size_t>(size));
  double s = 0.0;
  for (double& v : p) {
    v = -std::log1p(-rng.uniform());  // Exp(1) draws give a flat Dirichlet.
    s += v;
  }
  if (!(s > 0.0)) {
    std::fill(p.begin(), p.end(), 1.0 / size);
    return p;
  }
  for (double& v : p) v /= s;
  return p;
}

std::vector<double> random_kernel(int alphabet, double theta_max, Stream& rng,
                                  double zero_fraction) {
  if (!(theta_max >= 0.0 && theta_max <= 1.0)) throw DomainError("theta_max must lie in [0,1]");
  const auto a = static_cast<std::size_t>(alphabet);
  // Column y = (1 - s) pi + s q_y, so any two columns differ by s (q_y - q_y')
  // and the contraction coefficient is at most s <= theta_max.
  const double s = theta_max * rng.uniform();
  const auto pi = random_distribution(alphabet, rng);
  std::vector<double> k(a * a);
  for (std::size_t y = 0; y < a; ++y) {
    auto q = random_distribution(alphabet, rng);
    std::vector<double> col(a);
    for (std::size_t x = 0; x < a; ++x) col[x] = (1.0 - s) * pi[x] + s * q[x];
    if (zero_fraction > 0.0 && alphabet > 1 && rng.uniform() < zero_fraction) {
      col[rng.below(a)] = 0.0;
    }
    double sum = std::accumulate(col.begin(), col.end(), 0.0);
    for (std::size_t x = 0; x < a; ++x) k[x * a + y] = col[x] / sum;
  }
  return k;
}

MarkovTreeModel random_model_on(const TreeTopology& tree, int alphabet, double theta_max,
                                Stream& rng, double zero_fraction) {
  auto root = random_distribution(alphabet, rng);
  if (zero_fraction > 0.0 && alphabet > 1 && rng.uniform() < zero_fraction) {
    root[rng.below(static_cast<std::uint64_t>(alphabet))] = 0.0;
    const double s = std::accumulate(root.begin(), root.end(), 0.0);
    for (double& v : root) v /= s;
  }
  std::vector<Kernel> kernels;
  for (const Edge& e : tree.edges()) {
    kernels.push_back({e, StochasticOperator::square(e.parent, e.child, alphabet,
                                                     random_kernel(alphabet, theta_max, rng,
                                                                   zero_fraction))});
  }
  return MarkovTreeModel(tree, alphabet, std::move(root), std::move(kernels));
}

MarkovTreeModel generate_model(const GenOptions& opts, Stream& rng) {
  if (opts.alphabet < 1) throw DomainError("alphabet size must be positive");
  if (opts.depth < 0) throw DomainError("depth must be non-negative");
  if (opts.width < 1) throw DomainError("width must be positive");

  std::vector<Edge> edges;
  std::vector<Node> previous{1};
  int next = 2;
  for (int d = 1; d <= opts.depth; ++d) {
    if (opts.max_nodes > 0 && next > opts.max_nodes) break;
    auto size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(opts.width)));
    if (opts.max_nodes > 0) size = std::min(size, opts.max_nodes - next + 1);
    std::vector<Node> current;
    for (int k = 0; k < size; ++k) {
      const Node parent = previous[rng.below(previous.size())];
      edges.push_back({parent, next});
      current.push_back(next++);
    }
    previous = std::move(current);
  }
  const int n = next - 1;

  // Shuffle labels so canonicalization is exercised.
  std::vector<Node> label(static_cast<std::size_t>(n));
  std::iota(label.begin(), label.end(), 1);
  std::shuffle(label.begin(), label.end(), rng.engine());
  for (Edge& e : edges) e = {label[e.parent - 1], label[e.child - 1]};

  CanonicalTree canon = TreeTopology::build(n, edges);
  return random_model_on(canon.tree, opts.alphabet, opts.theta_max, rng, opts.zero_fraction);
}

MarkovTreeModel generate_chain(int n, int alphabet, double theta_max, Stream& rng) {
  std::vector<Edge> edges;
  for (Node v = 2; v <= n; ++v) edges.push_back({v - 1, v});
  CanonicalTree canon = TreeTopology::build(n, edges);
  return random_model_on(canon.tree, alphabet, theta_max, rng);
}

}  // namespace treemix
