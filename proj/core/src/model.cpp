#include "treemix/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "treemix/error.hpp"
#include "treemix/parallel.hpp"
#include "treemix/rng.hpp"

namespace treemix {

namespace {

// Odometer over configurations of `n` digits that tracks the flat offset
// of a chosen sub-configuration.
class ProjectedOdometer {
 public:
  ProjectedOdometer(int n, int alphabet, std::vector<std::uint64_t> strides)
      : alphabet_(alphabet), digits_(n, 0), strides_(std::move(strides)) {}

  std::uint64_t offset() const { return offset_; }
  const std::vector<int>& digits() const { return digits_; }

  void advance() {
    for (std::size_t k = digits_.size(); k-- > 0;) {
      if (++digits_[k] < alphabet_) {
        offset_ += strides_[k];
        return;
      }
      digits_[k] = 0;
      offset_ -= static_cast<std::uint64_t>(alphabet_ - 1) * strides_[k];
    }
  }

 private:
  int alphabet_;
  std::vector<int> digits_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t offset_ = 0;
};

// Stride of every node 1..n (position v-1) inside the sorted subset `keep`;
// zero for nodes that are not kept.
std::vector<std::uint64_t> node_strides(int n, int alphabet, std::span<const Node> keep) {
  std::vector<std::uint64_t> strides(n, 0);
  std::uint64_t s = 1;
  for (std::size_t k = keep.size(); k-- > 0;) {
    strides[keep[k] - 1] = s;
    s *= static_cast<std::uint64_t>(alphabet);
  }
  return strides;
}

void check_sorted_nodes(std::span<const Node> nodes, int n) {
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] < 1 || nodes[k] > n) {
      throw DomainError("node " + std::to_string(nodes[k]) + " out of range");
    }
    if (k > 0 && !(nodes[k - 1] < nodes[k])) {
      throw DomainError("node set must be strictly increasing");
    }
  }
}

std::vector<double> to_column_major(const ParentMajorKernel& k, int alphabet) {
  if (static_cast<int>(k.rows.size()) != alphabet) {
    throw DomainError("kernel on edge (" + std::to_string(k.edge.parent) + "," +
                      std::to_string(k.edge.child) + ") has " + std::to_string(k.rows.size()) +
                      " rows, alphabet size is " + std::to_string(alphabet));
  }
  std::vector<double> col(static_cast<std::size_t>(alphabet) * alphabet);
  for (int y = 0; y < alphabet; ++y) {
    std::vector<double> row = k.rows[y];
    if (static_cast<int>(row.size()) != alphabet) {
      throw DomainError("kernel on edge (" + std::to_string(k.edge.parent) + "," +
                        std::to_string(k.edge.child) + ") row " + std::to_string(y) +
                        " has wrong length");
    }
    try {
      renormalize(row);
    } catch (const DomainError& e) {
      throw DomainError("kernel on edge (" + std::to_string(k.edge.parent) + "," +
                        std::to_string(k.edge.child) + ") row " + std::to_string(y) + ": " +
                        e.what());
    }
    for (int x = 0; x < alphabet; ++x) col[static_cast<std::size_t>(x) * alphabet + y] = row[x];
  }
  return col;
}

}  // namespace

std::uint64_t enumeration_cap() {
  if (const char* env = std::getenv("TREEMIX_MAX_ENUM")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return kDefaultEnumerationCap;
}

void renormalize(std::span<double> probs) {
  if (probs.empty()) throw DomainError("empty distribution");
  double s = 0.0;
  for (double v : probs) {
    if (!(v >= 0.0) || v > 1.0 + kStochasticTolerance) {
      throw DomainError("probability " + std::to_string(v) + " outside [0,1]");
    }
    s += v;
  }
  if (std::abs(s - 1.0) > kStochasticTolerance) {
    throw DomainError("probabilities sum to " + std::to_string(s) + ", expected 1");
  }
  const double slack =
      16.0 * static_cast<double>(probs.size()) * std::numeric_limits<double>::epsilon();
  if (std::abs(s - 1.0) > slack) {
    for (double& v : probs) v /= s;
  }
}

MarkovTreeModel::MarkovTreeModel(TreeTopology tree, int alphabet, std::vector<double> root_dist,
                                 std::vector<Kernel> kernels)
    : tree_(std::move(tree)), alphabet_(alphabet), root_dist_(std::move(root_dist)) {
  if (alphabet_ < 1) throw DomainError("alphabet size must be positive");
  if (static_cast<int>(root_dist_.size()) != alphabet_) {
    throw DomainError("root distribution has length " + std::to_string(root_dist_.size()) +
                      ", alphabet size is " + std::to_string(alphabet_));
  }
  const IndexedTensor root({1}, alphabet_, root_dist_);
  if (!root.is_distribution()) throw DomainError("root distribution is not a distribution");

  kernels_.resize(static_cast<std::size_t>(tree_.size()) + 1);
  std::vector<bool> seen(kernels_.size(), false);
  for (Kernel& k : kernels) {
    if (!tree_.has_edge(k.edge)) {
      throw DomainError("kernel given for (" + std::to_string(k.edge.parent) + "," +
                        std::to_string(k.edge.child) + "), which is not a tree edge");
    }
    if (seen[k.edge.child]) {
      throw DomainError("duplicate kernel for edge into node " + std::to_string(k.edge.child));
    }
    if (k.matrix.alphabet() != alphabet_ || k.matrix.rows() != static_cast<std::size_t>(alphabet_) ||
        k.matrix.cols() != static_cast<std::size_t>(alphabet_)) {
      throw DomainError("kernel shape does not match alphabet size");
    }
    seen[k.edge.child] = true;
    kernels_[k.edge.child] = std::move(k);
  }
  for (Node v = 2; v <= tree_.size(); ++v) {
    if (!seen[v]) throw DomainError("missing kernel for edge into node " + std::to_string(v));
  }
}

const Kernel& MarkovTreeModel::kernel_into(Node child) const {
  tree_.check_node(child);
  if (child == tree_.root()) throw DomainError("the root has no incoming kernel");
  return kernels_[child];
}

const Kernel& MarkovTreeModel::kernel(Edge e) const {
  if (!tree_.has_edge(e)) {
    throw DomainError("unknown edge (" + std::to_string(e.parent) + "," +
                      std::to_string(e.child) + ")");
  }
  return kernels_[e.child];
}

LabeledModel make_model(int n, int alphabet, std::vector<double> root_dist,
                        std::span<const ParentMajorKernel> kernels) {
  std::vector<Edge> edges;
  edges.reserve(kernels.size());
  for (const auto& k : kernels) edges.push_back(k.edge);
  CanonicalTree canon = TreeTopology::build(n, edges);

  if (static_cast<int>(root_dist.size()) != alphabet) {
    throw DomainError("root distribution has length " + std::to_string(root_dist.size()) +
                      ", alphabet size is " + std::to_string(alphabet));
  }
  try {
    renormalize(root_dist);
  } catch (const DomainError& e) {
    throw DomainError(std::string("root distribution: ") + e.what());
  }

  std::vector<Kernel> converted;
  converted.reserve(kernels.size());
  for (const auto& k : kernels) {
    const Node p = canon.to_canonical[k.edge.parent - 1];
    const Node c = canon.to_canonical[k.edge.child - 1];
    converted.push_back(
        {Edge{p, c}, StochasticOperator::square(p, c, alphabet, to_column_major(k, alphabet))});
  }
  MarkovTreeModel model(canon.tree, alphabet, std::move(root_dist), std::move(converted));
  return {std::move(model), std::move(canon.to_canonical), std::move(canon.from_canonical)};
}

double joint_probability(const MarkovTreeModel& m, std::span<const int> x) {
  if (static_cast<int>(x.size()) != m.size()) {
    throw DomainError("configuration length " + std::to_string(x.size()) +
                      " does not match n = " + std::to_string(m.size()));
  }
  for (int s : x) {
    if (s < 0 || s >= m.alphabet()) {
      throw DomainError("state " + std::to_string(s) + " out of range");
    }
  }
  double p = m.root_dist()[x[0]];
  for (Node v = 2; v <= m.size(); ++v) {
    const Node u = *m.tree().parent(v);
    p *= m.kernel_into(v).prob(x[v - 1], x[u - 1]);
  }
  return p;
}

double contraction_coefficient(const MarkovTreeModel& m, Edge e) {
  return operator_tv_norm(m.kernel(e).matrix);
}

JointTable::JointTable(int n, int alphabet, std::vector<double> probs)
    : n_(n), alphabet_(alphabet), probs_(std::move(probs)) {
  if (n_ < 1) throw DomainError("joint table needs at least one node");
  if (probs_.size() != config_count(alphabet_, static_cast<std::size_t>(n_))) {
    throw DomainError("joint table length does not match |S|^n");
  }
}

IndexedTensor JointTable::marginal(std::span<const Node> keep) const {
  check_sorted_nodes(keep, n_);
  auto out = IndexedTensor::zeros(std::vector<Node>(keep.begin(), keep.end()), alphabet_);
  ProjectedOdometer odo(n_, alphabet_, node_strides(n_, alphabet_, keep));
  for (std::uint64_t x = 0; x < probs_.size(); ++x) {
    out[odo.offset()] += probs_[x];
    odo.advance();
  }
  return out;
}

JointTable joint_table(const MarkovTreeModel& m, std::uint64_t cap) {
  const int n = m.size();
  const int a = m.alphabet();
  const auto total = config_count(a, static_cast<std::size_t>(n));
  if (total > cap) {
    throw EnumerationCapError("enumeration of |S|^n = " + std::to_string(total) +
                              " configurations exceeds cap " + std::to_string(cap));
  }
  std::vector<double> probs(m.root_dist().begin(), m.root_dist().end());
  // Extend the table one node at a time; parents always precede children.
  for (Node v = 2; v <= n; ++v) {
    const Node u = *m.tree().parent(v);
    const Kernel& k = m.kernel_into(v);
    const std::uint64_t parent_stride = config_count(a, static_cast<std::size_t>(v - 1 - u));
    std::vector<double> next(probs.size() * a);
    for (std::uint64_t x = 0; x < probs.size(); ++x) {
      const int xu = static_cast<int>((x / parent_stride) % a);
      for (int s = 0; s < a; ++s) next[x * a + s] = probs[x] * k.prob(s, xu);
    }
    probs = std::move(next);
  }
  return JointTable(n, a, std::move(probs));
}

IndexedTensor conditional_future_law(const JointTable& table, std::span<const int> prefix,
                                     std::span<const Node> targets) {
  const int n = table.nodes();
  const int a = table.alphabet();
  const int i = static_cast<int>(prefix.size());
  if (i < 1 || i >= n) throw DomainError("prefix length must lie in 1..n-1");
  if (targets.empty()) throw DomainError("empty target set");
  check_sorted_nodes(targets, n);
  if (targets.front() <= i) throw DomainError("targets must lie after the prefix");
  for (int s : prefix) {
    if (s < 0 || s >= a) throw DomainError("prefix state out of range");
  }

  std::vector<Node> keep;
  for (Node v = 1; v <= i; ++v) keep.push_back(v);
  keep.insert(keep.end(), targets.begin(), targets.end());
  const IndexedTensor joint = table.marginal(keep);

  std::uint64_t prefix_index = 0;
  for (int s : prefix) prefix_index = prefix_index * a + static_cast<std::uint64_t>(s);
  const auto width = config_count(a, targets.size());
  std::vector<double> law(width);
  double mass = 0.0;
  for (std::uint64_t k = 0; k < width; ++k) {
    law[k] = joint[prefix_index * width + k];
    mass += law[k];
  }
  if (!(mass > 0.0)) throw ZeroProbabilityError("conditioning prefix has probability zero");
  for (double& v : law) v /= mass;
  return IndexedTensor(std::vector<Node>(targets.begin(), targets.end()), a, std::move(law));
}

IndexedTensor conditional_future_law(const MarkovTreeModel& m, std::span<const int> prefix,
                                     std::span<const Node> targets, std::uint64_t cap) {
  return conditional_future_law(joint_table(m, cap), prefix, targets);
}

SampleSet sample_paths(const MarkovTreeModel& m, std::uint64_t seed, std::size_t count,
                       int threads, std::uint64_t domain) {
  if (count < 1) throw DomainError("sample count must be positive");
  const int n = m.size();
  const int a = m.alphabet();
  SampleSet out{n, count, std::vector<int>(count * static_cast<std::size_t>(n))};

  // Kernel columns as cumulative tables: cdf[v][parent_state * a + s].
  std::vector<std::vector<double>> cdf(static_cast<std::size_t>(n) + 1);
  auto cumulate = [a](auto&& prob) {
    std::vector<double> c(static_cast<std::size_t>(a));
    double acc = 0.0;
    for (int s = 0; s < a; ++s) c[s] = (acc += prob(s));
    return c;
  };
  cdf[1] = cumulate([&](int s) { return m.root_dist()[s]; });
  for (Node v = 2; v <= n; ++v) {
    const Kernel& k = m.kernel_into(v);
    for (int y = 0; y < a; ++y) {
      auto col = cumulate([&](int s) { return k.prob(s, y); });
      cdf[v].insert(cdf[v].end(), col.begin(), col.end());
    }
  }
  auto draw = [a](const double* c, double u) {
    // Last state with positive mass absorbs rounding in the final bucket.
    int last = a - 1;
    while (last > 0 && c[last] == c[last - 1]) --last;
    for (int s = 0; s < last; ++s) {
      if (u < c[s]) return s;
    }
    return last;
  };

  std::vector<Node> parent(static_cast<std::size_t>(n) + 1, 0);
  for (Node v = 2; v <= n; ++v) parent[v] = *m.tree().parent(v);

  parallel_chunks(count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      Stream rng(seed, k, domain);
      int* x = out.states.data() + k * static_cast<std::size_t>(n);
      x[0] = draw(cdf[1].data(), rng.uniform());
      for (Node v = 2; v <= n; ++v) {
        x[v - 1] = draw(cdf[v].data() + static_cast<std::size_t>(x[parent[v] - 1]) * a,
                        rng.uniform());
      }
    }
  });
  return out;
}

MarkovCheck markov_violation(const JointTable& table, const TreeTopology& tree, Node u,
                             double tol) {
  if (table.nodes() != tree.size()) throw DomainError("joint table and tree sizes differ");
  const auto& kids = tree.children(u);
  if (kids.size() < 2) {
    throw DomainError("node " + std::to_string(u) + " has fewer than two children");
  }
  const int a = table.alphabet();
  MarkovCheck out;

  auto with_u = [u](std::vector<Node> s) {
    s.push_back(u);
    std::sort(s.begin(), s.end());
    return s;
  };
  const std::vector<Node> only_u{u};
  const IndexedTensor pu = table.marginal(only_u);

  for (std::size_t p = 0; p < kids.size(); ++p) {
    for (std::size_t q = p + 1; q < kids.size(); ++q) {
      const auto sa = tree.subtree(kids[p]);
      const auto sb = tree.subtree(kids[q]);
      std::vector<Node> all = sa;
      all.insert(all.end(), sb.begin(), sb.end());
      const auto keep = with_u(all);
      const auto keep_a = with_u(sa);
      const auto keep_b = with_u(sb);
      const IndexedTensor joint = table.marginal(keep);
      const IndexedTensor ma = table.marginal(keep_a);
      const IndexedTensor mb = table.marginal(keep_b);

      const auto sa_stride = node_strides(table.nodes(), a, keep_a);
      const auto sb_stride = node_strides(table.nodes(), a, keep_b);
      std::vector<int> digits(keep.size(), 0);
      for (std::uint64_t x = 0; x < joint.size(); ++x) {
        std::uint64_t ia = 0;
        std::uint64_t ib = 0;
        int y = 0;
        for (std::size_t k = 0; k < keep.size(); ++k) {
          ia += sa_stride[keep[k] - 1] * digits[k];
          ib += sb_stride[keep[k] - 1] * digits[k];
          if (keep[k] == u) y = digits[k];
        }
        const double py = pu[static_cast<std::size_t>(y)];
        if (py > 0.0) {
          const double lhs = joint[x] / py;
          const double rhs = (ma[ia] / py) * (mb[ib] / py);
          out.max_violation = std::max(out.max_violation, std::abs(lhs - rhs));
        }
        for (std::size_t k = digits.size(); k-- > 0;) {
          if (++digits[k] < a) break;
          digits[k] = 0;
        }
      }
    }
  }
  out.passed = out.max_violation <= tol;
  return out;
}

MarkovCheck verify_markov_property(const MarkovTreeModel& m, Node u, double tol,
                                   std::uint64_t cap) {
  if (m.tree().children(u).size() < 2) {
    throw DomainError("node " + std::to_string(u) + " has fewer than two children");
  }
  return markov_violation(joint_table(m, cap), m.tree(), u, tol);
}

}  // namespace treemix
