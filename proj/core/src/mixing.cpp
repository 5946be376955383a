#include "treemix/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "treemix/error.hpp"

namespace treemix {

std::string_view to_string(Source s) {
  switch (s) {
    case Source::exact:
      return "exact";
    case Source::level_bound:
      return "level-bound";
    case Source::uniform_bound:
      return "uniform-bound";
  }
  return "unknown";
}

std::optional<Source> parse_source(std::string_view text) {
  if (text == "exact") return Source::exact;
  if (text == "level" || text == "level-bound") return Source::level_bound;
  if (text == "uniform" || text == "uniform-bound") return Source::uniform_bound;
  return std::nullopt;
}

ExactMixing::ExactMixing(const MarkovTreeModel& m, std::uint64_t cap)
    : tree_(m.tree()), table_(joint_table(m, cap)) {}

IndexedTensor ExactMixing::prefix_suffix_marginal(Node i, Node j) const {
  std::vector<Node> keep;
  for (Node v = 1; v <= i; ++v) keep.push_back(v);
  for (Node v = j; v <= table_.nodes(); ++v) keep.push_back(v);
  return table_.marginal(keep);
}

double ExactMixing::eta(Node i, Node j, std::span<const int> prefix, int w, int w2) const {
  tree_.check_pair(i, j);
  const int a = table_.alphabet();
  if (static_cast<int>(prefix.size()) != i - 1) {
    throw DomainError("prefix must hold the states of nodes 1..i-1");
  }
  for (int s : prefix) {
    if (s < 0 || s >= a) throw DomainError("prefix state out of range");
  }
  if (w < 0 || w >= a || w2 < 0 || w2 >= a) throw DomainError("state out of range");

  const IndexedTensor joint = prefix_suffix_marginal(i, j);
  const auto width = config_count(a, static_cast<std::size_t>(table_.nodes() - j + 1));
  std::uint64_t base = 0;
  for (int s : prefix) base = base * a + static_cast<std::uint64_t>(s);
  const std::uint64_t r1 = (base * a + w) * width;
  const std::uint64_t r2 = (base * a + w2) * width;

  double m1 = 0.0;
  double m2 = 0.0;
  for (std::uint64_t k = 0; k < width; ++k) {
    m1 += joint[r1 + k];
    m2 += joint[r2 + k];
  }
  if (!(m1 > 0.0) || !(m2 > 0.0)) {
    throw ZeroProbabilityError("conditioning event has probability zero");
  }
  double s = 0.0;
  for (std::uint64_t k = 0; k < width; ++k) s += std::abs(joint[r1 + k] / m1 - joint[r2 + k] / m2);
  return 0.5 * s;
}

std::vector<double> ExactMixing::eta_all(Node i, Node j) const {
  tree_.check_pair(i, j);
  const int a = table_.alphabet();
  const IndexedTensor joint = prefix_suffix_marginal(i, j);
  const auto width = config_count(a, static_cast<std::size_t>(table_.nodes() - j + 1));
  const auto prefixes = config_count(a, static_cast<std::size_t>(i - 1));
  const auto a2 = static_cast<std::uint64_t>(a) * a;

  std::vector<double> out(prefixes * a2, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> mass(static_cast<std::size_t>(a));
  for (std::uint64_t y = 0; y < prefixes; ++y) {
    for (int w = 0; w < a; ++w) {
      const std::uint64_t row = (y * a + w) * width;
      double s = 0.0;
      for (std::uint64_t k = 0; k < width; ++k) s += joint[row + k];
      mass[w] = s;
    }
    for (int w = 0; w < a; ++w) {
      if (!(mass[w] > 0.0)) continue;
      out[y * a2 + w * a + w] = 0.0;
      for (int w2 = w + 1; w2 < a; ++w2) {
        if (!(mass[w2] > 0.0)) continue;
        const std::uint64_t r1 = (y * a + w) * width;
        const std::uint64_t r2 = (y * a + w2) * width;
        double s = 0.0;
        for (std::uint64_t k = 0; k < width; ++k) {
          s += std::abs(joint[r1 + k] / mass[w] - joint[r2 + k] / mass[w2]);
        }
        out[y * a2 + w * a + w2] = out[y * a2 + w2 * a + w] = 0.5 * s;
      }
    }
  }
  return out;
}

double ExactMixing::eta_bar(Node i, Node j) const {
  double best = 0.0;
  for (double v : eta_all(i, j)) {
    if (!std::isnan(v)) best = std::max(best, v);
  }
  return std::min(best, 1.0);
}

double eta_exact(const MarkovTreeModel& m, Node i, Node j, std::span<const int> prefix, int w,
                 int w2, std::uint64_t cap) {
  m.tree().check_pair(i, j);
  return ExactMixing(m, cap).eta(i, j, prefix, w, w2);
}

double eta_bar_exact(const MarkovTreeModel& m, Node i, Node j, std::uint64_t cap) {
  m.tree().check_pair(i, j);
  return ExactMixing(m, cap).eta_bar(i, j);
}

J0Reduction reduce_via_j0(const MarkovTreeModel& m, Node i, Node j) {
  return {m.tree().first_descendant_at_or_after(i, j)};
}

double max_contraction(const MarkovTreeModel& m) {
  double theta = 0.0;
  for (const Edge& e : m.tree().edges()) theta = std::max(theta, contraction_coefficient(m, e));
  return theta;
}

namespace {

// Nodes of T_i grouped by depth, for depths dep(i)..dep(j0).
std::vector<std::vector<Node>> subtree_levels(const TreeTopology& t, Node i, Node j0) {
  const int d0 = t.depth(i);
  std::vector<std::vector<Node>> out(static_cast<std::size_t>(t.depth(j0) - d0) + 1);
  for (Node v : t.subtree(i)) {
    const int d = t.depth(v) - d0;
    if (d < static_cast<int>(out.size())) out[d].push_back(v);
  }
  return out;
}

}  // namespace

std::vector<double> level_alpha_factors(const MarkovTreeModel& m, Node i, Node j) {
  const TreeTopology& t = m.tree();
  const auto j0 = t.first_descendant_at_or_after(i, j);
  if (!j0) return {};
  const auto levels = subtree_levels(t, i, *j0);
  std::vector<double> out;
  out.reserve(levels.size() - 1);
  std::vector<double> thetas;
  for (std::size_t k = 1; k < levels.size(); ++k) {
    thetas.clear();
    for (Node v : levels[k]) thetas.push_back(contraction_coefficient(m, {*t.parent(v), v}));
    out.push_back(alpha(thetas));
  }
  return out;
}

double eta_bar_bound_levels(const MarkovTreeModel& m, Node i, Node j) {
  const auto factors = level_alpha_factors(m, i, j);
  if (factors.empty()) return 0.0;
  double p = 1.0;
  for (double f : factors) p *= f;
  return p;
}

double width_contraction(double theta, int L) {
  if (L < 1) throw DomainError("width L must be at least 1");
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0,1]");
  if (L == 1) return theta;
  return 1.0 - std::pow(1.0 - theta, L);
}

double eta_bar_bound_uniform(double theta, int L, Node i, Node j) {
  if (!(theta >= 0.0 && theta < 1.0)) throw DomainError("uniform bound needs 0 <= theta < 1");
  if (L < 1) throw DomainError("width L must be at least 1");
  if (!(i < j)) throw DomainError("uniform bound needs i < j");
  return std::pow(width_contraction(theta, L), (j - i) / L);
}

double geometric_rate(double theta, int L) {
  if (!(theta >= 0.0 && theta < 1.0)) throw DomainError("geometric rate needs 0 <= theta < 1");
  if (L < 1) throw DomainError("width L must be at least 1");
  if (L == 1) return theta;
  return std::pow(width_contraction(theta, L), 1.0 / (2.0 * L - 1.0));
}

LinearGrowthBound eta_bar_bound_linear_growth(const MarkovTreeModel& m, Node i, Node j,
                                              double c) {
  if (!(c > 0.0)) throw DomainError("growth constant c must be positive");
  const TreeTopology& t = m.tree();
  t.check_pair(i, j);
  LinearGrowthBound out;
  for (int d = 1; d <= t.depth(); ++d) {
    if (static_cast<double>(t.level(d).size()) > c * d) out.premise_holds = false;
  }
  const auto j0 = t.first_descendant_at_or_after(i, j);
  if (!j0) {
    out.branch = LinearGrowthBound::Branch::vanishing;
    return out;
  }

  const int di = t.depth(i);
  const auto levels = subtree_levels(t, i, *j0);
  double product = 1.0;
  for (std::size_t k = 1; k < levels.size(); ++k) {
    double sum = 0.0;
    double top = 0.0;
    for (Node v : levels[k]) {
      const double th = contraction_coefficient(m, {*t.parent(v), v});
      sum += th;
      top = std::max(top, th);
    }
    product *= sum;
    out.beta = std::max(out.beta, c * static_cast<double>(di + static_cast<int>(k)) * top);
  }
  out.product_bound = std::min(1.0, product);
  out.bound = out.product_bound;
  out.branch = LinearGrowthBound::Branch::product;
  out.exponent = std::sqrt(2.0 * (j - i) / c) - di - 1.0;
  out.beta_below_one = out.beta < 1.0;
  out.vacuous = out.exponent <= 0.0;
  if (out.premise_holds && out.beta_below_one) {
    out.closed_form = std::min(1.0, std::pow(out.beta, std::max(out.exponent, 0.0)));
    if (*out.closed_form < out.bound) {
      out.bound = *out.closed_form;
      out.branch = LinearGrowthBound::Branch::closed_form;
    }
  }
  return out;
}

std::optional<TensorChainTrace> tensor_chain_trace(const MarkovTreeModel& m, Node i, Node j,
                                                   int w, int w2) {
  const TreeTopology& t = m.tree();
  const int a = m.alphabet();
  if (w < 0 || w >= a || w2 < 0 || w2 >= a) throw DomainError("state out of range");
  const auto j0 = t.first_descendant_at_or_after(i, j);
  if (!j0) return std::nullopt;

  TensorChainTrace tr;
  tr.j0 = *j0;
  tr.cuts = t.cut_sets(i, j);
  const auto levels = subtree_levels(t, i, *j0);

  // A^(d_k): tensor product of the kernels on E_{d_k}, mapping I_{d_{k-1}}
  // tensors to I_{d_k} tensors.
  std::vector<StochasticOperator> steps;
  for (std::size_t k = 1; k < levels.size(); ++k) {
    std::vector<EdgeFactor> factors;
    std::vector<double> thetas;
    for (Node v : levels[k]) {
      const Node u = *t.parent(v);
      factors.push_back({u, v, &m.kernel({u, v}).matrix});
      thetas.push_back(contraction_coefficient(m, {u, v}));
    }
    steps.push_back(operator_tensor_product(levels[k - 1], levels[k], factors));
    tr.level_norms.push_back(operator_tv_norm(steps.back()));
    tr.level_alphas.push_back(alpha(thetas));
  }

  IndexedTensor f = steps.front().column(static_cast<std::size_t>(w)) -
                    steps.front().column(static_cast<std::size_t>(w2));
  tr.h_norm = f.tv_norm();
  for (std::size_t k = 1; k < steps.size(); ++k) f = apply_operator(steps[k], f);
  tr.f_norm = f.tv_norm();

  // B maps I_{dep(j0)} = C0 ∪ Z0 to C0 ∪ C1: it copies C0 and draws C1 from
  // the kernels of their parents in Z0.
  const std::vector<Node>& in = levels.back();
  std::vector<Node> out = tr.cuts.C0;
  out.insert(out.end(), tr.cuts.C1.begin(), tr.cuts.C1.end());
  std::sort(out.begin(), out.end());

  const auto rows = config_count(a, out.size());
  const auto cols = config_count(a, in.size());
  std::vector<double> entries(rows * cols, 0.0);
  std::vector<int> state(static_cast<std::size_t>(m.size()) + 1, 0);
  auto decode = [&](std::uint64_t x, const std::vector<Node>& nodes) {
    for (std::size_t k = nodes.size(); k-- > 0;) {
      state[nodes[k]] = static_cast<int>(x % a);
      x /= a;
    }
  };
  std::vector<int> in_state(state.size(), 0);
  for (std::uint64_t c = 0; c < cols; ++c) {
    decode(c, in);
    in_state = state;
    for (std::uint64_t r = 0; r < rows; ++r) {
      decode(r, out);
      double v = 1.0;
      for (Node n0 : tr.cuts.C0) {
        if (state[n0] != in_state[n0]) v = 0.0;
      }
      for (Node n1 : tr.cuts.C1) {
        const Node p = *t.parent(n1);
        v *= m.kernel({p, n1}).prob(state[n1], in_state[p]);
      }
      entries[r * cols + c] = v;
    }
  }
  const StochasticOperator B(in, out, a, std::move(entries));
  tr.B_norm = operator_tv_norm(B);
  tr.Bf_norm = apply_operator(B, f).tv_norm();
  return tr;
}

double model_uniform_bound(const MarkovTreeModel& m, Node i, Node j) {
  m.tree().check_pair(i, j);
  const double theta = max_contraction(m);
  if (theta >= 1.0) return 1.0;
  return eta_bar_bound_uniform(theta, m.tree().width(), i, j);
}

EtaReport eta_report(const MarkovTreeModel& m, Node i, Node j, const ExactMixing* exact) {
  m.tree().check_pair(i, j);
  EtaReport r;
  r.i = i;
  r.j = j;
  r.j0 = m.tree().first_descendant_at_or_after(i, j);
  if (exact != nullptr) r.exact = exact->eta_bar(i, j);
  r.level_bound = eta_bar_bound_levels(m, i, j);
  r.uniform_bound = model_uniform_bound(m, i, j);
  const double theta = max_contraction(m);
  const int L = m.tree().width();
  if (theta < 1.0 && j >= i + L) r.geometric_bound = std::pow(geometric_rate(theta, L), j - i);
  return r;
}

}  // namespace treemix
