#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "treemix/error.hpp"
#include "treemix/generate.hpp"
#include "treemix/mixing.hpp"
#include "treemix/rng.hpp"
#include "treemix/verify.hpp"

using namespace treemix;
using namespace treemix::test;
using doctest::Approx;

namespace {

MarkovTreeModel random_model(Stream& rng, int max_nodes, int alphabet, double zero = 0.0,
                             double theta_max = 0.95) {
  GenOptions g;
  g.alphabet = alphabet;
  g.depth = 1 + static_cast<int>(rng.below(5));
  g.width = 1 + static_cast<int>(rng.below(3));
  g.max_nodes = max_nodes;
  g.zero_fraction = zero;
  g.theta_max = theta_max;
  return generate_model(g, rng);
}

// Tree whose level d holds exactly d nodes, for d = 1..depth.
TreeTopology linear_growth_tree(int depth, Stream& rng) {
  std::vector<Edge> edges;
  std::vector<Node> prev{1};
  Node next = 2;
  for (int d = 1; d <= depth; ++d) {
    std::vector<Node> cur;
    for (int k = 0; k < d; ++k) {
      edges.push_back({prev[rng.below(prev.size())], next});
      cur.push_back(next++);
    }
    prev = cur;
  }
  return TreeTopology::build(next - 1, edges).tree;
}

}  // namespace

TEST_CASE("exact eta on an independent model vanishes") {
  const auto m = uniform_kernel_model(4, {{1, 2}, {1, 3}, {2, 4}}, {0.3, 0.7}, constant_kernel(2));
  const int y[] = {1};
  CHECK(eta_exact(m, 2, 3, y, 0, 1) == Approx(0.0).epsilon(1e-15));
  CHECK(eta_bar_exact(m, 1, 2) == Approx(0.0).epsilon(1e-15));
  CHECK(eta_bar_exact(m, 2, 4) == Approx(0.0).epsilon(1e-15));
}

TEST_CASE("identical conditioning gives zero") {
  Stream rng(2, 0);
  const auto m = random_model(rng, 6, 3);
  if (m.size() >= 3) {
    const int y[] = {2};
    CHECK(eta_exact(m, 2, 3, y, 1, 1) == 0.0);
  }
}

TEST_CASE("eta_12 on a chain equals the first contraction coefficient") {
  Stream rng(4, 0);
  for (int t = 0; t < 20; ++t) {
    const int a = 2 + static_cast<int>(rng.below(2));
    const auto m = generate_chain(4, a, 1.0, rng);
    double best = 0.0;
    for (int w = 0; w < a; ++w) {
      for (int w2 = 0; w2 < a; ++w2) best = std::max(best, eta_exact(m, 1, 2, {}, w, w2));
    }
    CHECK(best == Approx(contraction_coefficient(m, {1, 2})).epsilon(1e-12));
  }
}

TEST_CASE("two-step chain reproduces theta squared") {
  const auto m = uniform_kernel_model(3, chain_edges(3), {0.5, 0.5}, kernel_07());
  CHECK(eta_bar_exact(m, 1, 3) == Approx(0.49).epsilon(1e-14));
  const auto law = oracle::joint(m);
  CHECK(oracle::eta_bar(m, law, 1, 3) == Approx(0.49).epsilon(1e-14));
}

TEST_CASE("eta without a descendant at or after j is zero") {
  const auto m = uniform_kernel_model(5, {{1, 2}, {1, 3}, {2, 4}, {3, 5}}, {0.5, 0.5}, kernel_07());
  CHECK(eta_bar_exact(m, 2, 5) == Approx(0.0).epsilon(1e-15));
  CHECK(reduce_via_j0(m, 2, 5).vanishes());
  CHECK(eta_bar_bound_levels(m, 2, 5) == 0.0);
}

TEST_CASE("exact eta agrees with the Bayes-rule oracle") {
  Stream rng(6, 0);
  for (int t = 0; t < 30; ++t) {
    const int a = 2 + static_cast<int>(rng.below(2));
    const auto m = random_model(rng, 5, a, t % 3 == 0 ? 0.4 : 0.0);
    const auto law = oracle::joint(m);
    const ExactMixing exact(m);
    for (Node i = 1; i <= m.size(); ++i) {
      for (Node j = i + 1; j <= m.size(); ++j) {
        CHECK(exact.eta_bar(i, j) == Approx(oracle::eta_bar(m, law, i, j)).epsilon(1e-12));
        const auto all = exact.eta_all(i, j);
        for (const auto& y : oracle::all_configs(i - 1, a)) {
          for (int w = 0; w < a; ++w) {
            for (int w2 = 0; w2 < a; ++w2) {
              const auto want = oracle::eta(law, m.size(), i, j, y, w, w2);
              std::uint64_t yi = 0;
              for (int s : y) yi = yi * a + s;
              const double got = all[(yi * a + w) * a + w2];
              if (!want) {
                CHECK(std::isnan(got));
                CHECK_THROWS_AS(exact.eta(i, j, y, w, w2), ZeroProbabilityError);
              } else {
                CHECK(got == Approx(*want).epsilon(1e-12));
                CHECK(exact.eta(i, j, y, w, w2) == got);
              }
            }
          }
        }
      }
    }
  }
}

TEST_CASE("exact eta argument checks") {
  const auto m = uniform_kernel_model(3, chain_edges(3), {0.5, 0.5}, kernel_07());
  const ExactMixing exact(m);
  const int y[] = {0};
  CHECK_THROWS_AS(exact.eta(2, 2, y, 0, 1), DomainError);
  CHECK_THROWS_AS(exact.eta(2, 3, {}, 0, 1), DomainError);
  CHECK_THROWS_AS(exact.eta(2, 3, y, 0, 2), DomainError);
  const auto big = uniform_kernel_model(12, chain_edges(12), {0.5, 0.5}, kernel_07());
  CHECK_THROWS_AS(eta_bar_exact(big, 1, 2, 100), EnumerationCapError);
}

TEST_CASE("subtree reduction") {
  const auto chain = uniform_kernel_model(4, chain_edges(4), {0.5, 0.5}, kernel_07());
  CHECK(reduce_via_j0(chain, 1, 3).j0 == 3);

  Stream rng(8, 0);
  const auto tree = TreeTopology::build(5, std::vector<Edge>{{1, 2}, {1, 3}, {2, 4}, {3, 5}}).tree;
  const auto m = random_model_on(tree, 3, 0.9, rng, 0.0);
  CHECK(reduce_via_j0(m, 2, 3).j0 == 4);
  const ExactMixing exact(m);
  const auto lhs = exact.eta_all(2, 3);
  const auto rhs = exact.eta_all(2, 4);
  REQUIRE(lhs.size() == rhs.size());
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    if (std::isnan(lhs[k])) {
      CHECK(std::isnan(rhs[k]));
    } else {
      CHECK(std::abs(lhs[k] - rhs[k]) <= 1e-12);
    }
  }
}

TEST_CASE("level bound") {
  const auto chain = uniform_kernel_model(5, chain_edges(5), {0.5, 0.5}, kernel_07());
  CHECK(eta_bar_bound_levels(chain, 1, 4) == Approx(0.343).epsilon(1e-14));
  CHECK(eta_bar_bound_levels(chain, 2, 3) == Approx(0.7).epsilon(1e-15));

  const auto bin = uniform_kernel_model(7, binary_edges(7), {0.5, 0.5}, copy_kernel(0.5));
  const auto f = level_alpha_factors(bin, 1, 4);
  REQUIRE(f.size() == 2);
  CHECK(f[0] == Approx(0.75).epsilon(1e-14));
  CHECK(f[1] == Approx(0.9375).epsilon(1e-14));
  CHECK(eta_bar_bound_levels(bin, 1, 4) == Approx(0.703125).epsilon(1e-14));

  CHECK(eta_bar_bound_levels(bin, 2, 6) == 0.0);
  CHECK(level_alpha_factors(bin, 2, 6).empty());
  CHECK_THROWS_AS(eta_bar_bound_levels(bin, 3, 3), DomainError);
}

TEST_CASE("uniform bound") {
  CHECK(eta_bar_bound_uniform(0.5, 2, 1, 5) == 0.5625);
  CHECK(eta_bar_bound_uniform(0.3, 1, 1, 3) == std::pow(0.3, 2));
  CHECK(eta_bar_bound_uniform(0.3, 1, 1, 3) == Approx(0.09).epsilon(1e-15));
  CHECK(eta_bar_bound_uniform(0.5, 4, 1, 3) == 1.0);
  CHECK(width_contraction(0.37, 1) == 0.37);
  CHECK_THROWS_AS(eta_bar_bound_uniform(1.0, 2, 1, 3), DomainError);
  CHECK_THROWS_AS(eta_bar_bound_uniform(0.5, 0, 1, 3), DomainError);
  CHECK_THROWS_AS(eta_bar_bound_uniform(0.5, 2, 3, 3), DomainError);
}

TEST_CASE("uniform bound monotonicity") {
  for (int L = 1; L <= 6; ++L) {
    for (int k = 1; k <= 30; ++k) {
      for (int th = 0; th < 19; ++th) {
        const double a = th / 20.0;
        const double b = (th + 1) / 20.0;
        CHECK(eta_bar_bound_uniform(a, L, 1, 1 + k) <= eta_bar_bound_uniform(b, L, 1, 1 + k));
        CHECK(eta_bar_bound_uniform(a, L, 1, 1 + k) <= eta_bar_bound_uniform(a, L + 1, 1, 1 + k));
        CHECK(eta_bar_bound_uniform(a, L, 1, 2 + k) <= eta_bar_bound_uniform(a, L, 1, 1 + k));
      }
    }
  }
}

TEST_CASE("geometric rate") {
  CHECK(geometric_rate(0.42, 1) == 0.42);
  CHECK(geometric_rate(0.5, 2) == Approx(std::cbrt(0.75)).epsilon(1e-12));
  CHECK(geometric_rate(0.5, 2) == Approx(0.9085603).epsilon(1e-7));
  CHECK(geometric_rate(1e-12, 3) == Approx(std::pow(3e-12, 0.2)).epsilon(1e-6));
  CHECK(geometric_rate(0.0, 3) == 0.0);
  CHECK_THROWS_AS(geometric_rate(1.0, 2), DomainError);
  CHECK_THROWS_AS(geometric_rate(0.5, 0), DomainError);
  const auto r = suites::geometric_rate_dominance();
  CHECK(r.passed);
}

TEST_CASE("bound ordering on random models") {
  const auto r = suites::bound_ordering(150, 77, enumeration_cap());
  INFO("max violation " << r.max_violation);
  CHECK(r.passed);
  const auto c = suites::chain_reduction(100, 77);
  CHECK(c.passed);
  const auto j = suites::j0_reduction(60, 77, enumeration_cap());
  CHECK(j.passed);
}

TEST_CASE("eta report") {
  const auto bin = uniform_kernel_model(7, binary_edges(7), {0.5, 0.5}, copy_kernel(0.5));
  const ExactMixing exact(bin);
  const auto r = eta_report(bin, 1, 6, &exact);
  REQUIRE(r.exact.has_value());
  CHECK(r.j0 == 6);
  CHECK(*r.exact <= r.level_bound + 1e-12);
  CHECK(r.level_bound <= r.uniform_bound + 1e-12);
  REQUIRE(r.geometric_bound.has_value());
  CHECK(r.uniform_bound <= *r.geometric_bound + 1e-12);
  const auto s = eta_report(bin, 1, 2, nullptr);
  CHECK_FALSE(s.exact.has_value());
  CHECK_FALSE(s.geometric_bound.has_value());

  // theta = 1 leaves only the trivial uniform bound.
  const auto ident = uniform_kernel_model(3, chain_edges(3), {0.5, 0.5}, identity_kernel(2));
  CHECK(model_uniform_bound(ident, 1, 3) == 1.0);
}

TEST_CASE("linear-growth bound") {
  const auto chain = uniform_kernel_model(6, chain_edges(6), {0.5, 0.5}, copy_kernel(0.3));
  const auto lc = eta_bar_bound_linear_growth(chain, 1, 4, 1.0);
  CHECK(lc.product_bound == Approx(eta_bar_bound_levels(chain, 1, 4)).epsilon(1e-14));
  CHECK(lc.premise_holds);

  const auto flat = uniform_kernel_model(6, chain_edges(6), {0.5, 0.5}, constant_kernel(2));
  const auto lf = eta_bar_bound_linear_growth(flat, 1, 5, 1.0);
  CHECK(lf.bound == 0.0);

  const auto bin = uniform_kernel_model(7, binary_edges(7), {0.5, 0.5}, copy_kernel(0.5));
  const auto lv = eta_bar_bound_linear_growth(bin, 2, 6, 2.0);
  CHECK(lv.branch == LinearGrowthBound::Branch::vanishing);
  CHECK(lv.bound == 0.0);
  // Level 2 has 4 nodes > 1 * 2.
  CHECK_FALSE(eta_bar_bound_linear_growth(bin, 1, 4, 1.0).premise_holds);
  // beta = c * 2 * 0.5 = 2.
  const auto lb = eta_bar_bound_linear_growth(bin, 1, 4, 2.0);
  CHECK_FALSE(lb.beta_below_one);
  CHECK_FALSE(lb.closed_form.has_value());
  CHECK_THROWS_AS(eta_bar_bound_linear_growth(bin, 1, 4, 0.0), DomainError);

  // Deep i at depth 4 with a child j: j - i <= 8, so the exponent
  // sqrt(2 (j - i)) - 5 is negative.
  Stream rng(12, 0);
  const auto tree = linear_growth_tree(6, rng);
  const auto m = random_model_on(tree, 2, 0.1, rng);
  const Node child = tree.level(5).front();
  const Node deep = *tree.parent(child);
  const auto lvac = eta_bar_bound_linear_growth(m, deep, child, 1.0);
  CHECK(lvac.branch != LinearGrowthBound::Branch::vanishing);
  CHECK(lvac.vacuous);
  CHECK(lvac.bound <= 1.0);
}

TEST_CASE("linear-growth closed form dominates the level bound") {
  Stream rng(13, 0);
  for (int t = 0; t < 40; ++t) {
    const int depth = 2 + static_cast<int>(rng.below(5));
    const auto tree = linear_growth_tree(depth, rng);
    const double theta = 0.9 / depth;
    std::vector<Kernel> ks;
    for (const Edge& e : tree.edges()) {
      const auto r = copy_kernel(theta);
      ks.push_back({e, StochasticOperator::square(e.parent, e.child, 2,
                                                  {r[0][0], r[1][0], r[0][1], r[1][1]})});
    }
    const MarkovTreeModel m(tree, 2, {0.5, 0.5}, ks);
    for (Node i = 1; i <= m.size(); ++i) {
      for (Node j = i + 1; j <= m.size(); ++j) {
        const auto lg = eta_bar_bound_linear_growth(m, i, j, 1.0);
        CHECK(lg.premise_holds);
        const double level = eta_bar_bound_levels(m, i, j);
        CHECK(level <= lg.product_bound + 1e-12);
        if (lg.closed_form) CHECK(level <= *lg.closed_form + 1e-12);
        CHECK(level <= lg.bound + 1e-12);
      }
    }
  }
}

TEST_CASE("tensor chain reproduces exact eta") {
  Stream rng(14, 0);
  for (int t = 0; t < 25; ++t) {
    const int a = 2 + static_cast<int>(rng.below(2));
    const auto m = random_model(rng, 7, a, t % 4 == 0 ? 0.3 : 0.0);
    const ExactMixing exact(m);
    for (Node i = 1; i <= m.size(); ++i) {
      for (Node j = i + 1; j <= m.size(); ++j) {
        const auto all = exact.eta_all(i, j);
        for (int w = 0; w < a; ++w) {
          for (int w2 = 0; w2 < a; ++w2) {
            const auto tr = tensor_chain_trace(m, i, j, w, w2);
            if (!tr) {
              CHECK_FALSE(reduce_via_j0(m, i, j).j0.has_value());
              continue;
            }
            double prod = 1.0;
            for (double x : tr->level_alphas) prod *= x;
            CHECK(prod == Approx(eta_bar_bound_levels(m, i, j)).epsilon(1e-12));
            CHECK(tr->Bf_norm <= tr->f_norm + 1e-12);
            for (std::size_t y = 0; y * a * a < all.size(); ++y) {
              const double e = all[(y * a + w) * a + w2];
              if (!std::isnan(e)) CHECK(std::abs(tr->Bf_norm - e) <= 1e-12);
            }
          }
        }
      }
    }
  }
}
