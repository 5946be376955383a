#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "treemix/concentration.hpp"
#include "treemix/error.hpp"
#include "treemix/generate.hpp"
#include "treemix/rng.hpp"
#include "treemix/verify.hpp"

using namespace treemix;
using namespace treemix::test;
using doctest::Approx;

namespace {

MixingMatrix delta_of(int n, const std::vector<double>& upper) {
  return MixingMatrix::delta_from(n, Source::exact, upper);
}

// Upper-triangular Toeplitz Delta with Delta_ij = entry(j - i).
template <typename Fn>
MixingMatrix toeplitz(int n, Fn entry) {
  std::vector<double> u(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) u[i * n + j] = entry(j - i);
  }
  return delta_of(n, u);
}

}  // namespace

TEST_CASE("mixing matrices from each source") {
  const auto indep = uniform_kernel_model(4, {{1, 2}, {1, 3}, {3, 4}}, {0.5, 0.5}, constant_kernel(2));
  const auto p = build_mixing_matrices(indep, Source::exact);
  for (int i = 1; i <= 4; ++i) {
    for (int j = 1; j <= 4; ++j) {
      CHECK(p.delta.at(i, j) == Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
    }
  }
  CHECK(delta_inf_norm(p.delta) == Approx(1.0));

  const auto chain = uniform_kernel_model(6, chain_edges(6), {0.5, 0.5}, Rows{{0.75, 0.25}, {0.25, 0.75}});
  const auto lv = build_mixing_matrices(chain, Source::level_bound);
  for (int i = 1; i <= 6; ++i) {
    for (int j = i + 1; j <= 6; ++j) CHECK(lv.delta.at(i, j) == Approx(std::pow(0.5, j - i)));
  }
  CHECK(lv.delta.provenance() == Source::level_bound);
  CHECK(lv.gamma.kind() == MatrixKind::gamma);
  CHECK(delta_inf_norm(lv.delta) == Approx(1.96875).epsilon(1e-14));

  Stream rng(3, 0);
  GenOptions g;
  g.max_nodes = 7;
  const auto m = generate_model(g, rng);
  for (auto s : {Source::exact, Source::level_bound, Source::uniform_bound}) {
    const auto q = build_mixing_matrices(m, s);
    for (std::size_t k = 0; k < q.delta.dense().data.size(); ++k) {
      CHECK(q.gamma.dense().data[k] >= q.delta.dense().data[k]);
    }
  }
  const auto big = uniform_kernel_model(12, chain_edges(12), {0.5, 0.5}, kernel_07());
  CHECK_THROWS_AS(build_mixing_matrices(big, Source::exact, 100), EnumerationCapError);
  CHECK_NOTHROW(build_mixing_matrices(big, Source::level_bound, 100));
}

TEST_CASE("mixing matrix validation") {
  DenseMatrix lower(2, 2);
  lower(0, 0) = lower(1, 1) = 1.0;
  lower(1, 0) = 0.5;
  CHECK_THROWS_AS(MixingMatrix(MatrixKind::delta, Source::exact, lower), DomainError);
  DenseMatrix diag(2, 2);
  diag(0, 0) = 1.0;
  diag(1, 1) = 0.9;
  CHECK_THROWS_AS(MixingMatrix(MatrixKind::delta, Source::exact, diag), DomainError);
  CHECK_THROWS_AS(delta_of(2, {1, 1.5, 0, 1}), DomainError);
  CHECK_THROWS_AS(delta_of(2, {1, 0.5}), DomainError);
}

TEST_CASE("infinity norm") {
  CHECK(delta_inf_norm(delta_of(3, std::vector<double>(9, 0.0))) == 1.0);
  CHECK(delta_inf_norm(delta_of(2, {1, 0.5, 0, 1})) == 1.5);
  CHECK(delta_inf_norm(toeplitz(6, [](int k) { return std::pow(0.5, k); })) == 1.96875);
  CHECK(delta_inf_norm(delta_of(1, {1})) == 1.0);
  CHECK_THROWS_AS(delta_inf_norm(delta_of(2, {1, 0.5, 0, 1}).gamma()), DomainError);
  CHECK(suites::infnorm_identity(300, 5).passed);
}

TEST_CASE("spectral norm") {
  CHECK(gamma_l2_norm(delta_of(4, std::vector<double>(16, 0.0)).gamma()) == Approx(1.0));
  const auto G = delta_of(2, {1, 1, 0, 1}).gamma();
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(oracle::spectral_norm_2x2(1, 1, 0, 1) == Approx(golden).epsilon(1e-15));
  CHECK(std::abs(gamma_l2_norm(G) - golden) <= 1e-8);
  CHECK(gamma_l2_norm(G) == Approx(1.6180340).epsilon(1e-7));
  CHECK_THROWS_AS(gamma_l2_norm(delta_of(2, {1, 1, 0, 1})), DomainError);

  // Block-diagonal repetition keeps the norm.
  DenseMatrix block(4, 4);
  for (int b = 0; b < 2; ++b) {
    block(2 * b, 2 * b) = block(2 * b + 1, 2 * b + 1) = 1.0;
    block(2 * b, 2 * b + 1) = 1.0;
  }
  CHECK(spectral_norm(block) == Approx(golden).epsilon(1e-9));

  // Random 2x2 matrices against the characteristic-polynomial oracle.
  Stream rng(9, 0);
  for (int t = 0; t < 200; ++t) {
    const double b = rng.uniform();
    CHECK(gamma_l2_norm(delta_of(2, {1, b, 0, 1}).gamma()) ==
          Approx(oracle::spectral_norm_2x2(1, std::sqrt(b), 0, 1)).epsilon(1e-9));
  }
  CHECK(suites::spectral_bracket(300, 5).passed);
}

TEST_CASE("power iteration gives up with a convergence error") {
  // Nearly equal singular values, an unreachable tolerance and two steps.
  DenseMatrix A(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 0.999;
  A(0, 1) = 0.01;
  CHECK_THROWS_AS(spectral_norm(A, 1e-16, 2), ConvergenceError);
}

TEST_CASE("tail bound") {
  CHECK(tail_bound(10, 1.3, 0.0, Metric::hamming).tail_bound == 2.0);
  CHECK(tail_bound(10, 1.3, 0.0, Metric::euclidean).tail_bound == 2.0);
  const auto r = tail_bound(100, 2.0, 0.5, Metric::hamming);
  CHECK(r.tail_bound == Approx(2.0 * std::exp(-3.125)).epsilon(1e-15));
  CHECK(r.tail_bound == Approx(0.0878).epsilon(1e-3));
  CHECK_FALSE(r.requires_convexity);
  const auto e = tail_bound(100, 2.0, 0.5, Metric::euclidean);
  CHECK(e.tail_bound == Approx(2.0 * std::exp(-0.03125)));
  CHECK(e.requires_convexity);
  for (double t = 0.0; t < 1.0; t += 0.05) {
    CHECK(tail_bound(20, 1.5, t + 0.05, Metric::hamming).tail_bound <=
          tail_bound(20, 1.5, t, Metric::hamming).tail_bound);
    CHECK(tail_bound(20, 1.5, t, Metric::hamming).tail_bound <=
          tail_bound(20, 1.6, t, Metric::hamming).tail_bound);
  }
  CHECK_THROWS_AS(tail_bound(10, 1.0, -0.1, Metric::hamming), DomainError);
  CHECK_THROWS_AS(tail_bound(10, 0.5, 0.1, Metric::hamming), DomainError);
}

TEST_CASE("Hamming Lipschitz constant") {
  CHECK(hamming_lipschitz_constant(std::vector<double>(16, 3.0), 4, 2) == 0.0);
  CHECK(hamming_lipschitz_constant(functions::symbol_count(4, 3, 2), 4, 3) == Approx(1.0));
  CHECK_THROWS_AS(hamming_lipschitz_constant(std::vector<double>(15, 0.0), 4, 2), DomainError);

  Stream rng(4, 0);
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const int a = 2 + static_cast<int>(rng.below(2));
    std::vector<double> f(config_count(a, n));
    for (double& v : f) v = rng.uniform();
    CHECK(hamming_lipschitz_constant(f, n, a) ==
          Approx(oracle::lipschitz_all_pairs(f, n, a)).epsilon(1e-12));
    const auto g = functions::random_normalized(n, a, rng);
    CHECK(hamming_lipschitz_constant(g, n, a) == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("test-function corpus") {
  const auto s = functions::subcube_indicator(3, 2, std::vector<Node>{1, 3}, std::vector<int>{1, 0});
  CHECK(s[0b100] == Approx(1.0 / 3));
  CHECK(s[0b110] == Approx(1.0 / 3));
  CHECK(s[0b101] == 0.0);
  CHECK(hamming_lipschitz_constant(s, 3, 2) <= 1.0 + 1e-12);
  const auto e = functions::euclidean_norm(2);
  CHECK(e[3] == Approx(std::sqrt(2.0)));
  const auto sum = functions::scaled_sum(4);
  CHECK(sum[15] == Approx(2.0));
}

TEST_CASE("Monte Carlo deviation") {
  const auto coins = uniform_kernel_model(10, chain_edges(10), {0.5, 0.5}, constant_kernel(2));
  const auto f = functions::symbol_count(10, 2, 1);

  const auto flat = monte_carlo_deviation(coins, std::vector<double>(1024, 0.5), 0.1, 1000, 1);
  CHECK(flat.empirical == 0.0);

  const double exact = oracle::binomial_two_sided_tail(10, 0.25);
  CHECK(exact == Approx(112.0 / 1024.0).epsilon(1e-15));
  const auto est = monte_carlo_deviation(coins, f, 0.25, 100000, 2024, 2);
  CHECK(est.exact_mean);
  CHECK(est.mean == Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(est.empirical - exact) <= est.radius);
  const double vacuous = tail_bound(10, 1.0, 0.2, Metric::hamming).tail_bound;
  CHECK(vacuous == Approx(2.0 * std::exp(-0.2)).epsilon(1e-15));
  CHECK(vacuous == Approx(1.637).epsilon(1e-3));
  CHECK(est.empirical - est.radius <= vacuous);

  // Threads never change the estimate.
  const auto again = monte_carlo_deviation(coins, f, 0.25, 100000, 2024, 5);
  CHECK(again.empirical == est.empirical);

  std::vector<double> steep(1024, 0.0);
  steep[1] = 1.0;
  CHECK_THROWS_AS(monte_carlo_deviation(coins, steep, 0.1, 10, 1), DomainError);
  CHECK_THROWS_AS(monte_carlo_deviation(coins, f, 0.1, 0, 1), DomainError);
}

TEST_CASE("sampled mean above the enumeration cap") {
  const auto coins = uniform_kernel_model(10, chain_edges(10), {0.5, 0.5}, constant_kernel(2));
  const auto f = functions::symbol_count(10, 2, 1);
  const double ts[] = {0.25};
  const auto est = monte_carlo_deviation(coins, f, ts, 50000, 99, 2, /*cap=*/100);
  REQUIRE(est.size() == 1);
  CHECK_FALSE(est[0].exact_mean);
  CHECK(std::abs(est[0].mean - 0.5) < 0.01);
  CHECK(std::abs(est[0].empirical - 112.0 / 1024.0) <= est[0].radius + 0.01);
}

TEST_CASE("norm ordering across sources and order-of-magnitude bounds") {
  Stream rng(21, 0);
  for (int t = 0; t < 40; ++t) {
    GenOptions g;
    g.alphabet = 2;
    g.max_nodes = 8;
    g.depth = 1 + static_cast<int>(rng.below(5));
    g.width = 1 + static_cast<int>(rng.below(3));
    g.theta_max = 0.95;
    const auto m = generate_model(g, rng);
    const auto ex = build_mixing_matrices(m, Source::exact);
    const auto lv = build_mixing_matrices(m, Source::level_bound);
    const auto un = build_mixing_matrices(m, Source::uniform_bound);
    CHECK(delta_inf_norm(ex.delta) <= delta_inf_norm(lv.delta) + 1e-12);
    CHECK(delta_inf_norm(lv.delta) <= delta_inf_norm(un.delta) + 1e-12);
    CHECK(gamma_l2_norm(ex.gamma) <= gamma_l2_norm(lv.gamma) + 1e-9);
    CHECK(gamma_l2_norm(lv.gamma) <= gamma_l2_norm(un.gamma) + 1e-9);
  }

  for (int L = 1; L <= 4; ++L) {
    for (double theta : {0.1, 0.5, 0.8}) {
      const double rate = geometric_rate(theta, L);
      for (int n : {5, 20, 60}) {
        const auto geo = toeplitz(n, [&](int k) { return std::pow(rate, k); });
        CHECK(delta_inf_norm(geo) <= 1.0 / (1.0 - rate) + 1e-12);
        CHECK(gamma_l2_norm(geo.gamma()) <= 1.0 / (1.0 - std::sqrt(rate)) + 1e-9);

        const auto uni = toeplitz(n, [&](int k) { return eta_bar_bound_uniform(theta, L, 1, 1 + k); });
        CHECK(delta_inf_norm(uni) <= 1.0 / (1.0 - rate) + (L - 1) + 1e-12);
        CHECK(gamma_l2_norm(uni.gamma()) <= 1.0 / (1.0 - std::sqrt(rate)) + (L - 1) + 1e-9);
      }
    }
  }
}

TEST_CASE("tail bound holds empirically on small binary models") {
  VerifyOptions o;
  o.mc_samples = 20000;
  o.seed = 5;
  const auto r = suites::tail_bound_validity(8, o);
  INFO("max violation " << r.max_violation);
  CHECK(r.passed);
  CHECK(r.cases == 8u * 4u * 5u);
}

TEST_CASE("Euclidean branch sanity check on convex functions of binary models") {
  // Heuristic only: {0,1} sits inside [0,1] and both functions are convex
  // and 1-Lipschitz for the Euclidean metric.
  Stream rng(31, 0);
  const double ts[] = {0.1, 0.3, 0.5, 1.0};
  for (int t = 0; t < 10; ++t) {
    GenOptions g;
    g.alphabet = 2;
    g.max_nodes = 8;
    g.depth = 1 + static_cast<int>(rng.below(5));
    g.width = 1 + static_cast<int>(rng.below(3));
    const auto m = generate_model(g, rng);
    const int n = m.size();
    const double norm = gamma_l2_norm(build_mixing_matrices(m, Source::exact).gamma);
    const auto table = joint_table(m);
    const auto paths = sample_paths(m, 100 + t, 20000);
    for (const auto& f : {functions::euclidean_norm(n), functions::scaled_sum(n)}) {
      double mean = 0.0;
      for (std::uint64_t x = 0; x < table.size(); ++x) mean += table[x] * f[x];
      for (const auto& e : deviation_frequencies(paths, f, 2, mean, ts)) {
        const auto b = tail_bound(n, norm, e.t, Metric::euclidean);
        CHECK(b.requires_convexity);
        CHECK(e.empirical - e.radius <= b.tail_bound);
      }
    }
  }
}
