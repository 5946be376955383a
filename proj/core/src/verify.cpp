#include "treemix/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "treemix/concentration.hpp"
#include "treemix/error.hpp"
#include "treemix/generate.hpp"
#include "treemix/mixing.hpp"
#include "treemix/rng.hpp"

namespace treemix {

namespace {

// Stream domains, one per suite, so suites stay independent of each other.
enum Domain : std::uint64_t {
  kTvIneq = 101,
  kTensorAlpha,
  kContraction,
  kOperatorTensor,
  kOrdering,
  kJ0,
  kChain,
  kInfNorm,
  kSpectral,
  kTailModels,
  kTailFunctions,
};

class Suite {
 public:
  Suite(std::string name, double tol) {
    r_.name = std::move(name);
    r_.tolerance = tol;
  }

  /// Records lhs <= rhs.
  void at_most(double lhs, double rhs) { record(std::max(0.0, lhs - rhs)); }
  /// Records lhs == rhs.
  void equal(double lhs, double rhs) { record(std::abs(lhs - rhs)); }
  void holds(bool ok) { record(ok ? 0.0 : std::numeric_limits<double>::infinity()); }
  void note(std::string text) { r_.note = std::move(text); }
  std::size_t cases() const { return r_.cases; }

  SuiteResult finish() {
    r_.passed = r_.max_violation <= r_.tolerance;
    return r_;
  }

 private:
  void record(double violation) {
    ++r_.cases;
    if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
    r_.max_violation = std::max(r_.max_violation, violation);
  }

  SuiteResult r_;
};

SuiteResult skipped(std::string name, std::string why) {
  SuiteResult r;
  r.name = std::move(name);
  r.note = "skipped: " + why;
  return r;
}

std::vector<int> decode(std::uint64_t x, int len, int base) {
  std::vector<int> out(static_cast<std::size_t>(len));
  for (int k = len; k-- > 0;) {
    out[k] = static_cast<int>(x % base);
    x /= base;
  }
  return out;
}

// Small random model: n <= 8, |S| in {2, 3} unless fixed.
MarkovTreeModel small_model(Stream& rng, std::size_t t, int alphabet = 0) {
  GenOptions g;
  g.alphabet = alphabet > 0 ? alphabet : 2 + static_cast<int>(rng.below(2));
  g.depth = 1 + static_cast<int>(rng.below(5));
  g.width = 1 + static_cast<int>(rng.below(4));
  g.max_nodes = 8;
  g.theta_max = 0.99 * rng.uniform();
  // Every fifth model has some zero entries so null prefixes get exercised.
  g.zero_fraction = t % 5 == 0 ? 0.3 : 0.0;
  return generate_model(g, rng);
}

void check_ordering(Suite& s, const MarkovTreeModel& m, const ExactMixing& exact) {
  for (Node i = 1; i <= m.size(); ++i) {
    for (Node j = i + 1; j <= m.size(); ++j) {
      const double ex = exact.eta_bar(i, j);
      const double lv = eta_bar_bound_levels(m, i, j);
      s.at_most(ex, lv);
      s.at_most(lv, model_uniform_bound(m, i, j));
    }
  }
}

void check_j0(Suite& s, const MarkovTreeModel& m, const ExactMixing& exact) {
  for (Node i = 1; i <= m.size(); ++i) {
    for (Node j = i + 1; j <= m.size(); ++j) {
      const auto red = reduce_via_j0(m, i, j);
      const auto lhs = exact.eta_all(i, j);
      if (red.vanishes()) {
        for (double v : lhs) {
          if (!std::isnan(v)) s.equal(v, 0.0);
        }
        s.equal(exact.eta_bar(i, j), 0.0);
        continue;
      }
      const auto rhs = exact.eta_all(i, *red.j0);
      for (std::size_t k = 0; k < lhs.size(); ++k) {
        if (std::isnan(lhs[k]) != std::isnan(rhs[k])) {
          s.holds(false);
        } else if (!std::isnan(lhs[k])) {
          s.equal(lhs[k], rhs[k]);
        }
      }
    }
  }
}

// Test-function corpus for one model: symbol counts, a subcube indicator
// and a random table normalized by its Lipschitz constant.
std::vector<std::vector<double>> function_corpus(int n, int a, Stream& rng) {
  std::vector<std::vector<double>> corpus;
  for (int sym = 0; sym < a; ++sym) corpus.push_back(functions::symbol_count(n, a, sym));
  std::vector<Node> coords{1};
  std::vector<int> pattern{static_cast<int>(rng.below(static_cast<std::uint64_t>(a)))};
  if (n >= 2) {
    coords.push_back(n);
    pattern.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(a))));
  }
  corpus.push_back(functions::subcube_indicator(n, a, coords, pattern));
  corpus.push_back(functions::random_normalized(n, a, rng));
  return corpus;
}

void check_tail(Suite& s, const MarkovTreeModel& m, const VerifyOptions& opts, Stream& rng,
                std::uint64_t seed) {
  const int n = m.size();
  const double norm = delta_inf_norm(build_mixing_matrices(m, Source::exact, opts.cap).delta);
  const auto corpus = function_corpus(n, m.alphabet(), rng);
  for (std::size_t f = 0; f < corpus.size(); ++f) {
    const auto est = monte_carlo_deviation(m, corpus[f], opts.t_grid, opts.mc_samples,
                                           mix64(seed + f), opts.threads, opts.cap);
    for (const auto& e : est) {
      s.at_most(e.empirical - e.radius, tail_bound(n, norm, e.t, Metric::hamming).tail_bound);
    }
  }
}

}  // namespace

namespace suites {

SuiteResult tv_tensor_inequality(std::size_t trials, std::uint64_t seed) {
  Suite s("tv_tensor_inequality", 1e-12);
  Stream rng(seed, 0, kTvIneq);
  for (std::size_t t = 0; t < trials; ++t) {
    const int nx = 1 + static_cast<int>(rng.below(5));
    const int ny = 1 + static_cast<int>(rng.below(5));
    // One alphabet per tensor: pad the smaller set with null states.
    const int k = std::max(nx, ny);
    auto draw = [&](int size) {
      auto v = random_distribution(size, rng);
      v.resize(static_cast<std::size_t>(k), 0.0);
      return v;
    };
    const IndexedTensor p({1}, k, draw(nx));
    const IndexedTensor p2({1}, k, draw(nx));
    const IndexedTensor q({2}, k, draw(ny));
    const IndexedTensor q2({2}, k, draw(ny));
    const IndexedTensor lhs[] = {p, q};
    const IndexedTensor rhs[] = {p2, q2};
    const double a = tv_distance(p, p2);
    const double b = tv_distance(q, q2);
    s.at_most(tv_distance(tensor_product(lhs), tensor_product(rhs)), a + b - a * b);
  }
  return s.finish();
}

SuiteResult tensor_alpha_bound(std::size_t trials, std::uint64_t seed) {
  Suite s("tensor_alpha_bound", 1e-12);
  Stream rng(seed, 0, kTensorAlpha);
  for (std::size_t t = 0; t < trials; ++t) {
    const int factors = 1 + static_cast<int>(rng.below(4));
    const int k = 2 + static_cast<int>(rng.below(2));
    std::vector<IndexedTensor> us;
    std::vector<IndexedTensor> vs;
    std::vector<double> dists;
    for (int f = 0; f < factors; ++f) {
      us.emplace_back(std::vector<Node>{f + 1}, k, random_distribution(k, rng));
      vs.emplace_back(std::vector<Node>{f + 1}, k, random_distribution(k, rng));
      dists.push_back(tv_distance(us.back(), vs.back()));
    }
    s.at_most(tv_distance(tensor_product(us), tensor_product(vs)), alpha(dists));
  }
  return s.finish();
}

SuiteResult markov_contraction(std::size_t trials, std::uint64_t seed) {
  Suite s("markov_contraction", 1e-12);
  Stream rng(seed, 0, kContraction);
  for (std::size_t t = 0; t < trials; ++t) {
    const int k = 2 + static_cast<int>(rng.below(4));
    const auto A = StochasticOperator::square(1, 2, k, random_kernel(k, 1.0, rng, 0.2));
    const auto B = StochasticOperator::square(2, 3, k, random_kernel(k, 1.0, rng, 0.2));
    std::vector<double> u(static_cast<std::size_t>(k));
    double mean = 0.0;
    for (double& v : u) mean += (v = rng.uniform() * 2.0 - 1.0);
    mean /= k;
    for (double& v : u) v -= mean;
    const IndexedTensor ut({1}, k, u);
    const double normA = operator_tv_norm(A);
    s.at_most(apply_operator(A, ut).tv_norm(), normA * ut.tv_norm());
    s.at_most(normA, 1.0);
    s.at_most(operator_tv_norm(compose(B, A)), operator_tv_norm(B) * normA);
  }
  return s.finish();
}

SuiteResult operator_tensor_bound(std::size_t trials, std::uint64_t seed) {
  Suite s("operator_tensor_bound", 1e-12);
  Stream rng(seed, 0, kOperatorTensor);
  for (std::size_t t = 0; t < trials; ++t) {
    const int k = 2 + static_cast<int>(rng.below(2));
    const int parents = 1 + static_cast<int>(rng.below(2));
    const int kids = 1 + static_cast<int>(rng.below(3));
    std::vector<Node> in;
    std::vector<Node> outs;
    for (int p = 0; p < parents; ++p) in.push_back(1 + p);
    for (int c = 0; c < kids; ++c) outs.push_back(1 + parents + c);
    std::vector<StochasticOperator> mats;
    std::vector<double> norms;
    for (int c = 0; c < kids; ++c) {
      mats.push_back(StochasticOperator::square(0, 0, k, random_kernel(k, 1.0, rng, 0.2)));
      norms.push_back(operator_tv_norm(mats.back()));
    }
    std::vector<EdgeFactor> factors;
    for (int c = 0; c < kids; ++c) {
      factors.push_back({in[rng.below(in.size())], outs[c], &mats[c]});
    }
    s.at_most(operator_tv_norm(operator_tensor_product(in, outs, factors)), alpha(norms));
  }
  return s.finish();
}

SuiteResult alpha_properties() {
  Suite s("alpha_properties", 1e-12);
  std::vector<double> grid;
  for (int g = 0; g <= 10; ++g) grid.push_back(g / 10.0);
  for (int k = 1; k <= 4; ++k) {
    const auto total = config_count(11, static_cast<std::size_t>(k));
    for (std::uint64_t x = 0; x < total; ++x) {
      const auto idx = decode(x, k, 11);
      std::vector<double> v;
      for (int d : idx) v.push_back(grid[d]);
      const double a0 = alpha(v);

      std::vector<double> perm = v;
      std::sort(perm.begin(), perm.end());
      do {
        s.equal(alpha(perm), a0);
      } while (std::next_permutation(perm.begin(), perm.end()));

      s.holds(a0 >= 0.0 && a0 <= 1.0);

      for (std::size_t p = 0; p < v.size(); ++p) {
        if (idx[p] < 10) {
          auto up = v;
          up[p] = grid[idx[p] + 1];
          s.at_most(a0, alpha(up));
        }
      }

      if (k < 4) {
        for (double extra : grid) {
          auto bigger = v;
          bigger.push_back(extra);
          s.at_most(a0, alpha(bigger));
        }
      }

      if (std::find(v.begin(), v.end(), 1.0) != v.end()) s.equal(a0, 1.0);

      double sum = 0.0;
      for (double e : v) sum += e;
      s.at_most(a0, sum);
    }
    for (double g : grid) {
      const std::vector<double> same(static_cast<std::size_t>(k), g);
      s.equal(alpha(same), 1.0 - std::pow(1.0 - g, k));
    }
  }
  return s.finish();
}

SuiteResult bound_ordering(std::size_t models, std::uint64_t seed, std::uint64_t cap) {
  Suite s("bound_ordering", 1e-12);
  Stream rng(seed, 0, kOrdering);
  for (std::size_t t = 0; t < models; ++t) {
    const auto m = small_model(rng, t);
    check_ordering(s, m, ExactMixing(m, cap));
  }
  return s.finish();
}

SuiteResult j0_reduction(std::size_t models, std::uint64_t seed, std::uint64_t cap) {
  Suite s("j0_reduction", 1e-12);
  Stream rng(seed, 0, kJ0);
  for (std::size_t t = 0; t < models; ++t) {
    const auto m = small_model(rng, t);
    check_j0(s, m, ExactMixing(m, cap));
  }
  return s.finish();
}

SuiteResult chain_reduction(std::size_t chains, std::uint64_t seed) {
  Suite s("chain_reduction", 1e-15);
  Stream rng(seed, 0, kChain);
  for (std::size_t t = 0; t < chains; ++t) {
    const int n = 2 + static_cast<int>(rng.below(11));
    const int a = 2 + static_cast<int>(rng.below(2));
    const auto m = generate_chain(n, a, 0.99, rng);
    for (Node i = 1; i <= n; ++i) {
      double prod = 1.0;
      for (Node j = i + 1; j <= n; ++j) {
        prod *= contraction_coefficient(m, {j - 1, j});
        s.equal(eta_bar_bound_levels(m, i, j), prod);
      }
    }
    // L = 1 has to be bit-exact, hence holds() rather than a tolerance.
    const double theta = max_contraction(m);
    for (Node i = 1; i <= n; ++i) {
      for (Node j = i + 1; j <= n; ++j) {
        s.holds(eta_bar_bound_uniform(theta, 1, i, j) == std::pow(theta, j - i));
      }
    }
  }
  return s.finish();
}

SuiteResult infnorm_identity(std::size_t matrices, std::uint64_t seed) {
  Suite s("infnorm_identity", 0.0);
  Stream rng(seed, 0, kInfNorm);
  for (std::size_t t = 0; t < matrices; ++t) {
    const int n = 1 + static_cast<int>(rng.below(12));
    std::vector<double> upper(static_cast<std::size_t>(n) * n);
    for (double& v : upper) v = rng.uniform();
    const auto D = MixingMatrix::delta_from(n, Source::exact, upper);
    s.equal(delta_inf_norm(D), linf_operator_norm(D.dense()));
  }
  return s.finish();
}

SuiteResult spectral_bracket(std::size_t matrices, std::uint64_t seed) {
  Suite s("spectral_bracket", 1e-9);
  Stream rng(seed, 0, kSpectral);
  for (std::size_t t = 0; t < matrices; ++t) {
    const int n = 1 + static_cast<int>(rng.below(12));
    std::vector<double> upper(static_cast<std::size_t>(n) * n);
    for (double& v : upper) v = rng.uniform();
    const auto G = MixingMatrix::delta_from(n, Source::exact, upper).gamma();
    const double norm = gamma_l2_norm(G);
    s.at_most(1.0, norm);
    s.at_most(norm, std::sqrt(l1_operator_norm(G.dense()) * linf_operator_norm(G.dense())));
  }
  return s.finish();
}

SuiteResult geometric_rate_dominance() {
  Suite s("geometric_rate_dominance", 1e-12);
  for (int L = 1; L <= 8; ++L) {
    for (int th = 1; th <= 9; ++th) {
      const double theta = th / 10.0;
      const double rate = geometric_rate(theta, L);
      for (int k = L; k <= 64; ++k) {
        s.at_most(eta_bar_bound_uniform(theta, L, 1, 1 + k), std::pow(rate, k));
      }
    }
  }
  for (long L = 1; L <= 200; ++L) {
    for (long k = L; k <= 200; ++k) s.holds(floor_ratio_dominates(k, L));
  }
  return s.finish();
}

SuiteResult tail_bound_validity(std::size_t models, const VerifyOptions& opts) {
  Suite s("tail_bound_validity", 0.0);
  Stream rng(opts.seed, 0, kTailModels);
  Stream fn_rng(opts.seed, 0, kTailFunctions);
  for (std::size_t t = 0; t < models; ++t) {
    const auto m = small_model(rng, t, 2);
    check_tail(s, m, opts, fn_rng, mix64(opts.seed ^ (t + 1)));
  }
  return s.finish();
}

}  // namespace suites

std::vector<SuiteResult> verify_model(const MarkovTreeModel& m, const VerifyOptions& opts) {
  std::vector<SuiteResult> out;
  const int n = m.size();
  const int a = m.alphabet();
  const bool enumerable = config_count(a, static_cast<std::size_t>(n)) <= opts.cap;

  {
    Suite s("contraction_range", 0.0);
    for (const Edge& e : m.tree().edges()) {
      const double th = contraction_coefficient(m, e);
      s.holds(th >= 0.0 && th <= 1.0);
    }
    out.push_back(s.finish());
  }

  {
    Suite s("norm_provenance", 1e-9);
    const auto level = build_mixing_matrices(m, Source::level_bound, opts.cap);
    const auto uniform = build_mixing_matrices(m, Source::uniform_bound, opts.cap);
    s.at_most(delta_inf_norm(level.delta), delta_inf_norm(uniform.delta));
    s.at_most(gamma_l2_norm(level.gamma), gamma_l2_norm(uniform.gamma));
    if (enumerable) {
      const auto exact = build_mixing_matrices(m, Source::exact, opts.cap);
      s.at_most(delta_inf_norm(exact.delta), delta_inf_norm(level.delta));
      s.at_most(gamma_l2_norm(exact.gamma), gamma_l2_norm(level.gamma));
    }
    out.push_back(s.finish());
  }

  if (!enumerable) {
    for (const char* name : {"joint_normalization", "markov_property", "j0_reduction",
                             "bound_ordering", "tensor_chain", "tail_bound_validity"}) {
      out.push_back(skipped(name, "|S|^n exceeds the enumeration cap"));
    }
    return out;
  }

  const ExactMixing exact(m, opts.cap);

  {
    Suite s("joint_normalization", 1e-10);
    double total = 0.0;
    for (double p : exact.table().probs()) total += p;
    s.equal(total, 1.0);
    out.push_back(s.finish());
  }

  {
    Suite s("markov_property", 1e-12);
    for (Node u = 1; u <= n; ++u) {
      if (m.tree().children(u).size() < 2) continue;
      s.at_most(markov_violation(exact.table(), m.tree(), u).max_violation, 0.0);
    }
    if (s.cases() == 0) s.note("no node has two children");
    out.push_back(s.finish());
  }

  {
    Suite s("j0_reduction", 1e-12);
    check_j0(s, m, exact);
    out.push_back(s.finish());
  }

  {
    Suite s("bound_ordering", 1e-12);
    check_ordering(s, m, exact);
    out.push_back(s.finish());
  }

  {
    // ||Bf|| reproduces eta_ij(y, w, w') for every feasible y, and
    // ||Bf|| <= ||B|| ||f|| <= ||f|| <= ||h|| prod ||A^(d)|| <= prod alpha.
    Suite s("tensor_chain", 1e-12);
    const auto a2 = static_cast<std::size_t>(a) * a;
    for (Node i = 1; i <= n; ++i) {
      for (Node j = i + 1; j <= n; ++j) {
        const auto etas = exact.eta_all(i, j);
        for (int w = 0; w < a; ++w) {
          for (int w2 = w + 1; w2 < a; ++w2) {
            const auto tr = tensor_chain_trace(m, i, j, w, w2);
            if (!tr) continue;
            for (std::size_t y = 0; y * a2 < etas.size(); ++y) {
              const double e = etas[y * a2 + static_cast<std::size_t>(w * a + w2)];
              if (!std::isnan(e)) s.equal(tr->Bf_norm, e);
            }
            double chain = tr->h_norm;
            double alphas = 1.0;
            for (std::size_t k = 0; k < tr->level_norms.size(); ++k) {
              if (k > 0) chain *= tr->level_norms[k];
              alphas *= tr->level_alphas[k];
              s.at_most(tr->level_norms[k], tr->level_alphas[k]);
            }
            s.at_most(tr->h_norm, tr->level_norms.front());
            s.at_most(tr->Bf_norm, tr->B_norm * tr->f_norm);
            s.at_most(tr->B_norm, 1.0);
            s.at_most(tr->f_norm, chain);
            s.at_most(chain, alphas);
          }
        }
      }
    }
    out.push_back(s.finish());
  }

  {
    Suite s("tail_bound_validity", 0.0);
    Stream rng(opts.seed, 0, kTailFunctions);
    check_tail(s, m, opts, rng, opts.seed);
    out.push_back(s.finish());
  }
  return out;
}

std::vector<SuiteResult> verify_random(const VerifyOptions& opts) {
  const std::size_t n = std::max<std::size_t>(opts.trials, 1);
  const std::uint64_t seed = opts.seed;
  std::vector<SuiteResult> out;
  out.push_back(suites::tv_tensor_inequality(n, seed));
  out.push_back(suites::tensor_alpha_bound(n, seed));
  out.push_back(suites::markov_contraction(n, seed));
  out.push_back(suites::operator_tensor_bound(n, seed));
  out.push_back(suites::alpha_properties());
  out.push_back(suites::bound_ordering(n, seed, opts.cap));
  out.push_back(suites::j0_reduction(n, seed, opts.cap));
  out.push_back(suites::chain_reduction(n, seed));
  out.push_back(suites::infnorm_identity(n, seed));
  out.push_back(suites::spectral_bracket(n, seed));
  out.push_back(suites::geometric_rate_dominance());
  return out;
}

}  // namespace treemix
