#include "treemix/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "treemix/error.hpp"

namespace treemix {

double linf_operator_norm(const DenseMatrix& A) {
  double best = 0.0;
  for (std::size_t r = 0; r < A.rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < A.cols; ++c) s += std::abs(A(r, c));
    best = std::max(best, s);
  }
  return best;
}

double l1_operator_norm(const DenseMatrix& A) {
  double best = 0.0;
  for (std::size_t c = 0; c < A.cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < A.rows; ++r) s += std::abs(A(r, c));
    best = std::max(best, s);
  }
  return best;
}

double spectral_norm(const DenseMatrix& A, double rel_tol, int max_iter) {
  if (A.rows == 0 || A.cols == 0) return 0.0;
  const std::size_t n = A.cols;
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> Av(A.rows);
  std::vector<double> w(n);
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t r = 0; r < A.rows; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) s += A(r, c) * v[c];
      Av[r] = s;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t r = 0; r < A.rows; ++r) {
      for (std::size_t c = 0; c < n; ++c) w[c] += A(r, c) * Av[r];
    }
    // Rayleigh quotient of A^T A at the unit vector v.
    double next = 0.0;
    double wn = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      next += v[c] * w[c];
      wn += w[c] * w[c];
    }
    wn = std::sqrt(wn);
    if (wn == 0.0) return 0.0;
    for (std::size_t c = 0; c < n; ++c) v[c] = w[c] / wn;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * next) return std::sqrt(next);
    lambda = next;
  }
  throw ConvergenceError("power iteration did not converge in " + std::to_string(max_iter) +
                         " iterations");
}

MixingMatrix::MixingMatrix(MatrixKind kind, Source provenance, DenseMatrix entries)
    : kind_(kind), provenance_(provenance), m_(std::move(entries)) {
  if (m_.rows != m_.cols) throw DomainError("mixing matrix must be square");
  for (std::size_t r = 0; r < m_.rows; ++r) {
    for (std::size_t c = 0; c < m_.cols; ++c) {
      const double v = m_(r, c);
      if (r == c && v != 1.0) throw DomainError("mixing matrix needs a unit diagonal");
      if (r > c && v != 0.0) throw DomainError("mixing matrix must be upper triangular");
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("mixing matrix entry outside [0,1]");
    }
  }
}

MixingMatrix MixingMatrix::delta_from(int n, Source provenance, const std::vector<double>& upper) {
  DenseMatrix d(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d(i, i) = 1.0;
  if (upper.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw DomainError("eta table must be n x n");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) d(i, j) = upper[static_cast<std::size_t>(i) * n + j];
  }
  return MixingMatrix(MatrixKind::delta, provenance, std::move(d));
}

MixingMatrix MixingMatrix::gamma() const {
  if (kind_ != MatrixKind::delta) throw DomainError("gamma() needs a Delta matrix");
  DenseMatrix g = m_;
  for (double& v : g.data) v = std::sqrt(v);
  return MixingMatrix(MatrixKind::gamma, provenance_, std::move(g));
}

MixingPair build_mixing_matrices(const MarkovTreeModel& m, Source source, std::uint64_t cap) {
  const int n = m.size();
  std::vector<double> upper(static_cast<std::size_t>(n) * n, 0.0);
  std::optional<ExactMixing> exact;
  if (source == Source::exact) exact.emplace(m, cap);
  for (Node i = 1; i <= n; ++i) {
    for (Node j = i + 1; j <= n; ++j) {
      double v = 0.0;
      switch (source) {
        case Source::exact:
          v = exact->eta_bar(i, j);
          break;
        case Source::level_bound:
          v = eta_bar_bound_levels(m, i, j);
          break;
        case Source::uniform_bound:
          v = model_uniform_bound(m, i, j);
          break;
      }
      upper[static_cast<std::size_t>(i - 1) * n + (j - 1)] = std::clamp(v, 0.0, 1.0);
    }
  }
  MixingMatrix delta = MixingMatrix::delta_from(n, source, upper);
  MixingMatrix gamma = delta.gamma();
  return {std::move(delta), std::move(gamma)};
}

double delta_inf_norm(const MixingMatrix& D) {
  if (D.kind() != MatrixKind::delta) throw DomainError("delta_inf_norm needs a Delta matrix");
  const int n = D.n();
  if (n == 1) return 1.0;
  double best = 0.0;
  for (Node i = 1; i < n; ++i) {
    double s = 1.0;
    for (Node j = i + 1; j <= n; ++j) s += D.at(i, j);
    best = std::max(best, s);
  }
  return best;
}

double gamma_l2_norm(const MixingMatrix& G, double rel_tol, int max_iter) {
  if (G.kind() != MatrixKind::gamma) throw DomainError("gamma_l2_norm needs a Gamma matrix");
  return spectral_norm(G.dense(), rel_tol, max_iter);
}

std::string_view to_string(Metric m) {
  return m == Metric::hamming ? "hamming" : "euclidean";
}

BoundReport tail_bound(int n, double norm_value, double t, Metric metric) {
  if (!(t >= 0.0)) throw DomainError("deviation level t must be non-negative");
  if (!(norm_value >= 1.0)) throw DomainError("mixing-matrix norm must be at least 1");
  if (n < 1) throw DomainError("n must be positive");
  BoundReport r;
  r.metric = metric;
  r.n = n;
  r.t = t;
  r.norm_value = norm_value;
  const double denom = 2.0 * norm_value * norm_value;
  if (metric == Metric::hamming) {
    r.tail_bound = 2.0 * std::exp(-static_cast<double>(n) * t * t / denom);
  } else {
    r.tail_bound = 2.0 * std::exp(-t * t / denom);
    r.requires_convexity = true;
  }
  return r;
}

double hamming_lipschitz_constant(std::span<const double> f, int n, int alphabet) {
  if (f.size() != config_count(alphabet, static_cast<std::size_t>(n))) {
    throw DomainError("function table size does not match |S|^n");
  }
  double best = 0.0;
  std::uint64_t stride = 1;
  for (int k = n; k-- > 0;) {
    // Pairs differing only at position k.
    const std::uint64_t block = stride * alphabet;
    for (std::uint64_t base = 0; base < f.size(); base += block) {
      for (std::uint64_t low = 0; low < stride; ++low) {
        for (int s = 0; s < alphabet; ++s) {
          const double fs = f[base + low + s * stride];
          for (int s2 = s + 1; s2 < alphabet; ++s2) {
            best = std::max(best, std::abs(fs - f[base + low + s2 * stride]));
          }
        }
      }
    }
    stride = block;
  }
  return static_cast<double>(n) * best;
}

std::uint64_t config_index(std::span<const int> x, int alphabet) {
  std::uint64_t idx = 0;
  for (int s : x) idx = idx * alphabet + static_cast<std::uint64_t>(s);
  return idx;
}

std::vector<DeviationEstimate> deviation_frequencies(const SampleSet& paths,
                                                     std::span<const double> f, int alphabet,
                                                     double mean, std::span<const double> ts) {
  std::vector<std::size_t> hits(ts.size(), 0);
  for (std::size_t k = 0; k < paths.count; ++k) {
    const double dev = std::abs(f[config_index(paths.path(k), alphabet)] - mean);
    for (std::size_t q = 0; q < ts.size(); ++q) {
      if (dev > ts[q]) ++hits[q];
    }
  }
  std::vector<DeviationEstimate> out;
  const double N = static_cast<double>(paths.count);
  for (std::size_t q = 0; q < ts.size(); ++q) {
    DeviationEstimate e;
    e.t = ts[q];
    e.mean = mean;
    e.empirical = static_cast<double>(hits[q]) / N;
    e.radius = 3.0 * std::sqrt(e.empirical * (1.0 - e.empirical) / N);
    out.push_back(e);
  }
  return out;
}

std::vector<DeviationEstimate> monte_carlo_deviation(const MarkovTreeModel& m,
                                                     std::span<const double> f,
                                                     std::span<const double> ts,
                                                     std::size_t samples, std::uint64_t seed,
                                                     int threads, std::uint64_t cap) {
  if (samples < 1) throw DomainError("sample count must be positive");
  for (double t : ts) {
    if (!(t > 0.0)) throw DomainError("deviation level t must be positive");
  }
  const int n = m.size();
  const int a = m.alphabet();
  const double lip = hamming_lipschitz_constant(f, n, a);
  if (lip > 1.0 + 1e-9) {
    throw DomainError("test function is not 1-Lipschitz (constant " + std::to_string(lip) + ")");
  }

  double mean = 0.0;
  bool exact_mean = false;
  if (config_count(a, static_cast<std::size_t>(n)) <= cap) {
    const JointTable table = joint_table(m, cap);
    for (std::uint64_t x = 0; x < table.size(); ++x) mean += table[x] * f[x];
    exact_mean = true;
  } else {
    const SampleSet pre = sample_paths(m, seed, samples, threads, /*domain=*/1);
    for (std::size_t k = 0; k < pre.count; ++k) mean += f[config_index(pre.path(k), a)];
    mean /= static_cast<double>(pre.count);
  }

  const SampleSet paths = sample_paths(m, seed, samples, threads, /*domain=*/0);
  auto out = deviation_frequencies(paths, f, a, mean, ts);
  for (auto& e : out) e.exact_mean = exact_mean;
  return out;
}

DeviationEstimate monte_carlo_deviation(const MarkovTreeModel& m, std::span<const double> f,
                                        double t, std::size_t samples, std::uint64_t seed,
                                        int threads) {
  const double ts[] = {t};
  return monte_carlo_deviation(m, f, ts, samples, seed, threads).front();
}

namespace functions {

namespace {

template <typename Fn>
std::vector<double> tabulate(int n, int alphabet, Fn&& fn) {
  const auto total = config_count(alphabet, static_cast<std::size_t>(n));
  std::vector<double> out(total);
  std::vector<int> x(static_cast<std::size_t>(n), 0);
  for (std::uint64_t k = 0; k < total; ++k) {
    out[k] = fn(x);
    for (std::size_t p = x.size(); p-- > 0;) {
      if (++x[p] < alphabet) break;
      x[p] = 0;
    }
  }
  return out;
}

}  // namespace

std::vector<double> symbol_count(int n, int alphabet, int symbol) {
  return tabulate(n, alphabet, [&](const std::vector<int>& x) {
    return static_cast<double>(std::count(x.begin(), x.end(), symbol)) / n;
  });
}

std::vector<double> subcube_indicator(int n, int alphabet, std::span<const Node> coords,
                                      std::span<const int> pattern) {
  if (coords.size() != pattern.size()) throw DomainError("subcube pattern length mismatch");
  return tabulate(n, alphabet, [&](const std::vector<int>& x) {
    for (std::size_t k = 0; k < coords.size(); ++k) {
      if (x[coords[k] - 1] != pattern[k]) return 0.0;
    }
    return 1.0 / n;
  });
}

std::vector<double> random_normalized(int n, int alphabet, Stream& rng) {
  auto f = tabulate(n, alphabet, [&](const std::vector<int>&) { return rng.uniform(); });
  const double lip = hamming_lipschitz_constant(f, n, alphabet);
  if (lip > 0.0) {
    for (double& v : f) v /= lip;
  }
  return f;
}

std::vector<double> euclidean_norm(int n) {
  return tabulate(n, 2, [](const std::vector<int>& x) {
    return std::sqrt(static_cast<double>(std::count(x.begin(), x.end(), 1)));
  });
}

std::vector<double> scaled_sum(int n) {
  return tabulate(n, 2, [n](const std::vector<int>& x) {
    return static_cast<double>(std::count(x.begin(), x.end(), 1)) / std::sqrt(double(n));
  });
}

}  // namespace functions

}  // namespace treemix
