#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "treemix/mixing.hpp"
#include "treemix/rng.hpp"

namespace treemix {

/// Dense row-major matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Max absolute row sum.
double linf_operator_norm(const DenseMatrix& A);
/// Max absolute column sum.
double l1_operator_norm(const DenseMatrix& A);

/// Largest singular value by power iteration on A^T A from the all-ones
/// start vector. Throws ConvergenceError after max_iter iterations.
double spectral_norm(const DenseMatrix& A, double rel_tol = 1e-10, int max_iter = 100000);

enum class MatrixKind { delta, gamma };

/// Upper-triangular unit-diagonal n x n matrix of eta-bar values (Delta) or
/// their square roots (Gamma).
class MixingMatrix {
 public:
  MixingMatrix(MatrixKind kind, Source provenance, DenseMatrix entries);

  /// Delta with Delta_ij = eta(i, j) for 1 <= i < j <= n.
  static MixingMatrix delta_from(int n, Source provenance, const std::vector<double>& upper);

  int n() const { return static_cast<int>(m_.rows); }
  MatrixKind kind() const { return kind_; }
  Source provenance() const { return provenance_; }
  const DenseMatrix& dense() const { return m_; }
  /// 1-based access.
  double at(Node i, Node j) const { return m_(i - 1, j - 1); }

  /// Gamma of the same provenance: entrywise square roots.
  MixingMatrix gamma() const;

 private:
  MatrixKind kind_;
  Source provenance_;
  DenseMatrix m_;
};

struct MixingPair {
  MixingMatrix delta;
  MixingMatrix gamma;
};

/// Fills Delta from the chosen eta-bar source for every i < j and derives
/// Gamma. The exact source enumerates S^n and honors `cap`.
MixingPair build_mixing_matrices(const MarkovTreeModel& m, Source source,
                                 std::uint64_t cap = enumeration_cap());

/// max_{i<n} (1 + sum_{j>i} Delta_ij).
double delta_inf_norm(const MixingMatrix& D);

/// Largest singular value of Gamma.
double gamma_l2_norm(const MixingMatrix& G, double rel_tol = 1e-10, int max_iter = 100000);

enum class Metric { hamming, euclidean };
std::string_view to_string(Metric m);

struct BoundReport {
  Metric metric = Metric::hamming;
  int n = 0;
  double t = 0.0;
  double norm_value = 1.0;
  double tail_bound = 2.0;
  /// The Euclidean inequality is only stated for convex f on [0,1]^n.
  bool requires_convexity = false;
};

/// Hamming: 2 exp(-n t^2 / (2 norm^2)) with norm = ||Delta||_inf.
/// Euclidean: 2 exp(-t^2 / (2 norm^2)) with norm = ||Gamma||_2.
BoundReport tail_bound(int n, double norm_value, double t, Metric metric);

/// max over configurations differing in one coordinate of n |f(x) - f(y)|:
/// the Lipschitz constant of f under the normalized Hamming metric.
double hamming_lipschitz_constant(std::span<const double> f, int n, int alphabet);

struct DeviationEstimate {
  double t = 0.0;
  /// Fraction of samples with |f(X) - Ef| > t.
  double empirical = 0.0;
  double mean = 0.0;
  /// 3 sigma binomial radius, 3 sqrt(p (1 - p) / N).
  double radius = 0.0;
  bool exact_mean = true;
};

/// Empirical check of P(|f(X) - Ef| > t) for every t, sharing one sample
/// batch. Ef is exact when |S|^n <= cap, otherwise estimated from an
/// independent batch of the same size. f must be 1-Lipschitz (normalized
/// Hamming) within 1e-9.
std::vector<DeviationEstimate> monte_carlo_deviation(const MarkovTreeModel& m,
                                                     std::span<const double> f,
                                                     std::span<const double> ts,
                                                     std::size_t samples, std::uint64_t seed,
                                                     int threads = 1,
                                                     std::uint64_t cap = enumeration_cap());

DeviationEstimate monte_carlo_deviation(const MarkovTreeModel& m, std::span<const double> f,
                                        double t, std::size_t samples, std::uint64_t seed,
                                        int threads = 1);

/// Deviation probabilities for an explicit sample set and mean; no
/// Lipschitz check. Used for the Euclidean sanity checks.
std::vector<DeviationEstimate> deviation_frequencies(const SampleSet& paths,
                                                     std::span<const double> f, int alphabet,
                                                     double mean, std::span<const double> ts);

/// Flat index of a configuration (node 1 most significant).
std::uint64_t config_index(std::span<const int> x, int alphabet);

/// Test-function corpus: tables over S^n with unit Hamming Lipschitz constant.
namespace functions {

/// (1/n) #{k : x_k = symbol}.
std::vector<double> symbol_count(int n, int alphabet, int symbol);

/// (1/n) 1{x_k = pattern[k] for every k in coords}; coords 1-based.
std::vector<double> subcube_indicator(int n, int alphabet, std::span<const Node> coords,
                                      std::span<const int> pattern);

/// Uniform random table divided by its Hamming Lipschitz constant.
std::vector<double> random_normalized(int n, int alphabet, Stream& rng);

/// Convex 1-Lipschitz (Euclidean) functions on {0,1}^n embedded in [0,1]^n.
std::vector<double> euclidean_norm(int n);
std::vector<double> scaled_sum(int n);

}  // namespace functions

}  // namespace treemix
