#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treemix/model.hpp"

namespace treemix {

/// Outcome of one property suite. max_violation is the largest amount by
/// which any case broke its inequality (or the largest deviation for an
/// equality); the suite passes when it stays within tolerance.
struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::string note;
};

struct VerifyOptions {
  std::size_t trials = 500;
  std::uint64_t seed = 42;
  int threads = 1;
  std::uint64_t cap = enumeration_cap();
  /// Sample count for tail-bound suites.
  std::size_t mc_samples = 20000;
  /// Deviation levels for tail-bound suites.
  std::vector<double> t_grid{0.05, 0.1, 0.2, 0.3, 0.5};
};

/// Suites that inspect one model: normalization, Markov property, subtree
/// reduction, bound ordering, the tensor-chain factorization, norm ordering
/// across sources and tail-bound validity. Enumeration-based suites are
/// skipped (with a note) above cap.
std::vector<SuiteResult> verify_model(const MarkovTreeModel& m, const VerifyOptions& opts);

/// Every randomized suite below, each run with opts.trials instances.
std::vector<SuiteResult> verify_random(const VerifyOptions& opts);

namespace suites {

/// ||p(x)q - p'(x)q'|| <= a + b - ab over random distributions, |X|,|Y| <= 5.
SuiteResult tv_tensor_inequality(std::size_t trials, std::uint64_t seed);
/// ||(x)u_i - (x)v_i|| <= alpha{||u_i - v_i||} for up to 4 factors.
SuiteResult tensor_alpha_bound(std::size_t trials, std::uint64_t seed);
/// ||Au|| <= ||A|| ||u||, ||A|| <= 1 and ||AB|| <= ||A|| ||B||.
SuiteResult markov_contraction(std::size_t trials, std::uint64_t seed);
/// ||(x)A^(uv)|| <= alpha{||A^(uv)||} over random bipartite edge sets.
SuiteResult operator_tensor_bound(std::size_t trials, std::uint64_t seed);
/// Symmetry, range, monotonicity, inclusion, equal-argument and sum
/// properties of alpha, exhaustively on the 0.1 grid for k <= 4.
SuiteResult alpha_properties();
/// exact <= level bound <= uniform bound on random models, n <= 8, |S| <= 3.
SuiteResult bound_ordering(std::size_t models, std::uint64_t seed, std::uint64_t cap);
/// eta_ij = eta_ij0 pointwise, and eta-bar_ij = 0 without j0, on random models.
SuiteResult j0_reduction(std::size_t models, std::uint64_t seed, std::uint64_t cap);
/// Level bound equals the product of thetas on random chains, and the
/// uniform bound with L = 1 equals theta^(j-i).
SuiteResult chain_reduction(std::size_t chains, std::uint64_t seed);
/// Row-sum formula equals the generic l-inf operator norm.
SuiteResult infnorm_identity(std::size_t matrices, std::uint64_t seed);
/// ||G||_2 in [1, sqrt(||G||_1 ||G||_inf)] on random unit-diagonal matrices.
SuiteResult spectral_bracket(std::size_t matrices, std::uint64_t seed);
/// Uniform bound <= theta-tilde^(j-i) for L <= 8, j-i <= 64, theta in
/// {0.1..0.9}, plus the floor inequality for L <= k <= 200.
SuiteResult geometric_rate_dominance();
/// Empirical deviation frequency minus its 3 sigma radius stays below the
/// Hamming tail bound on random binary models, n <= 8.
SuiteResult tail_bound_validity(std::size_t models, const VerifyOptions& opts);

}  // namespace suites

}  // namespace treemix
