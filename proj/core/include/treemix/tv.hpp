#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treemix/tree.hpp"

namespace treemix {

/// Column sums must match 1 within this tolerance to count as stochastic.
inline constexpr double kStochasticTolerance = 1e-9;

/// Number of joint configurations |S|^k. Throws DomainError on overflow.
std::uint64_t config_count(int alphabet, std::size_t k);

/// Real vector indexed by joint configurations of a node subset.
///
/// Configurations are ordered lexicographically with the smallest node
/// index as the most significant digit and states 0..|S|-1, so the
/// configuration (x_a, x_b, x_c) with a < b < c sits at offset
/// ((x_a * |S|) + x_b) * |S| + x_c.
class IndexedTensor {
 public:
  IndexedTensor() = default;
  /// index_set must be strictly increasing; values.size() must equal
  /// |S|^|index_set|.
  IndexedTensor(std::vector<Node> index_set, int alphabet, std::vector<double> values);

  /// Tensor of zeros over the given index set.
  static IndexedTensor zeros(std::vector<Node> index_set, int alphabet);

  const std::vector<Node>& index_set() const { return index_set_; }
  int alphabet() const { return alphabet_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  double sum() const;
  /// Half the l1 norm.
  double tv_norm() const;
  bool is_balanced(double tol = 1e-12) const;
  bool is_distribution(double tol = kStochasticTolerance) const;

  IndexedTensor operator-(const IndexedTensor& other) const;

 private:
  std::vector<Node> index_set_;
  int alphabet_ = 0;
  std::vector<double> values_;
};

/// Linear map from I-tensors to J-tensors, stored as a dense
/// |S|^|J| x |S|^|I| row-major matrix. Constructed operators are always
/// column-stochastic.
class StochasticOperator {
 public:
  StochasticOperator() = default;
  StochasticOperator(std::vector<Node> in_index, std::vector<Node> out_index, int alphabet,
                     std::vector<double> entries);

  /// Plain |S| x |S| kernel between two single nodes.
  static StochasticOperator square(Node in, Node out, int alphabet, std::vector<double> entries);

  const std::vector<Node>& in_index() const { return in_; }
  const std::vector<Node>& out_index() const { return out_; }
  int alphabet() const { return alphabet_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t row, std::size_t col) const { return entries_[row * cols_ + col]; }
  std::span<const double> entries() const { return entries_; }

  /// The J-tensor A[., col].
  IndexedTensor column(std::size_t col) const;

 private:
  std::vector<Node> in_;
  std::vector<Node> out_;
  int alphabet_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

/// Half the l1 distance between two tensors on the same index set.
double tv_distance(const IndexedTensor& p, const IndexedTensor& q);

/// max over column pairs of the TV distance between columns.
double operator_tv_norm(const StochasticOperator& A);

/// Tensor product of factors with pairwise-disjoint index sets; the
/// result is indexed by the sorted union.
IndexedTensor tensor_product(std::span<const IndexedTensor> factors);

/// v = A u.
IndexedTensor apply_operator(const StochasticOperator& A, const IndexedTensor& u);

/// Matrix product B A, where A maps I->J and B maps J->K.
StochasticOperator compose(const StochasticOperator& B, const StochasticOperator& A);

/// One factor A^(u,v) of a bipartite operator tensor product: rows index
/// the state of `child`, columns the state of `parent`.
struct EdgeFactor {
  Node parent = 0;
  Node child = 0;
  const StochasticOperator* kernel = nullptr;
};

/// The I,J-matrix with entries prod_{(i,j) in E} A^(i,j)[y_j, x_i]. Every
/// node of out_index must be the child of exactly one factor whose parent
/// lies in in_index.
StochasticOperator operator_tensor_product(std::vector<Node> in_index,
                                           std::vector<Node> out_index,
                                           std::span<const EdgeFactor> factors);

/// alpha over a finite multiset in [0,1]: alpha(x) = x,
/// alpha(x_1..x_{k+1}) = x_{k+1} + (1 - x_{k+1}) alpha(x_1..x_k).
/// Folded in ascending order. Throws DomainError on empty input or values
/// outside [0,1].
double alpha(std::span<const double> values);

}  // namespace treemix
