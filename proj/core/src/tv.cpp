#include "treemix/tv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "treemix/error.hpp"

namespace treemix {

namespace {

void check_index_set(const std::vector<Node>& index) {
  for (std::size_t k = 1; k < index.size(); ++k) {
    if (!(index[k - 1] < index[k])) {
      throw DomainError("index set must be strictly increasing");
    }
  }
}

void check_alphabet(int alphabet) {
  if (alphabet < 1) throw DomainError("alphabet size must be positive");
}

// Offset of the sub-configuration of `sub` inside a configuration of `full`,
// expressed as per-position strides.
std::vector<std::uint64_t> strides_into(const std::vector<Node>& full,
                                        const std::vector<Node>& sub, int alphabet) {
  std::vector<std::uint64_t> strides(full.size(), 0);
  std::uint64_t s = 1;
  for (std::size_t k = sub.size(); k-- > 0;) {
    auto it = std::lower_bound(full.begin(), full.end(), sub[k]);
    strides[static_cast<std::size_t>(it - full.begin())] = s;
    s *= static_cast<std::uint64_t>(alphabet);
  }
  return strides;
}

}  // namespace

std::uint64_t config_count(int alphabet, std::size_t k) {
  check_alphabet(alphabet);
  std::uint64_t n = 1;
  const auto a = static_cast<std::uint64_t>(alphabet);
  for (std::size_t i = 0; i < k; ++i) {
    if (n > std::numeric_limits<std::uint64_t>::max() / a) {
      throw DomainError("configuration space too large");
    }
    n *= a;
  }
  return n;
}

IndexedTensor::IndexedTensor(std::vector<Node> index_set, int alphabet,
                             std::vector<double> values)
    : index_set_(std::move(index_set)), alphabet_(alphabet), values_(std::move(values)) {
  check_alphabet(alphabet_);
  check_index_set(index_set_);
  if (values_.size() != config_count(alphabet_, index_set_.size())) {
    throw DomainError("tensor length " + std::to_string(values_.size()) +
                      " does not match |S|^|I| = " +
                      std::to_string(config_count(alphabet_, index_set_.size())));
  }
}

IndexedTensor IndexedTensor::zeros(std::vector<Node> index_set, int alphabet) {
  const auto len = config_count(alphabet, index_set.size());
  return IndexedTensor(std::move(index_set), alphabet, std::vector<double>(len, 0.0));
}

double IndexedTensor::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double IndexedTensor::tv_norm() const {
  double s = 0.0;
  for (double v : values_) s += std::abs(v);
  return 0.5 * s;
}

bool IndexedTensor::is_balanced(double tol) const { return std::abs(sum()) <= tol; }

bool IndexedTensor::is_distribution(double tol) const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; }) &&
         std::abs(sum() - 1.0) <= tol;
}

IndexedTensor IndexedTensor::operator-(const IndexedTensor& other) const {
  if (index_set_ != other.index_set_ || alphabet_ != other.alphabet_) {
    throw DomainError("shape mismatch in tensor difference");
  }
  std::vector<double> out(values_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = values_[k] - other.values_[k];
  return IndexedTensor(index_set_, alphabet_, std::move(out));
}

StochasticOperator::StochasticOperator(std::vector<Node> in_index, std::vector<Node> out_index,
                                       int alphabet, std::vector<double> entries)
    : in_(std::move(in_index)),
      out_(std::move(out_index)),
      alphabet_(alphabet),
      entries_(std::move(entries)) {
  check_alphabet(alphabet_);
  check_index_set(in_);
  check_index_set(out_);
  rows_ = config_count(alphabet_, out_.size());
  cols_ = config_count(alphabet_, in_.size());
  if (entries_.size() != rows_ * cols_) {
    throw DomainError("operator entries do not match |S|^|J| x |S|^|I|");
  }
  for (std::size_t c = 0; c < cols_; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double v = entries_[r * cols_ + c];
      if (!(v >= 0.0) || v > 1.0 + kStochasticTolerance) {
        throw DomainError("operator entry out of [0,1] in column " + std::to_string(c));
      }
      s += v;
    }
    if (std::abs(s - 1.0) > kStochasticTolerance) {
      throw DomainError("operator is not column-stochastic: column " + std::to_string(c) +
                        " sums to " + std::to_string(s));
    }
  }
}

StochasticOperator StochasticOperator::square(Node in, Node out, int alphabet,
                                              std::vector<double> entries) {
  return StochasticOperator({in}, {out}, alphabet, std::move(entries));
}

IndexedTensor StochasticOperator::column(std::size_t col) const {
  if (col >= cols_) throw DomainError("column index out of range");
  std::vector<double> v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = entries_[r * cols_ + col];
  return IndexedTensor(out_, alphabet_, std::move(v));
}

double tv_distance(const IndexedTensor& p, const IndexedTensor& q) {
  if (p.index_set() != q.index_set() || p.alphabet() != q.alphabet()) {
    throw DomainError("shape mismatch in tv_distance");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

double operator_tv_norm(const StochasticOperator& A) {
  double best = 0.0;
  for (std::size_t c1 = 0; c1 < A.cols(); ++c1) {
    for (std::size_t c2 = c1 + 1; c2 < A.cols(); ++c2) {
      double s = 0.0;
      for (std::size_t r = 0; r < A.rows(); ++r) s += std::abs(A(r, c1) - A(r, c2));
      best = std::max(best, 0.5 * s);
    }
  }
  return best;
}

IndexedTensor tensor_product(std::span<const IndexedTensor> factors) {
  if (factors.empty()) throw DomainError("tensor product of no factors");
  const int alphabet = factors.front().alphabet();
  std::vector<Node> index;
  for (const auto& f : factors) {
    if (f.alphabet() != alphabet) throw DomainError("alphabet mismatch in tensor product");
    index.insert(index.end(), f.index_set().begin(), f.index_set().end());
  }
  std::sort(index.begin(), index.end());
  if (std::adjacent_find(index.begin(), index.end()) != index.end()) {
    throw DomainError("tensor product factors have overlapping index sets");
  }

  std::vector<std::vector<std::uint64_t>> strides;
  strides.reserve(factors.size());
  for (const auto& f : factors) strides.push_back(strides_into(index, f.index_set(), alphabet));

  const auto total = config_count(alphabet, index.size());
  std::vector<double> out(total, 1.0);
  std::vector<int> digits(index.size(), 0);
  for (std::uint64_t x = 0; x < total; ++x) {
    double v = 1.0;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      std::uint64_t off = 0;
      for (std::size_t k = 0; k < digits.size(); ++k) off += strides[f][k] * digits[k];
      v *= factors[f][off];
    }
    out[x] = v;
    for (std::size_t k = digits.size(); k-- > 0;) {
      if (++digits[k] < alphabet) break;
      digits[k] = 0;
    }
  }
  return IndexedTensor(std::move(index), alphabet, std::move(out));
}

IndexedTensor apply_operator(const StochasticOperator& A, const IndexedTensor& u) {
  if (u.index_set() != A.in_index() || u.alphabet() != A.alphabet()) {
    throw DomainError("shape mismatch: tensor is not indexed by the operator's input set");
  }
  std::vector<double> v(A.rows(), 0.0);
  for (std::size_t r = 0; r < A.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < A.cols(); ++c) s += A(r, c) * u[c];
    v[r] = s;
  }
  return IndexedTensor(A.out_index(), A.alphabet(), std::move(v));
}

StochasticOperator compose(const StochasticOperator& B, const StochasticOperator& A) {
  if (B.in_index() != A.out_index() || B.alphabet() != A.alphabet()) {
    throw DomainError("shape mismatch in operator composition");
  }
  std::vector<double> out(B.rows() * A.cols(), 0.0);
  for (std::size_t r = 0; r < B.rows(); ++r) {
    for (std::size_t m = 0; m < B.cols(); ++m) {
      const double b = B(r, m);
      if (b == 0.0) continue;
      for (std::size_t c = 0; c < A.cols(); ++c) out[r * A.cols() + c] += b * A(m, c);
    }
  }
  return StochasticOperator(A.in_index(), B.out_index(), A.alphabet(), std::move(out));
}

StochasticOperator operator_tensor_product(std::vector<Node> in_index,
                                           std::vector<Node> out_index,
                                           std::span<const EdgeFactor> factors) {
  check_index_set(in_index);
  check_index_set(out_index);
  if (factors.empty() || factors.front().kernel == nullptr) {
    throw DomainError("operator tensor product needs at least one factor");
  }
  const int alphabet = factors.front().kernel->alphabet();

  // Position of each factor's endpoints inside the index sets.
  std::vector<std::size_t> in_pos(factors.size());
  std::vector<std::size_t> out_pos(factors.size());
  std::vector<int> covered(out_index.size(), 0);
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const auto& e = factors[f];
    if (e.kernel == nullptr || e.kernel->rows() != static_cast<std::size_t>(alphabet) ||
        e.kernel->cols() != static_cast<std::size_t>(alphabet)) {
      throw DomainError("edge factor must be an |S| x |S| kernel");
    }
    auto ip = std::lower_bound(in_index.begin(), in_index.end(), e.parent);
    auto op = std::lower_bound(out_index.begin(), out_index.end(), e.child);
    if (ip == in_index.end() || *ip != e.parent || op == out_index.end() || *op != e.child) {
      throw DomainError("edge factor endpoint outside the bipartite index sets");
    }
    in_pos[f] = static_cast<std::size_t>(ip - in_index.begin());
    out_pos[f] = static_cast<std::size_t>(op - out_index.begin());
    ++covered[out_pos[f]];
  }
  if (std::any_of(covered.begin(), covered.end(), [](int c) { return c != 1; })) {
    throw DomainError("each output node needs exactly one incoming edge factor");
  }

  const auto rows = config_count(alphabet, out_index.size());
  const auto cols = config_count(alphabet, in_index.size());
  std::vector<double> entries(rows * cols, 0.0);
  std::vector<int> ydig(out_index.size(), 0);
  for (std::uint64_t r = 0; r < rows; ++r) {
    std::vector<int> xdig(in_index.size(), 0);
    for (std::uint64_t c = 0; c < cols; ++c) {
      double v = 1.0;
      for (std::size_t f = 0; f < factors.size(); ++f) {
        v *= (*factors[f].kernel)(ydig[out_pos[f]], xdig[in_pos[f]]);
      }
      entries[r * cols + c] = v;
      for (std::size_t k = xdig.size(); k-- > 0;) {
        if (++xdig[k] < alphabet) break;
        xdig[k] = 0;
      }
    }
    for (std::size_t k = ydig.size(); k-- > 0;) {
      if (++ydig[k] < alphabet) break;
      ydig[k] = 0;
    }
  }
  return StochasticOperator(std::move(in_index), std::move(out_index), alphabet,
                            std::move(entries));
}

double alpha(std::span<const double> values) {
  if (values.empty()) throw DomainError("alpha of an empty multiset is undefined");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("alpha argument " + std::to_string(v) + " outside [0,1]");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  double acc = sorted.front();
  for (std::size_t k = 1; k < sorted.size(); ++k) acc = sorted[k] + (1.0 - sorted[k]) * acc;
  return acc;
}

}  // namespace treemix
