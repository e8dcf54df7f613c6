#include "drpm/types.hpp"

#include <numeric>
#include <sstream>

#include "drpm/errors.hpp"

namespace drpm {

SubsetSizes::SubsetSizes(std::vector<int> counts) : counts_(std::move(counts)) {
  for (int c : counts_) {
    if (c < 0) throw ValidationError("subset sizes must be non-negative");
  }
}

int SubsetSizes::total() const { return std::accumulate(counts_.begin(), counts_.end(), 0); }

std::vector<double> SubsetSizes::one_hot(int k, int capacity) const {
  const int c = (*this)[k];
  if (c > capacity) throw ValidationError("subset size exceeds one-hot capacity");
  std::vector<double> out(static_cast<std::size_t>(capacity) + 1, 0.0);
  out[static_cast<std::size_t>(c)] = 1.0;
  return out;
}

std::vector<int> SubsetSizes::prefix() const {
  std::vector<int> nu(counts_.size() + 1, 0);
  for (std::size_t k = 0; k < counts_.size(); ++k) nu[k + 1] = nu[k] + counts_[k];
  return nu;
}

PermutationMatrix::PermutationMatrix(std::vector<int> order) : order_(std::move(order)) {
  std::vector<char> seen(order_.size(), 0);
  for (int j : order_) {
    if (j < 0 || j >= static_cast<int>(order_.size()) || seen[static_cast<std::size_t>(j)]) {
      throw ValidationError("not a permutation: every column must be selected exactly once");
    }
    seen[static_cast<std::size_t>(j)] = 1;
  }
}

PermutationMatrix PermutationMatrix::identity(int n) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  return PermutationMatrix(std::move(order));
}

PermutationMatrix PermutationMatrix::from_matrix(const Matrix<int>& m) {
  if (m.rows() != m.cols()) throw ValidationError("permutation matrix must be square");
  std::vector<int> order;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    int hit = -1;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const int v = m(i, j);
      if (v != 0 && v != 1) throw ValidationError("permutation matrix entries must be 0 or 1");
      if (v == 1) {
        if (hit >= 0) throw ValidationError("permutation matrix row has more than one 1");
        hit = static_cast<int>(j);
      }
    }
    if (hit < 0) throw ValidationError("permutation matrix row has no 1");
    order.push_back(hit);
  }
  return PermutationMatrix(std::move(order));
}

Matrix<int> PermutationMatrix::to_matrix() const {
  Matrix<int> m(order_.size(), order_.size(), 0);
  for (std::size_t i = 0; i < order_.size(); ++i) m(i, static_cast<std::size_t>(order_[i])) = 1;
  return m;
}

SubsetPermutation::SubsetPermutation(std::vector<int> selected, int n)
    : selected_(std::move(selected)), n_(n) {
  if (static_cast<int>(selected_.size()) > n_) {
    throw ValidationError("subset permutation has more rows than columns");
  }
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  for (int j : selected_) {
    if (j < 0 || j >= n_) throw ValidationError("subset permutation selects a column out of range");
    if (seen[static_cast<std::size_t>(j)]) {
      throw ValidationError("subset permutation column selected more than once");
    }
    seen[static_cast<std::size_t>(j)] = 1;
  }
}

SubsetPermutation SubsetPermutation::from_matrix(const Matrix<int>& m) {
  std::vector<int> selected;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    int hit = -1;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const int v = m(i, j);
      if (v != 0 && v != 1) throw ValidationError("subset permutation entries must be 0 or 1");
      if (v == 1) {
        if (hit >= 0) throw ValidationError("subset permutation row has more than one 1");
        hit = static_cast<int>(j);
      }
    }
    if (hit < 0) throw ValidationError("subset permutation row has no 1");
    selected.push_back(hit);
  }
  return SubsetPermutation(std::move(selected), static_cast<int>(m.cols()));
}

AssignmentMatrix::AssignmentMatrix(std::vector<int> labels, int groups)
    : labels_(std::move(labels)), groups_(groups) {
  if (groups_ < 1) throw ValidationError("assignment matrix needs at least one subset");
  for (int k : labels_) {
    if (k < 0 || k >= groups_) throw ValidationError("element assigned to a subset out of range");
  }
}

AssignmentMatrix AssignmentMatrix::from_matrix(const Matrix<int>& m) {
  std::vector<int> labels(m.cols(), -1);
  for (std::size_t i = 0; i < m.cols(); ++i) {
    for (std::size_t k = 0; k < m.rows(); ++k) {
      const int v = m(k, i);
      if (v != 0 && v != 1) throw ValidationError("assignment matrix entries must be 0 or 1");
      if (v == 1) {
        if (labels[i] >= 0) {
          throw ValidationError("column " + std::to_string(i + 1) + " assigns an element to two subsets");
        }
        labels[i] = static_cast<int>(k);
      }
    }
    if (labels[i] < 0) {
      throw ValidationError("column " + std::to_string(i + 1) + " assigns an element to no subset");
    }
  }
  return AssignmentMatrix(std::move(labels), static_cast<int>(m.rows()));
}

AssignmentMatrix AssignmentMatrix::parse(std::string_view text) {
  std::vector<std::string> rows;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      rows.push_back(current);
      current.clear();
    } else if (c == '0' || c == '1') {
      current.push_back(c);
    } else if (c != ' ') {
      throw ValidationError(std::string("invalid character in partition string: '") + c + "'");
    }
  }
  rows.push_back(current);
  const std::size_t n = rows.front().size();
  if (n == 0) throw ValidationError("partition string has an empty row");
  Matrix<int> m(rows.size(), n, 0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != n) throw ValidationError("partition string rows differ in length");
    for (std::size_t i = 0; i < n; ++i) m(k, i) = rows[k][i] == '1' ? 1 : 0;
  }
  return from_matrix(m);
}

std::string AssignmentMatrix::to_string() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(groups_) * (labels_.size() + 1));
  for (int k = 0; k < groups_; ++k) {
    if (k > 0) out.push_back(',');
    for (int label : labels_) out.push_back(label == k ? '1' : '0');
  }
  return out;
}

Matrix<int> AssignmentMatrix::to_matrix() const {
  Matrix<int> m(static_cast<std::size_t>(groups_), labels_.size(), 0);
  for (std::size_t i = 0; i < labels_.size(); ++i) m(static_cast<std::size_t>(labels_[i]), i) = 1;
  return m;
}

SubsetSizes AssignmentMatrix::counts() const {
  std::vector<int> c(static_cast<std::size_t>(groups_), 0);
  for (int label : labels_) ++c[static_cast<std::size_t>(label)];
  return SubsetSizes(std::move(c));
}

std::vector<int> AssignmentMatrix::subset(int k) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == k) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::uint64_t AssignmentMatrix::code() const {
  std::uint64_t c = 0;
  for (int label : labels_) c = c * static_cast<std::uint64_t>(groups_) + static_cast<std::uint64_t>(label);
  return c;
}

AssignmentMatrix AssignmentMatrix::from_code(std::uint64_t code, int n, int groups) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    labels[static_cast<std::size_t>(i)] = static_cast<int>(code % static_cast<std::uint64_t>(groups));
    code /= static_cast<std::uint64_t>(groups);
  }
  return AssignmentMatrix(std::move(labels), groups);
}

}  // namespace drpm
