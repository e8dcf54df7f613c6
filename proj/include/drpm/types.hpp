#ifndef DRPM_TYPES_HPP
#define DRPM_TYPES_HPP

// Discrete objects shared by every module: subset-size vectors, permutation
// matrices, subset permutations and assignment matrices. All of them validate
// their invariants on construction and throw ValidationError otherwise.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drpm/logmath.hpp"

namespace drpm {

/// Subset sizes n = (n_1, ..., n_K). Empty subsets are legal.
class SubsetSizes {
 public:
  SubsetSizes() = default;
  explicit SubsetSizes(std::vector<int> counts);

  int groups() const { return static_cast<int>(counts_.size()); }
  int total() const;
  int operator[](int k) const { return counts_[static_cast<std::size_t>(k)]; }
  const std::vector<int>& counts() const { return counts_; }

  /// One-hot encoding of n_k over {0, ..., capacity}.
  std::vector<double> one_hot(int k, int capacity) const;

  /// Prefix sums: nu[k] = sum of n_i for i < k; size K + 1.
  std::vector<int> prefix() const;

  friend bool operator==(const SubsetSizes&, const SubsetSizes&) = default;
  friend auto operator<=>(const SubsetSizes&, const SubsetSizes&) = default;

 private:
  std::vector<int> counts_;
};

/// n x n 0/1 matrix with unit row and column sums. Stored as the element
/// selected by each row: order()[i] = j  <=>  pi[i, j] = 1.
class PermutationMatrix {
 public:
  PermutationMatrix() = default;
  explicit PermutationMatrix(std::vector<int> order);

  static PermutationMatrix identity(int n);
  static PermutationMatrix from_matrix(const Matrix<int>& m);

  int size() const { return static_cast<int>(order_.size()); }
  const std::vector<int>& order() const { return order_; }
  int operator[](int row) const { return order_[static_cast<std::size_t>(row)]; }
  int at(int row, int col) const { return order_[static_cast<std::size_t>(row)] == col ? 1 : 0; }
  Matrix<int> to_matrix() const;

  friend bool operator==(const PermutationMatrix&, const PermutationMatrix&) = default;
  friend auto operator<=>(const PermutationMatrix&, const PermutationMatrix&) = default;

 private:
  std::vector<int> order_;
};

/// n_k x n 0/1 matrix: unit row sums, column sums at most one.
class SubsetPermutation {
 public:
  SubsetPermutation() = default;
  SubsetPermutation(std::vector<int> selected, int n);

  static SubsetPermutation from_matrix(const Matrix<int>& m);

  int rows() const { return static_cast<int>(selected_.size()); }
  int cols() const { return n_; }
  const std::vector<int>& selected() const { return selected_; }

 private:
  std::vector<int> selected_;
  int n_ = 0;
};

/// K x n partition matrix Y with one-hot columns. Stored as the subset label
/// of every element. Subsets are labelled: (S1={1}, S2={}) differs from
/// (S1={}, S2={1}).
class AssignmentMatrix {
 public:
  AssignmentMatrix() = default;
  AssignmentMatrix(std::vector<int> labels, int groups);

  static AssignmentMatrix from_matrix(const Matrix<int>& m);

  /// Canonical text form: comma-separated row bitstrings, e.g. "110,001".
  static AssignmentMatrix parse(std::string_view text);
  std::string to_string() const;

  int groups() const { return groups_; }
  int elements() const { return static_cast<int>(labels_.size()); }
  const std::vector<int>& labels() const { return labels_; }
  int at(int k, int i) const { return labels_[static_cast<std::size_t>(i)] == k ? 1 : 0; }
  Matrix<int> to_matrix() const;
  SubsetSizes counts() const;

  /// Elements of subset k in increasing index order.
  std::vector<int> subset(int k) const;

  /// Base-K integer code of the label vector (element 0 most significant).
  std::uint64_t code() const;
  static AssignmentMatrix from_code(std::uint64_t code, int n, int groups);

  friend bool operator==(const AssignmentMatrix&, const AssignmentMatrix&) = default;

 private:
  std::vector<int> labels_;
  int groups_ = 0;
};

}  // namespace drpm

#endif  // DRPM_TYPES_HPP
