#ifndef DRPM_LOGMATH_HPP
#define DRPM_LOGMATH_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "drpm/dual.hpp"

namespace drpm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log C(n, k) via log-gamma; -inf outside 0 <= k <= n.
inline double log_choose(int n, int k) {
  if (k < 0 || k > n) return kNegInf;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

/// log(sum(exp(xs))). Entries whose value is -inf are skipped; an all -inf
/// input returns -inf.
template <class Real>
Real log_sum_exp(std::span<const Real> xs) {
  using std::exp;
  using std::log;
  double top = kNegInf;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (value_of(xs[i]) > top) {
      top = value_of(xs[i]);
      arg = i;
    }
  }
  if (top == kNegInf) return Real(kNegInf);
  const Real& shift = xs[arg];
  Real acc(0.0);
  for (const Real& x : xs) {
    if (value_of(x) == kNegInf) continue;
    acc += exp(x - shift);
  }
  return shift + log(acc);
}

template <class Real>
Real log_sum_exp(const std::vector<Real>& xs) {
  return log_sum_exp(std::span<const Real>(xs));
}

/// softmax(logits / tau); -inf logits get exactly zero mass.
template <class Real>
std::vector<Real> softmax(std::span<const Real> logits, double tau) {
  std::vector<Real> scaled;
  scaled.reserve(logits.size());
  for (const Real& x : logits) scaled.push_back(value_of(x) == kNegInf ? Real(kNegInf) : x / Real(tau));
  const Real lse = log_sum_exp(std::span<const Real>(scaled));
  std::vector<Real> out;
  out.reserve(logits.size());
  for (const Real& x : scaled) {
    using std::exp;
    out.push_back(value_of(x) == kNegInf ? Real(0.0) : exp(x - lse));
  }
  return out;
}

template <class Real>
std::vector<Real> softmax(const std::vector<Real>& logits, double tau) {
  return softmax(std::span<const Real>(logits), tau);
}

/// Index of the largest finite entry, lowest index on ties; -1 if none.
template <class Real>
int argmax(std::span<const Real> xs) {
  int best = -1;
  double top = kNegInf;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (value_of(xs[i]) > top) {
      top = value_of(xs[i]);
      best = static_cast<int>(i);
    }
  }
  return best;
}

/// Dense row-major matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T())
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Matrix<double> values_of(const Matrix<T>& m) {
  Matrix<double> out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = value_of(m(r, c));
  return out;
}

}  // namespace drpm

#endif  // DRPM_LOGMATH_HPP
