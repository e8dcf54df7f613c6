#ifndef DRPM_DUAL_HPP
#define DRPM_DUAL_HPP

// Forward-mode dual numbers with a dynamic tangent vector.
//
// A Dual carries a value and its derivative with respect to every input
// coordinate. Constants carry an empty tangent, so mixing constants with
// variables costs nothing extra. All relaxed primitives in this library are
// templates over the scalar type and are instantiated for double (plain
// evaluation) and Dual (evaluation with exact gradient).
//
// The value part of every operation is computed with exactly the same double
// arithmetic as the plain double instantiation, so argmax decisions agree
// bit-for-bit between the two.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace drpm {

class Dual {
 public:
  Dual() = default;
  Dual(double value) : value_(value) {}  // NOLINT: implicit constant lift
  Dual(double value, std::vector<double> tangent)
      : value_(value), tangent_(std::move(tangent)) {}

  /// Input coordinate `index` of a `dim`-dimensional parameter vector.
  static Dual variable(double value, std::size_t index, std::size_t dim) {
    std::vector<double> t(dim, 0.0);
    t[index] = 1.0;
    return Dual(value, std::move(t));
  }

  double value() const { return value_; }
  const std::vector<double>& tangent() const { return tangent_; }

  /// Derivative along coordinate i (zero for constants).
  double d(std::size_t i) const { return i < tangent_.size() ? tangent_[i] : 0.0; }

  Dual& operator+=(const Dual& o) { return *this = *this + o; }
  Dual& operator-=(const Dual& o) { return *this = *this - o; }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator+(const Dual& a, const Dual& b) {
    return Dual(a.value_ + b.value_, combine(a.tangent_, 1.0, b.tangent_, 1.0));
  }
  friend Dual operator-(const Dual& a, const Dual& b) {
    return Dual(a.value_ - b.value_, combine(a.tangent_, 1.0, b.tangent_, -1.0));
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    return Dual(a.value_ * b.value_, combine(a.tangent_, b.value_, b.tangent_, a.value_));
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const double inv = 1.0 / b.value_;
    const double q = a.value_ / b.value_;
    return Dual(q, combine(a.tangent_, inv, b.tangent_, -q * inv));
  }
  friend Dual operator-(const Dual& a) { return Dual(-a.value_, scale(a.tangent_, -1.0)); }

  friend bool operator<(const Dual& a, const Dual& b) { return a.value_ < b.value_; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.value_ > b.value_; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.value_ <= b.value_; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.value_ >= b.value_; }

  friend Dual exp(const Dual& a) {
    const double e = std::exp(a.value_);
    return Dual(e, scale(a.tangent_, e));
  }
  friend Dual log(const Dual& a) {
    return Dual(std::log(a.value_), scale(a.tangent_, 1.0 / a.value_));
  }
  friend Dual log1p(const Dual& a) {
    return Dual(std::log1p(a.value_), scale(a.tangent_, 1.0 / (1.0 + a.value_)));
  }
  friend Dual sqrt(const Dual& a) {
    const double r = std::sqrt(a.value_);
    return Dual(r, scale(a.tangent_, 0.5 / r));
  }
  friend Dual abs(const Dual& a) {
    return Dual(std::abs(a.value_), scale(a.tangent_, a.value_ < 0.0 ? -1.0 : 1.0));
  }

  /// Same tangent, different value. Straight-through points use this to
  /// carry a hard forward value with the relaxed derivative attached.
  Dual with_value(double v) const { return Dual(v, tangent_); }

 private:
  static std::vector<double> scale(const std::vector<double>& t, double c) {
    if (t.empty()) return {};
    std::vector<double> r(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = c * t[i];
    return r;
  }

  static std::vector<double> combine(const std::vector<double>& ta, double ca,
                                     const std::vector<double>& tb, double cb) {
    if (ta.empty()) return scale(tb, cb);
    if (tb.empty()) return scale(ta, ca);
    std::vector<double> r(std::max(ta.size(), tb.size()), 0.0);
    for (std::size_t i = 0; i < ta.size(); ++i) r[i] += ca * ta[i];
    for (std::size_t i = 0; i < tb.size(); ++i) r[i] += cb * tb[i];
    return r;
  }

  double value_ = 0.0;
  std::vector<double> tangent_;
};

inline double value_of(double x) { return x; }
inline double value_of(long double x) { return static_cast<double>(x); }
inline double value_of(const Dual& x) { return x.value(); }

/// Straight-through combination: hard forward value, tangent of `soft`.
inline double straight_through(double hard, double /*soft*/) { return hard; }
inline long double straight_through(double hard, long double /*soft*/) { return hard; }
inline Dual straight_through(double hard, const Dual& soft) { return soft.with_value(hard); }

template <class Real>
Real sigmoid(const Real& x) {
  using std::exp;
  if (value_of(x) >= 0.0) {
    return Real(1.0) / (Real(1.0) + exp(-x));
  }
  const Real e = exp(x);
  return e / (Real(1.0) + e);
}

}  // namespace drpm

#endif  // DRPM_DUAL_HPP
