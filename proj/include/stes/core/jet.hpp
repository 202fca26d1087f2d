#pragma once

// Forward-mode automatic differentiation over a small, runtime-sized set of
// local inputs. Jet<false> carries value and gradient; Jet<true> additionally
// carries the (packed, lower-triangular) Hessian. The dynamics of the storage
// model are written once as templates over the scalar type and instantiated
// with double, Jet<false> and Jet<true>.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>

namespace stes::ad {

inline constexpr int kMaxDim = 16;
inline constexpr int kMaxPacked = kMaxDim * (kMaxDim + 1) / 2;

constexpr int packed_index(int i, int j) {
  return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
}
constexpr int packed_size(int n) { return n * (n + 1) / 2; }

template <bool kSecondOrder>
class Jet {
 public:
  static constexpr bool second_order = kSecondOrder;

  Jet() : v_(0.0), n_(0) {}
  Jet(double value) : v_(value), n_(0) {}  // NOLINT: implicit promotion of constants

  /// Independent variable number `index` among `dim` local inputs.
  static Jet variable(double value, int index, int dim) {
    assert(dim <= kMaxDim && index < dim);
    Jet x;
    x.v_ = value;
    x.n_ = dim;
    for (int i = 0; i < dim; ++i) x.g_[i] = 0.0;
    x.g_[index] = 1.0;
    if constexpr (kSecondOrder) {
      for (int k = 0; k < packed_size(dim); ++k) x.h_[k] = 0.0;
    }
    return x;
  }

  double value() const { return v_; }
  int dim() const { return n_; }
  double grad(int i) const { return i < n_ ? g_[i] : 0.0; }
  double hess(int i, int j) const {
    static_assert(kSecondOrder, "Hessian requires a second-order jet");
    return (i < n_ && j < n_) ? h_[packed_index(i, j)] : 0.0;
  }

  Jet operator-() const {
    Jet r = *this;
    r.v_ = -v_;
    for (int i = 0; i < n_; ++i) r.g_[i] = -g_[i];
    if constexpr (kSecondOrder) {
      for (int k = 0; k < packed_size(n_); ++k) r.h_[k] = -h_[k];
    }
    return r;
  }

  Jet& operator+=(const Jet& o) { return *this = *this + o; }
  Jet& operator-=(const Jet& o) { return *this = *this - o; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(const Jet& a, const Jet& b) {
    if (b.n_ == 0) return a.shifted(b.v_);
    if (a.n_ == 0) return b.shifted(a.v_);
    if (a.n_ != b.n_) return widen(a, b, [](const Jet& x, const Jet& y) { return x + y; });
    Jet r;
    r.n_ = a.n_;
    r.v_ = a.v_ + b.v_;
    for (int i = 0; i < r.n_; ++i) r.g_[i] = a.g_[i] + b.g_[i];
    if constexpr (kSecondOrder) {
      for (int k = 0; k < packed_size(r.n_); ++k) r.h_[k] = a.h_[k] + b.h_[k];
    }
    return r;
  }

  friend Jet operator-(const Jet& a, const Jet& b) {
    if (b.n_ == 0) return a.shifted(-b.v_);
    if (a.n_ == 0) return (-b).shifted(a.v_);
    if (a.n_ != b.n_) return widen(a, b, [](const Jet& x, const Jet& y) { return x - y; });
    Jet r;
    r.n_ = a.n_;
    r.v_ = a.v_ - b.v_;
    for (int i = 0; i < r.n_; ++i) r.g_[i] = a.g_[i] - b.g_[i];
    if constexpr (kSecondOrder) {
      for (int k = 0; k < packed_size(r.n_); ++k) r.h_[k] = a.h_[k] - b.h_[k];
    }
    return r;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    if (b.n_ == 0) return a.scaled(b.v_);
    if (a.n_ == 0) return b.scaled(a.v_);
    if (a.n_ != b.n_) return widen(a, b, [](const Jet& x, const Jet& y) { return x * y; });
    Jet r;
    const int n = a.n_;
    r.n_ = n;
    r.v_ = a.v_ * b.v_;
    for (int i = 0; i < n; ++i) r.g_[i] = a.v_ * b.g_[i] + b.v_ * a.g_[i];
    if constexpr (kSecondOrder) {
      int k = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j, ++k) {
          r.h_[k] = a.v_ * b.h_[k] + b.v_ * a.h_[k] + a.g_[i] * b.g_[j] + a.g_[j] * b.g_[i];
        }
      }
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    if (b.n_ == 0) return a.scaled(1.0 / b.v_);
    return a * reciprocal(b);
  }

  friend Jet reciprocal(const Jet& b) {
    const double inv = 1.0 / b.v_;
    return b.chain(inv, -inv * inv, 2.0 * inv * inv * inv);
  }

  friend Jet sqrt(const Jet& x) {
    const double s = std::sqrt(x.v_);
    return x.chain(s, 0.5 / s, -0.25 / (s * x.v_));
  }

  friend Jet log(const Jet& x) { return x.chain(std::log(x.v_), 1.0 / x.v_, -1.0 / (x.v_ * x.v_)); }

  friend Jet exp(const Jet& x) {
    const double e = std::exp(x.v_);
    return x.chain(e, e, e);
  }

  friend bool operator<(const Jet& a, const Jet& b) { return a.v_ < b.v_; }
  friend bool operator>(const Jet& a, const Jet& b) { return a.v_ > b.v_; }
  friend bool operator<=(const Jet& a, const Jet& b) { return a.v_ <= b.v_; }
  friend bool operator>=(const Jet& a, const Jet& b) { return a.v_ >= b.v_; }

 private:
  // f(x) with f(v) = f0, f'(v) = f1, f''(v) = f2.
  Jet chain(double f0, double f1, double f2) const {
    Jet r;
    r.n_ = n_;
    r.v_ = f0;
    for (int i = 0; i < n_; ++i) r.g_[i] = f1 * g_[i];
    if constexpr (kSecondOrder) {
      int k = 0;
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j <= i; ++j, ++k) r.h_[k] = f1 * h_[k] + f2 * g_[i] * g_[j];
      }
    }
    return r;
  }

  Jet shifted(double c) const {
    Jet r = *this;
    r.v_ += c;
    return r;
  }

  Jet scaled(double c) const {
    Jet r;
    r.n_ = n_;
    r.v_ = v_ * c;
    for (int i = 0; i < n_; ++i) r.g_[i] = g_[i] * c;
    if constexpr (kSecondOrder) {
      for (int k = 0; k < packed_size(n_); ++k) r.h_[k] = h_[k] * c;
    }
    return r;
  }

  Jet padded(int n) const {
    Jet r = *this;
    for (int i = n_; i < n; ++i) r.g_[i] = 0.0;
    if constexpr (kSecondOrder) {
      for (int k = packed_size(n_); k < packed_size(n); ++k) r.h_[k] = 0.0;
    }
    r.n_ = n;
    return r;
  }

  template <class Op>
  static Jet widen(const Jet& a, const Jet& b, Op op) {
    const int n = std::max(a.n_, b.n_);
    return op(a.padded(n), b.padded(n));
  }

  double v_;
  int n_;
  std::array<double, kMaxDim> g_;
  // Only allocated storage for second-order jets.
  std::array<double, kSecondOrder ? kMaxPacked : 1> h_;
};

using Dual = Jet<false>;
using Jet2 = Jet<true>;

inline double reciprocal(double x) { return 1.0 / x; }

inline double value_of(double x) { return x; }
template <bool K>
double value_of(const Jet<K>& x) {
  return x.value();
}

template <class S>
inline constexpr bool is_jet_v = false;
template <bool K>
inline constexpr bool is_jet_v<Jet<K>> = true;

}  // namespace stes::ad
