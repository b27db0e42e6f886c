#pragma once

// Truncated Taylor arithmetic.
//
// Coefficients are stored normalized: c[m] = f^(m) / m!, so multiplication is
// a plain (truncated) convolution. Raw derivatives are available through
// derivative() / raw() at the boundary.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace nnpde {

class SingularJetError : public std::domain_error {
 public:
  explicit SingularJetError(const std::string& what) : std::domain_error(what) {}
};

namespace detail {

constexpr double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace detail

/// Univariate jet of order `Order` over scalar T.
template <typename T, int Order = 4>
class Jet {
 public:
  static constexpr int kOrder = Order;
  static constexpr int kSize = Order + 1;

  constexpr Jet() = default;
  constexpr Jet(T value) { c_[0] = value; }  // NOLINT(google-explicit-constructor)

  /// value + slope * t
  static constexpr Jet variable(T value, T slope) {
    Jet j(value);
    if constexpr (Order >= 1) j.c_[1] = slope;
    return j;
  }

  /// Builds a jet from raw derivatives d[m] = f^(m).
  static Jet from_derivatives(std::span<const T> d) {
    Jet j;
    for (int m = 0; m < kSize && m < static_cast<int>(d.size()); ++m)
      j.c_[m] = d[m] / static_cast<T>(detail::factorial(m));
    return j;
  }

  constexpr T& operator[](int m) { return c_[m]; }
  constexpr const T& operator[](int m) const { return c_[m]; }
  constexpr T value() const { return c_[0]; }
  T derivative(int m) const { return c_[m] * static_cast<T>(detail::factorial(m)); }
  const std::array<T, kSize>& coefficients() const { return c_; }

  Jet& operator+=(const Jet& o) {
    for (int m = 0; m < kSize; ++m) c_[m] += o.c_[m];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int m = 0; m < kSize; ++m) c_[m] -= o.c_[m];
    return *this;
  }
  Jet& operator*=(T s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator-(Jet a) {
    for (auto& v : a.c_) v = -v;
    return a;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, T s) { a.c_[0] += s; return a; }
  friend Jet operator+(T s, Jet a) { a.c_[0] += s; return a; }
  friend Jet operator-(Jet a, T s) { a.c_[0] -= s; return a; }
  friend Jet operator-(T s, const Jet& a) { return Jet(s) - a; }
  friend Jet operator*(Jet a, T s) { return a *= s; }
  friend Jet operator*(T s, Jet a) { return a *= s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int m = 0; m < kSize; ++m) {
      T acc{};
      for (int i = 0; i <= m; ++i) acc += a.c_[i] * b.c_[m - i];
      r.c_[m] = acc;
    }
    return r;
  }

  // q_m = (a_m - sum_{k=1..m} b_k q_{m-k}) / b_0
  friend Jet operator/(const Jet& a, const Jet& b) {
    if (b.c_[0] == T{}) throw SingularJetError("jet division by a series with zero constant term");
    Jet q;
    for (int m = 0; m < kSize; ++m) {
      T acc = a.c_[m];
      for (int k = 1; k <= m; ++k) acc -= b.c_[k] * q.c_[m - k];
      q.c_[m] = acc / b.c_[0];
    }
    return q;
  }
  friend Jet operator/(Jet a, T s) {
    if (s == T{}) throw SingularJetError("jet division by zero scalar");
    for (auto& v : a.c_) v /= s;
    return a;
  }
  friend Jet operator/(T s, const Jet& b) { return Jet(s) / b; }

  friend bool operator==(const Jet&, const Jet&) = default;

 private:
  std::array<T, kSize> c_{};
};

/// sin and cos of a jet, propagated jointly:
///   s_m = (1/m) sum k a_k c_{m-k},  c_m = -(1/m) sum k a_k s_{m-k}
template <typename T, int N>
void sincos(const Jet<T, N>& a, Jet<T, N>& s, Jet<T, N>& c) {
  using std::cos;
  using std::sin;
  s = Jet<T, N>(sin(a[0]));
  c = Jet<T, N>(cos(a[0]));
  for (int m = 1; m <= N; ++m) {
    T ss{}, cc{};
    for (int k = 1; k <= m; ++k) {
      ss += static_cast<T>(k) * a[k] * c[m - k];
      cc -= static_cast<T>(k) * a[k] * s[m - k];
    }
    s[m] = ss / static_cast<T>(m);
    c[m] = cc / static_cast<T>(m);
  }
}

template <typename T, int N>
Jet<T, N> sin(const Jet<T, N>& a) {
  Jet<T, N> s, c;
  sincos(a, s, c);
  return s;
}

template <typename T, int N>
Jet<T, N> cos(const Jet<T, N>& a) {
  Jet<T, N> s, c;
  sincos(a, s, c);
  return c;
}

// e_m = (1/m) sum_{k=1..m} k a_k e_{m-k}
template <typename T, int N>
Jet<T, N> exp(const Jet<T, N>& a) {
  using std::exp;
  Jet<T, N> e(exp(a[0]));
  for (int m = 1; m <= N; ++m) {
    T acc{};
    for (int k = 1; k <= m; ++k) acc += static_cast<T>(k) * a[k] * e[m - k];
    e[m] = acc / static_cast<T>(m);
  }
  return e;
}

template <typename T, int N>
Jet<T, N> pow(const Jet<T, N>& a, int p) {
  if (p < 0) return T(1) / pow(a, -p);
  Jet<T, N> result(T(1)), base = a;
  while (p > 0) {
    if (p & 1) result = result * base;
    base = base * base;
    p >>= 1;
  }
  return result;
}

/// Bivariate jet in (s, t): c[p][q] = d^{p+q} f / ds^p dt^q / (p! q!),
/// truncated at p <= P, q <= Q.
template <int P, int Q, typename T = double>
class BiJet {
 public:
  static constexpr int kP = P;
  static constexpr int kQ = Q;

  constexpr BiJet() = default;
  constexpr BiJet(T value) { c_[0][0] = value; }  // NOLINT(google-explicit-constructor)

  /// value + ds * s + dt * t
  static constexpr BiJet variable(T value, T ds, T dt) {
    BiJet j(value);
    if constexpr (P >= 1) j.c_[1][0] = ds;
    if constexpr (Q >= 1) j.c_[0][1] = dt;
    return j;
  }

  constexpr T& operator()(int p, int q) { return c_[p][q]; }
  constexpr const T& operator()(int p, int q) const { return c_[p][q]; }
  constexpr T value() const { return c_[0][0]; }

  /// d^{p+q} f / ds^p dt^q at the origin.
  T raw(int p, int q) const {
    return c_[p][q] * static_cast<T>(detail::factorial(p) * detail::factorial(q));
  }

  BiJet& operator+=(const BiJet& o) {
    for (int p = 0; p <= P; ++p)
      for (int q = 0; q <= Q; ++q) c_[p][q] += o.c_[p][q];
    return *this;
  }
  BiJet& operator-=(const BiJet& o) {
    for (int p = 0; p <= P; ++p)
      for (int q = 0; q <= Q; ++q) c_[p][q] -= o.c_[p][q];
    return *this;
  }
  BiJet& operator*=(T s) {
    for (auto& row : c_)
      for (auto& v : row) v *= s;
    return *this;
  }

  friend BiJet operator-(BiJet a) { return a *= T(-1); }
  friend BiJet operator+(BiJet a, const BiJet& b) { return a += b; }
  friend BiJet operator-(BiJet a, const BiJet& b) { return a -= b; }
  friend BiJet operator+(BiJet a, T s) { a.c_[0][0] += s; return a; }
  friend BiJet operator+(T s, BiJet a) { a.c_[0][0] += s; return a; }
  friend BiJet operator-(BiJet a, T s) { a.c_[0][0] -= s; return a; }
  friend BiJet operator-(T s, const BiJet& a) { return BiJet(s) - a; }
  friend BiJet operator*(BiJet a, T s) { return a *= s; }
  friend BiJet operator*(T s, BiJet a) { return a *= s; }

  friend BiJet operator*(const BiJet& a, const BiJet& b) {
    BiJet r;
    for (int p = 0; p <= P; ++p)
      for (int q = 0; q <= Q; ++q) {
        T acc{};
        for (int i = 0; i <= p; ++i)
          for (int j = 0; j <= q; ++j) acc += a.c_[i][j] * b.c_[p - i][q - j];
        r.c_[p][q] = acc;
      }
    return r;
  }

  friend BiJet operator/(const BiJet& a, const BiJet& b) {
    if (b.c_[0][0] == T{}) throw SingularJetError("jet division by a series with zero constant term");
    // 1/b = sum_k (-1)^k btilde^k / b0^{k+1}
    const T b0 = b.c_[0][0];
    std::array<T, P + Q + 1> coeff{};
    T inv = T(1) / b0;
    for (int k = 0; k <= P + Q; ++k) {
      coeff[k] = (k % 2 == 0 ? inv : -inv);
      inv /= b0;
    }
    return a * b.compose(coeff);
  }
  friend BiJet operator/(BiJet a, T s) {
    if (s == T{}) throw SingularJetError("jet division by zero scalar");
    return a *= T(1) / s;
  }
  friend BiJet operator/(T s, const BiJet& b) { return BiJet(s) / b; }

  /// f(a) where coeff[k] = f^(k)(a0) / k!. The non-constant part is nilpotent of
  /// index P+Q+1, so the expansion is exact to the truncation order.
  BiJet compose(const std::array<T, P + Q + 1>& coeff) const {
    BiJet tilde = *this;
    tilde.c_[0][0] = T{};
    BiJet result(coeff[0]);
    BiJet power(T(1));
    for (int k = 1; k <= P + Q; ++k) {
      power = power * tilde;
      result += power * coeff[k];
    }
    return result;
  }

 private:
  std::array<std::array<T, Q + 1>, P + 1> c_{};
};

template <int P, int Q, typename T>
BiJet<P, Q, T> sin(const BiJet<P, Q, T>& a) {
  std::array<T, P + Q + 1> coeff{};
  const T s = std::sin(a.value()), c = std::cos(a.value());
  const T cycle[4] = {s, c, -s, -c};
  for (int k = 0; k <= P + Q; ++k) coeff[k] = cycle[k % 4] / static_cast<T>(detail::factorial(k));
  return a.compose(coeff);
}

template <int P, int Q, typename T>
BiJet<P, Q, T> cos(const BiJet<P, Q, T>& a) {
  std::array<T, P + Q + 1> coeff{};
  const T s = std::sin(a.value()), c = std::cos(a.value());
  const T cycle[4] = {c, -s, -c, s};
  for (int k = 0; k <= P + Q; ++k) coeff[k] = cycle[k % 4] / static_cast<T>(detail::factorial(k));
  return a.compose(coeff);
}

template <int P, int Q, typename T>
BiJet<P, Q, T> exp(const BiJet<P, Q, T>& a) {
  std::array<T, P + Q + 1> coeff{};
  const T e = std::exp(a.value());
  for (int k = 0; k <= P + Q; ++k) coeff[k] = e / static_cast<T>(detail::factorial(k));
  return a.compose(coeff);
}

template <int P, int Q, typename T>
BiJet<P, Q, T> pow(const BiJet<P, Q, T>& a, int p) {
  if (p < 0) return T(1) / pow(a, -p);
  BiJet<P, Q, T> result(T(1)), base = a;
  while (p > 0) {
    if (p & 1) result = result * base;
    base = base * base;
    p >>= 1;
  }
  return result;
}

using Jet4 = Jet<double, 4>;
/// Coordinate order <= 2 in s, directional order <= 4 in t.
using BiJet24 = BiJet<2, 4>;

}  // namespace nnpde
