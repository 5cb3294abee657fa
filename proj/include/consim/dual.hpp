#pragma once

#include <cmath>
#include <cstddef>
#include <type_traits>
#include <vector>

namespace consim {

/// Forward-mode number carrying a value and one partial per seed variable.
/// The component type T may itself be a Dual, which propagates one extra
/// derivative order per nesting level.
template <class T>
struct Dual {
  using value_type = T;
  T v{};
  std::vector<T> d;
};

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.v);
}

template <class S>
S make_constant(double c, std::size_t n_seeds) {
  if constexpr (std::is_same_v<S, double>) {
    (void)n_seeds;
    return c;
  } else {
    using T = typename S::value_type;
    S r;
    r.v = make_constant<T>(c, n_seeds);
    r.d.assign(n_seeds, make_constant<T>(0.0, n_seeds));
    return r;
  }
}

/// Seeds variable `slot` with value x: the value part is the same variable
/// one order down, the partials are the Kronecker delta.
template <class S>
S make_seed(double x, std::size_t slot, std::size_t n_seeds) {
  if constexpr (std::is_same_v<S, double>) {
    (void)slot;
    (void)n_seeds;
    return x;
  } else {
    using T = typename S::value_type;
    S r;
    r.v = make_seed<T>(x, slot, n_seeds);
    r.d.assign(n_seeds, make_constant<T>(0.0, n_seeds));
    r.d[slot] = make_constant<T>(1.0, n_seeds);
    return r;
  }
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r;
  r.v = a.v + b.v;
  r.d.resize(a.d.size());
  for (std::size_t i = 0; i < a.d.size(); ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}

template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r;
  r.v = a.v - b.v;
  r.d.resize(a.d.size());
  for (std::size_t i = 0; i < a.d.size(); ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}

template <class T>
Dual<T> operator-(const Dual<T>& a) {
  Dual<T> r;
  r.v = -a.v;
  r.d.resize(a.d.size());
  for (std::size_t i = 0; i < a.d.size(); ++i) r.d[i] = -a.d[i];
  return r;
}

template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r;
  r.v = a.v * b.v;
  r.d.resize(a.d.size());
  for (std::size_t i = 0; i < a.d.size(); ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}

template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  Dual<T> r;
  r.v = a.v / b.v;
  r.d.resize(a.d.size());
  for (std::size_t i = 0; i < a.d.size(); ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) / b.v;
  return r;
}

template <class T>
Dual<T> operator+(const Dual<T>& a, double b) {
  Dual<T> r = a;
  r.v = r.v + b;
  return r;
}
template <class T>
Dual<T> operator+(double a, const Dual<T>& b) {
  return b + a;
}

template <class T>
Dual<T> operator-(const Dual<T>& a, double b) {
  Dual<T> r = a;
  r.v = r.v - b;
  return r;
}
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) {
  return -(b - a);
}

template <class T>
Dual<T> operator*(const Dual<T>& a, double b) {
  Dual<T> r;
  r.v = a.v * b;
  r.d.resize(a.d.size());
  for (std::size_t i = 0; i < a.d.size(); ++i) r.d[i] = a.d[i] * b;
  return r;
}
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) {
  return b * a;
}

template <class T>
Dual<T> operator/(const Dual<T>& a, double b) {
  return a * (1.0 / b);
}

template <class T>
Dual<T> sin(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  Dual<T> r;
  r.v = sin(x.v);
  const T c = cos(x.v);
  r.d.resize(x.d.size());
  for (std::size_t i = 0; i < x.d.size(); ++i) r.d[i] = c * x.d[i];
  return r;
}

template <class T>
Dual<T> cos(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  Dual<T> r;
  r.v = cos(x.v);
  const T s = sin(x.v);
  r.d.resize(x.d.size());
  for (std::size_t i = 0; i < x.d.size(); ++i) r.d[i] = -(s * x.d[i]);
  return r;
}

template <class T>
Dual<T> tanh(const Dual<T>& x) {
  using std::tanh;
  Dual<T> r;
  r.v = tanh(x.v);
  const T sech2 = 1.0 - r.v * r.v;
  r.d.resize(x.d.size());
  for (std::size_t i = 0; i < x.d.size(); ++i) r.d[i] = sech2 * x.d[i];
  return r;
}

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  using std::sqrt;
  Dual<T> r;
  r.v = sqrt(x.v);
  r.d.resize(x.d.size());
  for (std::size_t i = 0; i < x.d.size(); ++i) r.d[i] = x.d[i] / (2.0 * r.v);
  return r;
}

template <class T>
Dual<T> exp(const Dual<T>& x) {
  using std::exp;
  Dual<T> r;
  r.v = exp(x.v);
  r.d.resize(x.d.size());
  for (std::size_t i = 0; i < x.d.size(); ++i) r.d[i] = r.v * x.d[i];
  return r;
}

}  // namespace consim
