#ifndef EWLAB_JET_HPP
#define EWLAB_JET_HPP

// Truncated trivariate Taylor expansions ("jets") up to total degree 4.
// All closed-form catalog geometry is differentiated by evaluating it in
// this arithmetic, which gives derivatives to round-off.

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ewlab {

inline constexpr int kJetMaxDeg = 4;
inline constexpr int kJetTerms = 35;  // monomials x^a y^b z^c with a+b+c <= 4

namespace detail {

struct JetTables {
  // exponent triple for each packed index
  std::array<std::array<int, 3>, kJetTerms> mono{};
  // packed index for each exponent triple (or -1)
  int idx[kJetMaxDeg + 1][kJetMaxDeg + 1][kJetMaxDeg + 1]{};
  int degree[kJetTerms]{};

  constexpr JetTables() {
    for (int a = 0; a <= kJetMaxDeg; ++a)
      for (int b = 0; b <= kJetMaxDeg; ++b)
        for (int c = 0; c <= kJetMaxDeg; ++c) idx[a][b][c] = -1;
    int n = 0;
    for (int d = 0; d <= kJetMaxDeg; ++d)
      for (int a = d; a >= 0; --a)
        for (int b = d - a; b >= 0; --b) {
          const int c = d - a - b;
          mono[n] = {a, b, c};
          idx[a][b][c] = n;
          degree[n] = d;
          ++n;
        }
  }
};

inline constexpr JetTables kJT{};

}  // namespace detail

class Jet {
 public:
  int deg = kJetMaxDeg;  // truncation degree the coefficients are valid to
  std::array<double, kJetTerms> c{};

  Jet() = default;
  Jet(double v, int degree = kJetMaxDeg) : deg(degree) { c[0] = v; }

  static Jet variable(double v, int dir, int degree = kJetMaxDeg) {
    Jet j(v, degree);
    if (degree >= 1) {
      std::array<int, 3> e{0, 0, 0};
      e[dir] = 1;
      j.c[detail::kJT.idx[e[0]][e[1]][e[2]]] = 1.0;
    }
    return j;
  }

  double value() const { return c[0]; }
  double grad(int i) const {
    std::array<int, 3> e{0, 0, 0};
    e[i] = 1;
    return c[detail::kJT.idx[e[0]][e[1]][e[2]]];
  }
  double hess(int i, int j) const {
    std::array<int, 3> e{0, 0, 0};
    e[i] += 1;
    e[j] += 1;
    const double coeff = c[detail::kJT.idx[e[0]][e[1]][e[2]]];
    return (i == j) ? 2.0 * coeff : coeff;
  }
  double third(int i, int j, int k) const {
    std::array<int, 3> e{0, 0, 0};
    e[i] += 1;
    e[j] += 1;
    e[k] += 1;
    const double coeff = c[detail::kJT.idx[e[0]][e[1]][e[2]]];
    // multiply by a!b!c! to convert a Taylor coefficient to a derivative
    static constexpr double fact[5] = {1, 1, 2, 6, 24};
    return coeff * fact[e[0]] * fact[e[1]] * fact[e[2]];
  }

  Jet& operator+=(const Jet& o) {
    deg = std::min(deg, o.deg);
    for (int i = 0; i < kJetTerms; ++i) c[i] += o.c[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    deg = std::min(deg, o.deg);
    for (int i = 0; i < kJetTerms; ++i) c[i] -= o.c[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (int i = 0; i < kJetTerms; ++i) c[i] *= s;
    return *this;
  }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator-(Jet a) {
  for (auto& x : a.c) x = -x;
  return a;
}
inline Jet operator+(Jet a, double s) {
  a.c[0] += s;
  return a;
}
inline Jet operator+(double s, Jet a) {
  a.c[0] += s;
  return a;
}
inline Jet operator-(Jet a, double s) {
  a.c[0] -= s;
  return a;
}
inline Jet operator-(double s, const Jet& a) { return (-a) + s; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r(0.0, std::min(a.deg, b.deg));
  const auto& T = detail::kJT;
  for (int i = 0; i < kJetTerms; ++i) {
    if (T.degree[i] > r.deg || a.c[i] == 0.0) continue;
    const auto& ma = T.mono[i];
    for (int j = 0; j < kJetTerms; ++j) {
      if (T.degree[i] + T.degree[j] > r.deg || b.c[j] == 0.0) continue;
      const auto& mb = T.mono[j];
      r.c[T.idx[ma[0] + mb[0]][ma[1] + mb[1]][ma[2] + mb[2]]] +=
          a.c[i] * b.c[j];
    }
  }
  return r;
}

// d/dx_dir of a truncated expansion; valid one degree lower.
inline Jet deriv(const Jet& a, int dir) {
  Jet r(0.0, std::max(0, a.deg - 1));
  const auto& T = detail::kJT;
  for (int i = 0; i < kJetTerms; ++i) {
    if (a.c[i] == 0.0) continue;
    auto m = T.mono[i];
    if (m[dir] == 0) continue;
    const double mult = m[dir];
    m[dir] -= 1;
    r.c[T.idx[m[0]][m[1]][m[2]]] += mult * a.c[i];
  }
  return r;
}

namespace detail {

// f(u) from the Taylor coefficients d[k] = f^(k)(u.value())/k!
inline Jet compose(const Jet& u, const std::array<double, kJetMaxDeg + 1>& d) {
  Jet w = u;
  w.c[0] = 0.0;  // nilpotent part
  Jet r(d[0], u.deg);
  Jet p(1.0, u.deg);
  for (int k = 1; k <= u.deg; ++k) {
    p = p * w;
    r += d[k] * p;
  }
  return r;
}

}  // namespace detail

// double overloads so that closed forms written against the generic
// interface evaluate unchanged on plain numbers
using std::atan;
using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::sin;
using std::sinh;
using std::sqrt;
using std::tan;
inline double recip(double x) {
  if (x == 0.0) throw std::domain_error("reciprocal of zero");
  return 1.0 / x;
}
inline double ipow(double x, int n) { return std::pow(x, n); }
inline double pow_halfint(double x, int twice_exponent) {
  return std::pow(x, 0.5 * twice_exponent);
}

inline Jet exp(const Jet& u) {
  const double e = std::exp(u.value());
  return detail::compose(u, {e, e, e / 2.0, e / 6.0, e / 24.0});
}

inline Jet log(const Jet& u) {
  const double v = u.value();
  if (!(v > 0.0)) throw std::domain_error("jet: log of non-positive value");
  const double iv = 1.0 / v;
  return detail::compose(u, {std::log(v), iv, -iv * iv / 2.0,
                             iv * iv * iv / 3.0, -iv * iv * iv * iv / 4.0});
}

inline Jet sqrt(const Jet& u) {
  const double v = u.value();
  if (!(v > 0.0)) throw std::domain_error("jet: sqrt of non-positive value");
  const double s = std::sqrt(v), iv = 1.0 / v;
  return detail::compose(
      u, {s, 0.5 * s * iv, -0.125 * s * iv * iv, 0.0625 * s * iv * iv * iv,
          -(5.0 / 128.0) * s * iv * iv * iv * iv});
}

inline Jet sin(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return detail::compose(u, {s, c, -s / 2.0, -c / 6.0, s / 24.0});
}

inline Jet cos(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return detail::compose(u, {c, -s, -c / 2.0, s / 6.0, c / 24.0});
}

inline Jet sinh(const Jet& u) {
  const double s = std::sinh(u.value()), c = std::cosh(u.value());
  return detail::compose(u, {s, c, s / 2.0, c / 6.0, s / 24.0});
}

inline Jet cosh(const Jet& u) {
  const double s = std::sinh(u.value()), c = std::cosh(u.value());
  return detail::compose(u, {c, s, c / 2.0, s / 6.0, c / 24.0});
}

inline Jet atan(const Jet& u) {
  const double x = u.value(), q = 1.0 / (1.0 + x * x);
  return detail::compose(u, {std::atan(x), q, -x * q * q,
                             (6.0 * x * x - 2.0) * q * q * q / 6.0,
                             (24.0 * x - 24.0 * x * x * x) * q * q * q * q /
                                 24.0});
}

inline Jet recip(const Jet& u) {
  const double v = u.value();
  if (v == 0.0) throw std::domain_error("jet: division by zero");
  const double iv = 1.0 / v;
  return detail::compose(
      u, {iv, -iv * iv, iv * iv * iv, -iv * iv * iv * iv,
          iv * iv * iv * iv * iv});
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }
inline Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }
inline Jet operator/(double s, const Jet& b) { return recip(b) * s; }

inline Jet tan(const Jet& u) { return sin(u) / cos(u); }

inline Jet ipow(const Jet& u, int n) {
  if (n < 0) return recip(ipow(u, -n));
  Jet r(1.0, u.deg);
  Jet base = u;
  int e = n;
  while (e > 0) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

// Exponents restricted to integers and half-integers; half-integer powers
// go through sqrt so the catalog's rho^(1/2)-type factors stay exact.
inline Jet pow_halfint(const Jet& u, int twice_exponent) {
  if (twice_exponent % 2 == 0) return ipow(u, twice_exponent / 2);
  return ipow(sqrt(u), twice_exponent);
}

}  // namespace ewlab

#endif
