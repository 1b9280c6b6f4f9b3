#ifndef EWLAB_FIELD_HPP
#define EWLAB_FIELD_HPP

// Scalar fields on a chart and the derivative engine.
//
// Built-in fields carry closed forms evaluated in jet arithmetic, so their
// partials are exact to round-off.  Parsed user expressions fall back to
// central finite differences: 5-point 4th-order stencils for first and
// second derivatives, nested first-differences of the hessian (Richardson
// refined) for third derivatives.

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "ewlab/chart.hpp"
#include "ewlab/expr.hpp"
#include "ewlab/jet.hpp"

namespace ewlab {

struct Jet3 {
  double value = 0.0;
  Vec3 grad{};
  double hess[3][3]{};
  double third[3][3][3]{};
};

struct ScalarField {
  Chart chart;
  std::string label;
  std::function<double(const Vec3&)> eval_d;
  // analytic path; empty for parsed / FD-backed fields
  std::function<Jet(const std::array<Jet, 3>&)> eval_jet;
  std::optional<std::string> source_text;
  ExprPtr tree;

  bool analytic() const { return static_cast<bool>(eval_jet); }
  double operator()(const Vec3& p) const { return eval_d(p); }
};

template <class F>
ScalarField make_analytic(const Chart& chart, F f, std::string label = "") {
  ScalarField s;
  s.chart = chart;
  s.label = std::move(label);
  s.eval_d = [f](const Vec3& p) { return f(p[0], p[1], p[2]); };
  s.eval_jet = [f](const std::array<Jet, 3>& v) { return f(v[0], v[1], v[2]); };
  return s;
}

inline ScalarField constant_field(const Chart& chart, double c) {
  return make_analytic(chart, [c](auto x, auto, auto) { return x * 0.0 + c; },
                       "const");
}

inline ScalarField parse_expression(const std::string& text,
                                    const Chart& chart) {
  ScalarField s;
  s.chart = chart;
  s.label = text;
  s.source_text = text;
  s.tree = parse_expression_text(text, chart.coords);
  auto tree = s.tree;
  s.eval_d = [tree](const Vec3& p) {
    return tree->eval<double>({p[0], p[1], p[2]});
  };
  // the tree evaluates over jets too, but per engine policy user
  // expressions are differentiated by finite differences
  return s;
}

namespace detail {

inline double fd_step(double coord, double h0) {
  return h0 * std::max(1.0, std::fabs(coord));
}

// 4th-order first derivative, 5-point
template <class F1>
double fd1(F1&& f, double h) {
  return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
}

// 4th-order second derivative, 5-point
template <class F1>
double fd2(F1&& f, double h) {
  return (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) -
          f(-2.0 * h)) /
         (12.0 * h * h);
}

}  // namespace detail

inline constexpr double kFdStep = 1e-3;
inline constexpr double kFdThirdStep = 4e-3;  // outer step for third derivs

// Gradient and hessian of a plain double-valued function by central
// differences.  `steps` are per-coordinate.
inline void fd_grad_hess(const std::function<double(const Vec3&)>& f,
                         const Vec3& p, const Vec3& steps, Vec3& grad,
                         double hess[3][3]) {
  auto shifted = [&](int i, double di, int j, double dj) {
    Vec3 q = p;
    q[i] += di;
    if (j >= 0) q[j] += dj;
    return f(q);
  };
  for (int i = 0; i < 3; ++i) {
    const double h = steps[i];
    grad[i] = detail::fd1([&](double d) { return shifted(i, d, -1, 0.0); }, h);
    hess[i][i] =
        detail::fd2([&](double d) { return shifted(i, d, -1, 0.0); }, h);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double hi = steps[i], hj = steps[j];
      // nested 4th-order first differences
      auto dj_at = [&](double di) {
        return detail::fd1([&](double dj) { return shifted(i, di, j, dj); },
                           hj);
      };
      hess[i][j] = hess[j][i] = detail::fd1(dj_at, hi);
    }
}

namespace detail {

inline void fd_third(const std::function<double(const Vec3&)>& f, const Vec3& p,
                     const Vec3& steps, double third[3][3][3]) {
  double raw[3][3][3];
  auto hess_at = [&](int dir, double d) {
    Vec3 q = p;
    q[dir] += d;
    Vec3 g;
    double h[3][3];
    fd_grad_hess(f, q, steps, g, h);
    return std::array<double, 9>{h[0][0], h[0][1], h[0][2], h[1][0], h[1][1],
                                 h[1][2], h[2][0], h[2][1], h[2][2]};
  };
  for (int i = 0; i < 3; ++i) {
    const double H = fd_step(p[i], kFdThirdStep);
    // 4th-order outer stencil at H and H/2, Richardson-combined to 6th
    auto outer = [&](double h) {
      const auto fp2 = hess_at(i, 2.0 * h), fp1 = hess_at(i, h),
                 fm1 = hess_at(i, -h), fm2 = hess_at(i, -2.0 * h);
      std::array<double, 9> d;
      for (int k = 0; k < 9; ++k)
        d[k] = (-fp2[k] + 8.0 * fp1[k] - 8.0 * fm1[k] + fm2[k]) / (12.0 * h);
      return d;
    };
    const auto dH = outer(H), dH2 = outer(0.5 * H);
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const int idx = 3 * j + k;
        raw[i][j][k] = (16.0 * dH2[idx] - dH[idx]) / 15.0;
      }
  }
  // symmetrise over index permutations; computed once per sorted triple so
  // the result is bit-identical under index exchange
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      for (int k = j; k < 3; ++k) {
        const double v = (raw[i][j][k] + raw[i][k][j] + raw[j][i][k] +
                          raw[j][k][i] + raw[k][i][j] + raw[k][j][i]) /
                         6.0;
        third[i][j][k] = third[i][k][j] = third[j][i][k] = v;
        third[j][k][i] = third[k][i][j] = third[k][j][i] = v;
      }
}

}  // namespace detail

inline Jet3 fd_jet3(const std::function<double(const Vec3&)>& f, const Vec3& p) {
  Jet3 out;
  out.value = f(p);
  if (!std::isfinite(out.value))
    throw DomainError("non-finite field value at probe point");
  Vec3 steps;
  for (int i = 0; i < 3; ++i) steps[i] = detail::fd_step(p[i], kFdStep);
  fd_grad_hess(f, p, steps, out.grad, out.hess);
  detail::fd_third(f, p, steps, out.third);
  return out;
}

inline Jet3 jet3_from_jet(const Jet& j) {
  Jet3 out;
  out.value = j.value();
  for (int i = 0; i < 3; ++i) out.grad[i] = j.grad(i);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) out.hess[i][k] = j.hess(i, k);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) out.third[i][k][l] = j.third(i, k, l);
  return out;
}

inline Jet jet_from_jet3(const Jet3& j3, int deg = 3) {
  Jet j(j3.value, std::min(deg, 3));
  const auto& T = detail::kJT;
  auto set = [&](int a, int b, int c, double v) {
    j.c[T.idx[a][b][c]] = v;
  };
  if (j.deg >= 1)
    for (int i = 0; i < 3; ++i) {
      int e[3] = {0, 0, 0};
      e[i] = 1;
      set(e[0], e[1], e[2], j3.grad[i]);
    }
  if (j.deg >= 2)
    for (int i = 0; i < 3; ++i)
      for (int k = i; k < 3; ++k) {
        int e[3] = {0, 0, 0};
        e[i] += 1;
        e[k] += 1;
        set(e[0], e[1], e[2], (i == k) ? 0.5 * j3.hess[i][k] : j3.hess[i][k]);
      }
  if (j.deg >= 3) {
    static constexpr double fact[4] = {1, 1, 2, 6};
    for (int i = 0; i < 3; ++i)
      for (int k = i; k < 3; ++k)
        for (int l = k; l < 3; ++l) {
          int e[3] = {0, 0, 0};
          e[i] += 1;
          e[k] += 1;
          e[l] += 1;
          set(e[0], e[1], e[2],
              j3.third[i][k][l] / (fact[e[0]] * fact[e[1]] * fact[e[2]]));
        }
  }
  return j;
}

// Full jet of a field at p.  Analytic fields honour any requested degree;
// FD-backed fields top out at degree 3.
inline Jet field_jet(const ScalarField& s, const Vec3& p, int deg) {
  require_margin_safe(s.chart, p);
  if (s.analytic()) {
    std::array<Jet, 3> v{Jet::variable(p[0], 0, deg), Jet::variable(p[1], 1, deg),
                         Jet::variable(p[2], 2, deg)};
    Jet j = s.eval_jet(v);
    if (!std::isfinite(j.value()))
      throw DomainError("non-finite field value at probe point");
    return j;
  }
  return jet_from_jet3(fd_jet3(s.eval_d, p), std::min(deg, 3));
}

inline Jet3 eval_jet3(const ScalarField& s, const Vec3& p) {
  require_margin_safe(s.chart, p);
  if (s.analytic()) return jet3_from_jet(field_jet(s, p, 4));
  return fd_jet3(s.eval_d, p);
}

struct ConvergenceResult {
  double order = 0.0;
  bool saturated = false;
};

// Empirical order of the first-derivative stencil from the error ratio at
// steps h and h/2, against a Richardson-refined h/8 reference.
inline ConvergenceResult convergence_order(const ScalarField& s, const Vec3& p,
                                           int dir = 0, double h = 0.05) {
  require_margin_safe(s.chart, p);
  auto f = [&](double d) {
    Vec3 q = p;
    q[dir] += d;
    return s.eval_d(q);
  };
  auto d1 = [&](double step) { return detail::fd1(f, step); };
  const double ref_raw = d1(h / 8.0), ref_half = d1(h / 16.0);
  const double ref = (16.0 * ref_half - ref_raw) / 15.0;
  const double scale = std::max(1.0, std::fabs(ref));
  const double e1 = std::fabs(d1(h) - ref);
  const double e2 = std::fabs(d1(0.5 * h) - ref);
  if (e1 < 1e-12 * scale || e2 < 1e-13 * scale) return {0.0, true};
  return {std::log2(e1 / e2), false};
}

}  // namespace ewlab

#endif
