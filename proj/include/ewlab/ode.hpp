#ifndef EWLAB_ODE_HPP
#define EWLAB_ODE_HPP

// Dormand-Prince 5(4) adaptive integrator for small dense systems.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ewlab::ode {

struct StepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// integrate y' = f(t, y) from t0 to t1
template <class F>
std::vector<double> integrate(F&& f, std::vector<double> y, double t0,
                              double t1, double rtol = 1e-12,
                              double atol = 1e-14) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n),
      ynew(n);
  double t = t0;
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  double h = dir * std::min(std::fabs(t1 - t0), 0.1 * std::fabs(t1 - t0) + 1e-3);
  if (h == 0.0) return y;
  f(t, y, k1);
  int guard = 0;
  while (dir * (t1 - t) > 1e-15 * std::fabs(t1 - t0) + 1e-300) {
    if (++guard > 1000000) throw StepError("transport: too many steps");
    if (dir * (t + h - t1) > 0.0) h = t1 - t;
    auto stage = [&](std::vector<double>& k, double cc,
                     std::initializer_list<std::pair<const std::vector<double>*,
                                                     double>> terms) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = y[i];
        for (const auto& [kv, av] : terms) s += h * av * (*kv)[i];
        tmp[i] = s;
      }
      f(t + cc * h, tmp, k);
    };
    stage(k2, c2, {{&k1, a21}});
    stage(k3, c3, {{&k1, a31}, {&k2, a32}});
    stage(k4, c4, {{&k1, a41}, {&k2, a42}, {&k3, a43}});
    stage(k5, c5, {{&k1, a51}, {&k2, a52}, {&k3, a53}, {&k4, a54}});
    stage(k6, 1.0,
          {{&k1, a61}, {&k2, a62}, {&k3, a63}, {&k4, a64}, {&k5, a65}});
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                            b5 * k5[i] + b6 * k6[i]);
    f(t + h, ynew, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                             e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc =
          atol + rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / static_cast<double>(n));
    if (err <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;  // FSAL
    }
    const double fac =
        std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    h *= fac;
    if (std::fabs(h) < 1e-14 * std::fabs(t1 - t0))
      throw StepError("transport: step-size underflow");
  }
  return y;
}

}  // namespace ewlab::ode

#endif
