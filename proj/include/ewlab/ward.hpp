#ifndef EWLAB_WARD_HPP
#define EWLAB_WARD_HPP

// Axially symmetric harmonic profiles V(rho,eta) and the explicit
// Einstein-Weyl spaces they generate:
//
//   g     = (V_rho^2 + V_eta^2)(drho^2 + deta^2) + dpsi^2
//   omega = [2 V_rho V_eta deta + (V_rho^2 - V_eta^2) drho]
//           / (rho (V_rho^2 + V_eta^2))
//
// plus the rho^2 rescaling to the LeBrun-Ward gauge, the height
// coordinate, the hyperbolic-eigenfunction form and the Joyce form.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ewlab/field.hpp"
#include "ewlab/weyl.hpp"

namespace ewlab {

struct HarmonicProfile {
  std::string label;
  Chart chart;  // (rho, eta, psi); V does not depend on psi
  std::function<double(double, double)> V;
  // analytic path; empty means finite differences
  std::function<Jet(const Jet&, const Jet&)> Vjet;
  std::map<std::string, double> params;

  bool analytic() const { return static_cast<bool>(Vjet); }
};

template <class F>
HarmonicProfile make_profile(const Chart& chart, F f, std::string label,
                             std::map<std::string, double> params = {}) {
  HarmonicProfile p;
  p.label = std::move(label);
  p.chart = chart;
  p.params = std::move(params);
  p.V = [f](double rho, double eta) { return f(rho, eta); };
  p.Vjet = [f](const Jet& rho, const Jet& eta) { return f(rho, eta); };
  return p;
}

// V as a scalar field on the (rho,eta,psi) chart (psi-independent)
inline ScalarField profile_field(const HarmonicProfile& p) {
  ScalarField s;
  s.chart = p.chart;
  s.label = p.label;
  auto V = p.V;
  s.eval_d = [V](const Vec3& q) { return V(q[0], q[1]); };
  if (p.analytic()) {
    auto Vj = p.Vjet;
    s.eval_jet = [Vj](const std::array<Jet, 3>& v) { return Vj(v[0], v[1]); };
  }
  return s;
}

inline HarmonicProfile parse_profile(const std::string& text,
                                     const Chart& chart) {
  HarmonicProfile p;
  p.label = text;
  p.chart = chart;
  ScalarField s = parse_expression(text, chart);
  auto ev = s.eval_d;
  p.V = [ev](double rho, double eta) { return ev({rho, eta, 0.0}); };
  return p;
}

// V(rho) ... jets at a point, degree-capped for FD profiles
inline Jet profile_jet(const HarmonicProfile& p, const Vec3& q, int deg) {
  require_margin_safe(p.chart, q);
  if (p.analytic()) {
    Jet j = p.Vjet(Jet::variable(q[0], 0, deg), Jet::variable(q[1], 1, deg));
    if (!std::isfinite(j.value()))
      throw DomainError("non-finite profile value at probe point");
    return j;
  }
  auto V = p.V;
  return jet_from_jet3(
      fd_jet3([V](const Vec3& r) { return V(r[0], r[1]); }, q),
      std::min(deg, 3));
}

// residual of (rho V_rho)_rho + rho V_etaeta = V_rho + rho(V_rhorho + V_etaeta)
inline double harmonic_residual(const HarmonicProfile& p, const Vec3& q) {
  Jet V = profile_jet(p, q, 2);
  return V.grad(0) + q[0] * (V.hess(0, 0) + V.hess(1, 1));
}

// with v = rho^{1/2} V: v_rhorho + v_etaeta + (1/4) rho^{-2} v
inline double eigenfunction_residual(const HarmonicProfile& p, const Vec3& q) {
  Jet V = profile_jet(p, q, 2);
  const double r = q[0], sr = std::sqrt(r);
  const double v = sr * V.value();
  const double vrr = -0.25 * V.value() / (r * sr) + V.grad(0) / sr +
                     sr * V.hess(0, 0);
  const double vee = sr * V.hess(1, 1);
  return vrr + vee + 0.25 * v / (r * r);
}

inline WeylStructure ward_build(const HarmonicProfile& p) {
  WeylStructure w;
  w.chart = p.chart;
  w.provenance = "ward:" + p.label;
  HarmonicProfile prof = p;
  w.geom = [prof](const Vec3& q, int deg) {
    // one derivative of V enters g, so ask for one degree more
    Jet V = profile_jet(prof, q, std::min(deg + 1, kJetMaxDeg));
    Jet Vr = deriv(V, 0), Ve = deriv(V, 1);
    Jet W = Vr * Vr + Ve * Ve;
    if (W.value() < 1e-8)
      throw DomainError("degenerate profile: |dV| vanishes at probe point");
    Jet rho = Jet::variable(q[0], 0, W.deg);
    GeomJets G;
    const int d = W.deg;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) G.g[i][j] = Jet(0.0, d);
    G.g[0][0] = W;
    G.g[1][1] = W;
    G.g[2][2] = Jet(1.0, d);
    Jet den = recip(rho * W);
    G.om[0] = (Vr * Vr - Ve * Ve) * den;
    G.om[1] = 2.0 * Vr * Ve * den;
    G.om[2] = Jet(0.0, d);
    return G;
  };
  return w;
}

// rescale by rho^2: the LeBrun-Ward gauge of the canonical Toda structure
inline WeylStructure lw_gauge(const WeylStructure& ward) {
  ScalarField f = make_analytic(
      ward.chart, [](auto rho, auto, auto) { return log(rho); }, "log(rho)");
  return gauge_transform(ward, f);
}

// integral of the closed height form rho V_eta drho - rho V_rho deta along a
// polyline; 5-point Gauss-Legendre per segment
inline double lw_height(const HarmonicProfile& p, const std::vector<Vec3>& path,
                        int nseg = 32) {
  static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665,
                               0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  double z = 0.0;
  for (std::size_t s = 0; s + 1 < path.size(); ++s) {
    const Vec3 &a = path[s], &b = path[s + 1];
    for (int m = 0; m < nseg; ++m) {
      const double t0 = static_cast<double>(m) / nseg,
                   t1 = static_cast<double>(m + 1) / nseg;
      for (int k = 0; k < 5; ++k) {
        const double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * gx[k];
        Vec3 q{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]),
               a[2] + t * (b[2] - a[2])};
        Jet V = profile_jet(p, q, 1);
        const double frho = q[0] * V.grad(1), feta = -q[0] * V.grad(0);
        z += 0.5 * (t1 - t0) * gw[k] *
             (frho * (b[0] - a[0]) + feta * (b[1] - a[1]));
      }
    }
  }
  return z;
}

// loop defect of the height form on the margin-shrunk rectangle through q
inline double lw_height_loop_defect(const HarmonicProfile& p, const Vec3& lo,
                                    const Vec3& hi) {
  std::vector<Vec3> loop{{lo[0], lo[1], 0.0},
                         {hi[0], lo[1], 0.0},
                         {hi[0], hi[1], 0.0},
                         {lo[0], hi[1], 0.0},
                         {lo[0], lo[1], 0.0}};
  return lw_height(p, loop);
}

struct JoyceResult {
  double metric_residual = 0.0;
  double omega_residual = 0.0;
};

// phi1 = rho V_eta, phi2 = -rho V_rho; the metric identity is algebraic,
// the omega formula is the real-part reading of Phi^2/|Phi|^2 paired with
// (drho, deta), calibrated to reproduce the Ward form exactly
inline JoyceResult joyce_consistency(const HarmonicProfile& p, const Vec3& q) {
  Jet V = profile_jet(p, q, 1);
  const double rho = q[0];
  const double Vr = V.grad(0), Ve = V.grad(1);
  const double phi1 = rho * Ve, phi2 = -rho * Vr;
  const double n2 = phi1 * phi1 + phi2 * phi2;
  if (n2 < 1e-8) throw DomainError("joyce check: |Phi| below margin");
  JoyceResult r;
  // g_ward - (phi1^2+phi2^2)/rho^2 (drho^2+deta^2) - dpsi^2
  const double W = Vr * Vr + Ve * Ve;
  r.metric_residual = std::fabs(W - n2 / (rho * rho));
  const double om_rho = -(phi1 * phi1 - phi2 * phi2) / (rho * n2);
  const double om_eta = -2.0 * phi1 * phi2 / (rho * n2);
  const double ward_rho = (Vr * Vr - Ve * Ve) / (rho * W);
  const double ward_eta = 2.0 * Vr * Ve / (rho * W);
  r.omega_residual = std::max(std::fabs(om_rho - ward_rho),
                              std::fabs(om_eta - ward_eta));
  return r;
}

// ------------------------------------------------------------------
// Stock profiles

inline HarmonicProfile profile_logrho(Chart chart = halfspace_chart()) {
  return make_profile(
      chart, [](const auto& rho, const auto&) { return log(rho); }, "log(rho)");
}

inline HarmonicProfile profile_linear(double b,
                                      Chart chart = halfspace_chart()) {
  return make_profile(
      chart, [b](const auto& rho, const auto& eta) { return b * eta + 0.0 * rho; },
      "linear", {{"b", b}});
}

// fundamental solution c / sqrt(rho^2 + eta^2)
inline HarmonicProfile profile_point_source(double c,
                                            Chart chart = halfspace_chart()) {
  return make_profile(
      chart,
      [c](const auto& rho, const auto& eta) {
        return c * recip(sqrt(rho * rho + eta * eta));
      },
      "point-source", {{"c", c}});
}

inline HarmonicProfile profile_taubnut(double a, double b, double c,
                                       Chart chart = halfspace_chart()) {
  return make_profile(
      chart,
      [a, b, c](const auto& rho, const auto& eta) {
        auto r = sqrt(rho * rho + eta * eta);
        return a * log(rho) + b * eta + c * log((eta + r) / rho);
      },
      "taubnut", {{"a", a}, {"b", b}, {"c", c}});
}

// Eguchi-Hanson profiles in the real form obtained by substituting the
// adapted coordinates back: with e = epsilon^2 = +-1 and
//   R^2 = ((rho^2+eta^2+e) + sqrt((rho^2+eta^2+e)^2 - 4 e eta^2)) / 2,
// V = a log rho + b log((R+eta) sqrt(R^2-e) / (R rho)) + T(R),
// T = (c/2) log((R-1)/(R+1)) for e=+1 and T = -c atan(1/R) for e=-1.
inline HarmonicProfile profile_eguchi_hanson(int eps2, double a, double b,
                                             double c) {
  Chart chart = halfspace_chart();
  const double e = static_cast<double>(eps2);
  if (eps2 == 1) {
    // stay clear of the segment between the two point charges (R=1)
    chart.loci.push_back(
        {"R=1", [e](const Vec3& q) {
           const double S = q[0] * q[0] + q[1] * q[1];
           const double disc =
               std::sqrt((S + e) * (S + e) - 4.0 * e * q[1] * q[1]);
           return std::sqrt(0.5 * (S + e + disc)) - 1.0;
         }});
  }
  return make_profile(
      chart,
      [e, a, b, c](const auto& rho, const auto& eta) {
        auto S = rho * rho + eta * eta;
        auto disc = sqrt((S + e) * (S + e) - 4.0 * e * (eta * eta));
        auto R2 = 0.5 * (S + e + disc);
        auto R = sqrt(R2);
        auto out = a * log(rho) + b * log((R + eta) * sqrt(R2 - e) / (R * rho));
        if (e > 0.0)
          out += 0.5 * c * log((R - 1.0) / (R + 1.0));
        else
          out -= c * atan(recip(R));
        return out;
      },
      eps2 == 1 ? "eguchi-hanson-2" : "eguchi-hanson-1",
      {{"a", a}, {"b", b}, {"c", c}, {"eps2", e}});
}

// V -> V + k log rho ("adding multiples of log rho")
inline HarmonicProfile with_logrho(const HarmonicProfile& p, double k) {
  HarmonicProfile out = p;
  out.label = p.label + "+" + std::to_string(k) + "*log(rho)";
  auto V = p.V;
  out.V = [V, k](double rho, double eta) {
    return V(rho, eta) + k * std::log(rho);
  };
  if (p.analytic()) {
    auto Vj = p.Vjet;
    out.Vjet = [Vj, k](const Jet& rho, const Jet& eta) {
      return Vj(rho, eta) + k * log(rho);
    };
  }
  return out;
}

// s*P1 + t*P2 (superposition; the harmonic equation is linear)
inline HarmonicProfile profile_combine(double s, const HarmonicProfile& p1,
                                       double t, const HarmonicProfile& p2) {
  HarmonicProfile out = p1;
  out.label = p1.label + "+" + p2.label;
  auto V1 = p1.V, V2 = p2.V;
  out.V = [V1, V2, s, t](double rho, double eta) {
    return s * V1(rho, eta) + t * V2(rho, eta);
  };
  out.Vjet = nullptr;
  if (p1.analytic() && p2.analytic()) {
    auto J1 = p1.Vjet, J2 = p2.Vjet;
    out.Vjet = [J1, J2, s, t](const Jet& rho, const Jet& eta) {
      return s * J1(rho, eta) + t * J2(rho, eta);
    };
  }
  return out;
}

}  // namespace ewlab

#endif
