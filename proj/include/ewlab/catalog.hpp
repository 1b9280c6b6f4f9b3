#ifndef EWLAB_CATALOG_HPP
#define EWLAB_CATALOG_HPP

// The catalog of explicit Einstein-Weyl spaces: flat, hyperbolic,
// round-sphere, berger, ward-logrho, taubnut, eguchi-hanson-1/2 and the
// S^2 x H^2 quotient, together with closed LeBrun-Ward forms, chart maps
// and the crosscheck operations.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "ewlab/toda.hpp"
#include "ewlab/ward.hpp"

namespace ewlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CatalogEntry {
  std::string label;
  std::map<std::string, double> params;
  std::optional<HarmonicProfile> profile;
  std::optional<WeylStructure> weyl;         // the structure checks run on
  std::optional<WeylStructure> closed_form;  // LW closed form, own chart
  // closed-form chart point -> (rho,eta,psi), with jets for the Jacobian
  std::function<std::array<Jet, 3>(const Vec3&, int)> chart_map;
};

inline const std::vector<std::string>& catalog_labels() {
  static const std::vector<std::string> labels = {
      "flat",          "hyperbolic",      "round-sphere",
      "berger",        "ward-logrho",     "taubnut",
      "eguchi-hanson-1", "eguchi-hanson-2", "s2h2-quotient"};
  return labels;
}

namespace detail {

inline double param_or(const std::map<std::string, double>& m,
                       const std::string& k, double dflt) {
  auto it = m.find(k);
  return it == m.end() ? dflt : it->second;
}

// Euler-angle chart for the squashed 3-sphere entries
inline Chart euler_chart() {
  Chart ch;
  ch.name = "euler";
  ch.coords = {"theta", "phi", "psi"};
  ch.lo = {0.3, 0.0, 0.0};
  ch.hi = {2.8, 2.0, 2.0};
  ch.loci.push_back({"sin(theta)=0", [](const Vec3& p) {
                       return std::sin(p[0]);
                     }});
  return ch;
}

// g = sigma1^2 + a^2(sigma2^2 + sigma3^2), omega = lambda sigma1, with
// sigma1 = dpsi + cos(theta) dphi and sigma2^2+sigma3^2 = dtheta^2 +
// sin^2(theta) dphi^2.  (For a >= 1 this carries a real Einstein-Weyl
// 1-form; it is a constant rescale of the usual Berger form with
// squashing parameter 1/a.)
inline WeylStructure berger_structure(double a, double lambda) {
  WeylStructure w;
  w.chart = euler_chart();
  w.provenance = "berger";
  w.geom = [a, lambda](const Vec3& p, int deg) {
    Jet th = Jet::variable(p[0], 0, deg);
    Jet c = cos(th), s = sin(th);
    GeomJets G;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) G.g[i][j] = Jet(0.0, deg);
    G.g[0][0] = Jet(a * a, deg);
    G.g[1][1] = c * c + (a * a) * s * s;
    G.g[2][2] = Jet(1.0, deg);
    G.g[1][2] = c;
    G.g[2][1] = c;
    G.om[0] = Jet(0.0, deg);
    G.om[1] = lambda * c;
    G.om[2] = Jet(lambda, deg);
    return G;
  };
  return w;
}

// lambda(a) by one-dimensional minimization of the sampled residual norm
inline double berger_lambda(double a) {
  static std::map<double, double> cache;
  auto it = cache.find(a);
  if (it != cache.end()) return it->second;
  if (std::fabs(a - 1.0) < 1e-12) {
    cache[a] = 0.0;
    return 0.0;
  }
  auto probes = sample_probes(euler_chart(), 6, 99u);
  auto score = [&](double lam) {
    WeylStructure w = berger_structure(a, lam);
    double worst = 0.0;
    for (const auto& p : probes)
      worst = std::max(worst, ew_residual_norm(w, p));
    return worst;
  };
  // coarse scan, then golden-section refinement around the best point
  double best = 0.0, bestv = score(0.0);
  for (double lam = -2.5; lam <= 2.5; lam += 0.05) {
    const double v = score(lam);
    if (v < bestv) {
      bestv = v;
      best = lam;
    }
  }
  double lo = best - 0.05, hi = best + 0.05;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = score(x1), f2 = score(x2);
  for (int iter = 0; iter < 80; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = score(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = score(x2);
    }
  }
  const double lam = 0.5 * (lo + hi);
  cache[a] = lam;
  return lam;
}

inline Chart taubnut_lw_chart() {
  Chart ch;
  ch.name = "taubnut-lw";
  ch.coords = {"r", "theta", "psi"};
  ch.lo = {0.7, 0.45, 0.0};
  ch.hi = {1.6, 1.0, 1.0};
  return ch;
}

inline WeylStructure taubnut_closed_form(double a, double b, double c) {
  WeylStructure w;
  w.chart = taubnut_lw_chart();
  w.provenance = "taubnut-lw";
  w.geom = [a, b, c](const Vec3& p, int deg) {
    Jet r = Jet::variable(p[0], 0, deg);
    Jet th = Jet::variable(p[1], 1, deg);
    Jet ct = cos(th), st = sin(th);
    Jet P = (b * r + c) * (b * r + c) * ct * ct +
            (a - c * st) * (a - c * st);
    GeomJets G;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) G.g[i][j] = Jet(0.0, deg);
    G.g[0][0] = P;
    G.g[1][1] = P * r * r;
    G.g[2][2] = r * r * ct * ct;
    // omega = -2(br+c)/(rP) d(-ar sin th + (1/2) b r^2 cos^2 th + cr)
    Jet pref = (-2.0) * (b * r + c) / (r * P);
    G.om[0] = pref * (-a * st + b * r * ct * ct + c);
    G.om[1] = pref * (-a * r * ct - b * r * r * ct * st);
    G.om[2] = Jet(0.0, deg);
    return G;
  };
  return w;
}

inline Chart eh_lw_chart(int eps2) {
  Chart ch;
  ch.name = eps2 == 1 ? "eh2-lw" : "eh1-lw";
  ch.coords = {"R", "theta", "psi"};
  if (eps2 == 1) {
    ch.lo = {1.3, 0.5, 0.0};
    ch.hi = {1.8, 1.0, 1.0};
    ch.loci.push_back({"R=1", [](const Vec3& p) { return p[0] - 1.0; }});
  } else {
    ch.lo = {0.6, 0.35, 0.0};
    ch.hi = {1.2, 0.95, 1.0};
  }
  return ch;
}

inline WeylStructure eh_closed_form(int eps2, double a, double b, double c) {
  WeylStructure w;
  w.chart = eh_lw_chart(eps2);
  w.provenance = eps2 == 1 ? "eh2-lw" : "eh1-lw";
  const double e = static_cast<double>(eps2);
  w.geom = [e, a, b, c](const Vec3& p, int deg) {
    Jet R = Jet::variable(p[0], 0, deg);
    Jet th = Jet::variable(p[1], 1, deg);
    Jet ct = cos(th), st = sin(th);
    Jet R2e = R * R - e;
    Jet Q = (a * ct - b) * (a * ct - b) * R2e +
            (a * R + c) * (a * R + c) * st * st;
    GeomJets G;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) G.g[i][j] = Jet(0.0, deg);
    G.g[0][0] = Q / R2e;
    G.g[1][1] = Q;
    G.g[2][2] = R2e * st * st;
    // omega = -2(bR + c cos th)/Q d(-aR cos th + bR - c cos th)
    Jet pref = (-2.0) * (b * R + c * ct) / Q;
    G.om[0] = pref * (-a * ct + b);
    G.om[1] = pref * (a * R + c) * st;
    G.om[2] = Jet(0.0, deg);
    return G;
  };
  return w;
}

// quotient of the scalar-flat Kahler metric on S^2 x H^2
inline WeylStructure s2h2_structure(double b, double c) {
  WeylStructure w;
  w.chart = eh_lw_chart(-1);
  w.chart.name = "s2h2";
  w.provenance = "s2h2-quotient";
  w.geom = [b, c](const Vec3& p, int deg) {
    Jet R = Jet::variable(p[0], 0, deg);
    Jet th = Jet::variable(p[1], 1, deg);
    Jet ct = cos(th), st = sin(th);
    Jet R21 = R * R + 1.0;
    Jet Lam = (b * b) * R21 + (c * c) * st * st;
    GeomJets G;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) G.g[i][j] = Jet(0.0, deg);
    G.g[0][0] = recip(R21);
    G.g[1][1] = Jet(1.0, deg);
    G.g[2][2] = R21 * st * st / Lam;
    // the Weyl 1-form of the quotient structure
    G.om[0] = -(b * (b * R + 2.0 * c * ct)) / Lam;
    G.om[1] = -(c * st * (2.0 * b * R + c * ct)) / Lam;
    G.om[2] = Jet(0.0, deg);
    return G;
  };
  return w;
}

}  // namespace detail

inline CatalogEntry catalog(const std::string& label,
                            const std::map<std::string, double>& params = {}) {
  using detail::param_or;
  CatalogEntry e;
  e.label = label;
  e.params = params;
  if (label == "flat") {
    WeylStructure w;
    w.chart = cartesian_chart();
    w.provenance = "flat";
    w.geom = [](const Vec3&, int deg) {
      GeomJets G;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) G.g[i][j] = Jet(i == j ? 1.0 : 0.0, deg);
      for (int i = 0; i < 3; ++i) G.om[i] = Jet(0.0, deg);
      return G;
    };
    e.weyl = w;
  } else if (label == "hyperbolic") {
    Chart ch = cartesian_chart({-1.0, -1.0, 0.3}, {1.0, 1.0, 1.8});
    ScalarField u = make_analytic(
        ch, [](auto, auto, auto z) { return log(z); }, "log(z)");
    e.weyl = build_toda(u);
  } else if (label == "round-sphere") {
    e.weyl = detail::berger_structure(1.0, 0.0);
  } else if (label == "berger") {
    const double a = param_or(params, "a", 1.5);
    if (a < 1.0)
      throw ConfigError("berger: squashing parameter a must be >= 1");
    e.params["a"] = a;
    const double lam = detail::berger_lambda(a);
    e.params["lambda"] = lam;
    e.weyl = detail::berger_structure(a, lam);
  } else if (label == "ward-logrho") {
    e.profile = profile_logrho();
    e.weyl = ward_build(*e.profile);
  } else if (label == "taubnut") {
    const double a = param_or(params, "a", 1.0), b = param_or(params, "b", 1.0),
                 c = param_or(params, "c", 1.0);
    e.params = {{"a", a}, {"b", b}, {"c", c}};
    e.profile = profile_taubnut(a, b, c);
    e.weyl = ward_build(*e.profile);
    e.closed_form = detail::taubnut_closed_form(a, b, c);
    e.chart_map = [](const Vec3& p, int deg) {
      Jet r = Jet::variable(p[0], 0, deg), th = Jet::variable(p[1], 1, deg);
      return std::array<Jet, 3>{r * cos(th), r * sin(th),
                                Jet::variable(p[2], 2, deg)};
    };
  } else if (label == "eguchi-hanson-1" || label == "eguchi-hanson-2") {
    const int eps2 = label == "eguchi-hanson-2" ? 1 : -1;
    if (params.count("eps2") &&
        static_cast<int>(params.at("eps2")) != eps2)
      throw ConfigError("eguchi-hanson: eps2 inconsistent with label");
    const double a = param_or(params, "a", eps2 == 1 ? 1.0 : 0.0),
                 b = param_or(params, "b", 1.0), c = param_or(params, "c", 1.0);
    e.params = {{"a", a}, {"b", b}, {"c", c}, {"eps2", double(eps2)}};
    e.profile = profile_eguchi_hanson(eps2, a, b, c);
    e.weyl = ward_build(*e.profile);
    e.closed_form = detail::eh_closed_form(eps2, a, b, c);
    const double ed = static_cast<double>(eps2);
    e.chart_map = [ed](const Vec3& p, int deg) {
      Jet R = Jet::variable(p[0], 0, deg), th = Jet::variable(p[1], 1, deg);
      return std::array<Jet, 3>{sqrt(R * R - ed) * sin(th), R * cos(th),
                                Jet::variable(p[2], 2, deg)};
    };
  } else if (label == "s2h2-quotient") {
    const double b = param_or(params, "b", 1.0), c = param_or(params, "c", 1.0);
    if (b == 0.0 && c == 0.0) throw ConfigError("s2h2-quotient: b=c=0");
    e.params = {{"b", b}, {"c", c}};
    e.weyl = detail::s2h2_structure(b, c);
  } else {
    throw ConfigError("unknown catalog label '" + label + "'");
  }
  return e;
}

// push ward_build(profile) through the chart map and the LW rescale and
// compare g and omega componentwise with the closed form at p
inline double closed_form_crosscheck(const CatalogEntry& e, const Vec3& p) {
  if (!e.profile || !e.closed_form || !e.chart_map)
    throw ConfigError("entry '" + e.label + "' has no closed-form crosscheck");
  auto M = e.chart_map(p, 1);
  Vec3 q{M[0].value(), M[1].value(), M[2].value()};
  double J[3][3];
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a) J[i][a] = M[i].grad(a);
  WeylStructure lw = lw_gauge(ward_build(*e.profile));
  GeomJets src = lw.geom(q, 0);
  GeomJets dst = e.closed_form->geom(p, 0);
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          s += J[i][a] * J[j][b] * src.g[i][j].value();
      worst = std::max(worst, std::fabs(s - dst.g[a][b].value()));
    }
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += J[i][a] * src.om[i].value();
    worst = std::max(worst, std::fabs(s - dst.om[a].value()));
  }
  return worst;
}

struct S2h2CheckResult {
  double conformal_mismatch = 0.0;  // log-gradient of the factor, two routes
  double omega_mismatch = 0.0;      // gauge law against the quotient form
};

// compare the EH-1(a=0) closed form with the independent quotient metric:
// they should differ by a conformal factor Lambda with the gauge law
// omega_q = omega_LW + (1/2) d log Lambda
inline S2h2CheckResult s2h2_quotient_check(double b, double c, const Vec3& p) {
  WeylStructure eh = detail::eh_closed_form(-1, 0.0, b, c);
  WeylStructure qt = detail::s2h2_structure(b, c);
  GeomJets A = eh.geom(p, 1);
  GeomJets B = qt.geom(p, 1);
  // log-gradient of the factor from two independent components
  Jet lam_rr = log(A.g[0][0] / B.g[0][0]);
  Jet lam_pp = log(A.g[2][2] / B.g[2][2]);
  Jet lam_tt = log(A.g[1][1] / B.g[1][1]);
  S2h2CheckResult r;
  for (int i = 0; i < 3; ++i) {
    r.conformal_mismatch = std::max(
        {r.conformal_mismatch,
         std::fabs(deriv(lam_rr, i).value() - deriv(lam_pp, i).value()),
         std::fabs(deriv(lam_rr, i).value() - deriv(lam_tt, i).value())});
    // g_q = e^{2f} g_LW with f = -1/2 log Lambda, so omega_q = omega_LW - df
    const double pred = A.om[i].value() + 0.5 * deriv(lam_rr, i).value();
    r.omega_mismatch =
        std::max(r.omega_mismatch, std::fabs(pred - B.om[i].value()));
  }
  return r;
}

}  // namespace ewlab

#endif
