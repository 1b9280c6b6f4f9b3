#ifndef EWLAB_WEYL_HPP
#define EWLAB_WEYL_HPP

// Weyl structures (g, omega) on a chart and their invariants: Weyl
// connection coefficients, curvature, Einstein-Weyl residual, Faraday
// 2-form, scalar curvature, Cotton-York tensor, Hodge duals and gauge
// transformations.
//
// Everything is evaluated pointwise on jets of the metric and connection
// form.  Weighted quantities are stored as gauge representatives in the
// chart gauge determined by g; a weight-w density representative obeys
// D_i f = d_i f + w omega_i f.

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "ewlab/chart.hpp"
#include "ewlab/field.hpp"
#include "ewlab/jet.hpp"

namespace ewlab {

using JMat3 = std::array<std::array<Jet, 3>, 3>;
using JVec3 = std::array<Jet, 3>;
using JTen3 = std::array<JMat3, 3>;  // ten[k][i][j]

struct GeomJets {
  JMat3 g;
  JVec3 om;
};

struct WeylStructure {
  Chart chart;
  std::function<GeomJets(const Vec3&, int)> geom;
  std::string provenance = "user";
};

// vector fields given as jets of their chart components
using VectorFieldFn = std::function<JVec3(const Vec3&, int)>;

struct WeightedVector {
  int twice_weight = 0;
  Vec3 comps{};  // gauge representative components
};

namespace geo {

inline Jet det3(const JMat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline JMat3 inv3(const JMat3& m, const Jet& det) {
  const Jet idet = recip(det);
  JMat3 r;
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * idet;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * idet;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * idet;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * idet;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * idet;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * idet;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * idet;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * idet;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * idet;
  return r;
}

inline constexpr int eps3(int i, int j, int k) {
  return (i == j || j == k || i == k)
             ? 0
             : (((j - i + 3) % 3 == 1 && (k - j + 3) % 3 == 1) ? 1 : -1);
}

// Everything derived from one geometry evaluation at a point.
struct Frame {
  Vec3 p;
  int orientation = 1;
  JMat3 g, ginv;
  Jet det, sqrtdet;
  JVec3 om;
  JTen3 chg;   // Levi-Civita coefficients chg[k][i][j]
  JTen3 chd;   // Weyl connection coefficients
  JMat3 ric;   // Ricci of the Weyl connection (not symmetric in general)
  Jet scal;    // g-trace of ric (weight -2 representative)
  JMat3 F;     // Faraday 2-form F_ij = d_i om_j - d_j om_i

  static Frame at(const WeylStructure& w, const Vec3& p, int deg = 4) {
    require_margin_safe(w.chart, p);
    Frame f;
    f.p = p;
    f.orientation = w.chart.orientation;
    GeomJets gj = w.geom(p, deg);
    f.g = gj.g;
    f.om = gj.om;
    f.det = det3(f.g);
    if (!(f.det.value() > 0.0))
      throw DomainError("metric not positive definite at probe point");
    // positive definiteness: leading principal minors
    if (!(f.g[0][0].value() > 0.0) ||
        !((f.g[0][0].value() * f.g[1][1].value() -
           f.g[0][1].value() * f.g[0][1].value()) > 0.0))
      throw DomainError("metric not positive definite at probe point");
    f.sqrtdet = sqrt(f.det);
    f.ginv = inv3(f.g, f.det);
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Jet s(0.0, f.g[0][0].deg);
          for (int l = 0; l < 3; ++l)
            s += f.ginv[k][l] * (deriv(f.g[l][j], i) + deriv(f.g[i][l], j) -
                                 deriv(f.g[i][j], l));
          f.chg[k][i][j] = 0.5 * s;
        }
    // Gamma^D = Gamma^g + delta_i omega_j + delta_j omega_i - g_ij omega^k
    JVec3 omup;
    for (int k = 0; k < 3; ++k) {
      Jet s(0.0, f.g[0][0].deg);
      for (int l = 0; l < 3; ++l) s += f.ginv[k][l] * f.om[l];
      omup[k] = s;
    }
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Jet s = f.chg[k][i][j];
          if (k == i) s += f.om[j];
          if (k == j) s += f.om[i];
          s -= f.g[i][j] * omup[k];
          f.chd[k][i][j] = s;
        }
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l) {
        Jet s(0.0, f.g[0][0].deg);
        for (int i = 0; i < 3; ++i) {
          s += deriv(f.chd[i][j][l], i) - deriv(f.chd[i][i][l], j);
          for (int pq = 0; pq < 3; ++pq)
            s += f.chd[i][i][pq] * f.chd[pq][j][l] -
                 f.chd[i][j][pq] * f.chd[pq][i][l];
        }
        f.ric[j][l] = s;
      }
    {
      Jet s(0.0, f.g[0][0].deg);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += f.ginv[i][j] * f.ric[i][j];
      f.scal = s;
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        f.F[i][j] = deriv(f.om[j], i) - deriv(f.om[i], j);
    return f;
  }

  // curvature operator of D on plain vector fields: (R_ij)^k_l
  double riem(int i, int j, int k, int l) const {
    double s = deriv(chd[k][j][l], i).value() - deriv(chd[k][i][l], j).value();
    for (int p2 = 0; p2 < 3; ++p2)
      s += chd[k][i][p2].value() * chd[p2][j][l].value() -
           chd[k][j][p2].value() * chd[p2][i][l].value();
    return s;
  }
};

// invariant norm of a covariant symmetric/plain 2-tensor (values)
inline double inv_norm(const Frame& f, const double t[3][3]) {
  double n2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          n2 += f.ginv[i][k].value() * f.ginv[j][l].value() * t[i][j] * t[k][l];
  return std::sqrt(std::fabs(n2));
}

inline double inv_norm_form(const Frame& f, const Vec3& a) {
  double n2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) n2 += f.ginv[i][j].value() * a[i] * a[j];
  return std::sqrt(std::fabs(n2));
}

inline double inv_norm_vec(const Frame& f, const Vec3& v) {
  double n2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) n2 += f.g[i][j].value() * v[i] * v[j];
  return std::sqrt(std::fabs(n2));
}

// Hodge star on a 1-form (values): alpha -> 2-form
inline void star1(const Frame& f, const Vec3& a, double out[3][3]) {
  Vec3 up{};
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) up[k] += f.ginv[k][l].value() * a[l];
  const double v = f.sqrtdet.value() * f.orientation;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += eps3(i, j, k) * up[k];
      out[i][j] = v * s;
    }
}

// Hodge star on a 2-form (values): beta -> 1-form
inline Vec3 star2(const Frame& f, const double b[3][3]) {
  double up[3][3]{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c)
          s += f.ginv[i][a].value() * f.ginv[j][c].value() * b[a][c];
      up[i][j] = s;
    }
  const double v = f.sqrtdet.value() * f.orientation;
  Vec3 out{};
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += eps3(k, i, j) * up[i][j];
    out[k] = 0.5 * v * s;
  }
  return out;
}

}  // namespace geo

struct CurvatureReport {
  Vec3 point{};
  double ew[3][3]{};       // symmetric trace-free Einstein-Weyl residual
  double faraday[3][3]{};  // F^D components
  double scal = 0.0;       // weight -2 gauge representative
  double cy[3][3]{};       // Cotton-York gauge representative
  double ew_norm = 0.0;
  double cy_norm = 0.0;
  double faraday_norm = 0.0;
};

namespace geo {

inline void sym0_of(const Frame& f, const JMat3& t, double out[3][3]) {
  double sym[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      sym[i][j] = 0.5 * (t[i][j].value() + t[j][i].value());
  double tr = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) tr += f.ginv[i][j].value() * sym[i][j];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out[i][j] = sym[i][j] - tr / 3.0 * f.g[i][j].value();
}

inline void ew_residual_frame(const Frame& f, double out[3][3]) {
  sym0_of(f, f.ric, out);
}

inline void cotton_york_frame(const Frame& f, double out[3][3]) {
  // D scal with the weight -2 representative rule
  Vec3 dscal{};
  for (int i = 0; i < 3; ++i)
    dscal[i] = deriv(f.scal, i).value() - 2.0 * f.om[i].value() * f.scal.value();
  // D_a F_ij as a plain covariant 2-tensor
  double dF[3][3][3];
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = deriv(f.F[i][j], a).value();
        for (int p2 = 0; p2 < 3; ++p2)
          s -= f.chd[p2][a][i].value() * f.F[p2][j].value() +
               f.chd[p2][a][j].value() * f.F[i][p2].value();
        dF[a][i][j] = s;
      }
  // C_{ij,l} = (D_i F)(j,l) - (D_j F)(i,l)
  //            + (1/6)(<e_i,e_l> D_j scal - <e_j,e_l> D_i scal)
  double C[3][3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l)
        C[i][j][l] = dF[i][j][l] - dF[j][i][l] +
                     (f.g[i][l].value() * dscal[j] -
                      f.g[j][l].value() * dscal[i]) /
                         6.0;
  // Y(U,V) = < *(C_{.,.}U), V >, star acting on the 2-form slot
  double y[3][3]{};
  const double v = f.sqrtdet.value() * f.orientation;
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < 3; ++k) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int e = eps3(k, a, b);
          if (e == 0) continue;
          double up = 0.0;
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              up += f.ginv[a][i].value() * f.ginv[b][j].value() * C[i][j][l];
          s += e * up;
        }
      y[l][k] = 0.5 * v * s;
    }
  JMat3 yj;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) yj[i][j] = Jet(y[i][j], 0);
  sym0_of(f, yj, out);
}

}  // namespace geo

inline CurvatureReport curvature_report(const WeylStructure& w, const Vec3& p) {
  auto f = geo::Frame::at(w, p);
  CurvatureReport r;
  r.point = p;
  geo::ew_residual_frame(f, r.ew);
  geo::cotton_york_frame(f, r.cy);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.faraday[i][j] = f.F[i][j].value();
  r.scal = f.scal.value();
  r.ew_norm = geo::inv_norm(f, r.ew);
  r.cy_norm = geo::inv_norm(f, r.cy);
  r.faraday_norm = geo::inv_norm(f, r.faraday);
  return r;
}

inline double ew_residual_norm(const WeylStructure& w, const Vec3& p) {
  auto f = geo::Frame::at(w, p);
  double ew[3][3];
  geo::ew_residual_frame(f, ew);
  return geo::inv_norm(f, ew);
}

inline double scal_weyl(const WeylStructure& w, const Vec3& p) {
  return geo::Frame::at(w, p).scal.value();
}

inline void faraday(const WeylStructure& w, const Vec3& p, double out[3][3]) {
  auto f = geo::Frame::at(w, p);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = f.F[i][j].value();
}

// *F^D as a weighted vector (weight -2, i.e. section of L^{-3}TM)
inline WeightedVector star_faraday(const WeylStructure& w, const Vec3& p) {
  auto f = geo::Frame::at(w, p);
  double F[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) F[i][j] = f.F[i][j].value();
  const Vec3 sf = geo::star2(f, F);
  WeightedVector v;
  v.twice_weight = -4;
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (int l = 0; l < 3; ++l) s += f.ginv[k][l].value() * sf[l];
    v.comps[k] = s;
  }
  return v;
}

// Weyl connection coefficients at p
inline void weyl_connection(const WeylStructure& w, const Vec3& p,
                            double out[3][3][3]) {
  auto f = geo::Frame::at(w, p, 2);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[k][i][j] = f.chd[k][i][j].value();
}

// max |d_i g_jk - Gamma-contractions + 2 omega_i g_jk| (the Dg identity)
inline double dg_identity_residual(const WeylStructure& w, const Vec3& p) {
  auto f = geo::Frame::at(w, p, 2);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        double s = deriv(f.g[j][k], i).value();
        for (int l = 0; l < 3; ++l)
          s -= f.chd[l][i][j].value() * f.g[l][k].value() +
               f.chd[l][i][k].value() * f.g[j][l].value();
        s += 2.0 * f.om[i].value() * f.g[j][k].value();
        worst = std::max(worst, std::fabs(s));
      }
  return worst;
}

inline void cotton_york(const WeylStructure& w, const Vec3& p,
                        double out[3][3]) {
  auto f = geo::Frame::at(w, p);
  geo::cotton_york_frame(f, out);
}

inline double cotton_york_norm(const WeylStructure& w, const Vec3& p) {
  auto f = geo::Frame::at(w, p);
  double cy[3][3];
  geo::cotton_york_frame(f, cy);
  return geo::inv_norm(f, cy);
}

struct EwcurvResult {
  bool applicable = true;  // gated on the Einstein-Weyl residual
  double residual = 0.0;
};

// Residual of the Einstein-Weyl curvature decomposition on weight-1/2
// vector fields: R^{D,1/2} against the scal/F^D right-hand side.
inline EwcurvResult ewcurv_check(const WeylStructure& w, const Vec3& p,
                                 double ew_gate = 1e-5) {
  auto f = geo::Frame::at(w, p);
  EwcurvResult res;
  {
    double ew[3][3];
    geo::ew_residual_frame(f, ew);
    if (geo::inv_norm(f, ew) > ew_gate) {
      res.applicable = false;
      return res;
    }
  }
  const double scal = f.scal.value();
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const double lhs =
              f.riem(i, j, k, l) -
              0.5 * f.F[i][j].value() * (k == l ? 1.0 : 0.0);
          auto up = [&](const Vec3& a, int kk) {
            double s = 0.0;
            for (int m = 0; m < 3; ++m) s += f.ginv[kk][m].value() * a[m];
            return s;
          };
          Vec3 gi{f.g[i][0].value(), f.g[i][1].value(), f.g[i][2].value()};
          Vec3 gj{f.g[j][0].value(), f.g[j][1].value(), f.g[j][2].value()};
          Vec3 Fi{f.F[i][0].value(), f.F[i][1].value(), f.F[i][2].value()};
          Vec3 Fj{f.F[j][0].value(), f.F[j][1].value(), f.F[j][2].value()};
          // (alpha ^ X)(e_l)^k = alpha_l X^k - <X,e_l> (alpha sharp)^k
          auto tri = [&](const Vec3& alpha, int X, int kk, int ll) {
            return alpha[ll] * (kk == X ? 1.0 : 0.0) -
                   f.g[ll][X].value() * up(alpha, kk);
          };
          const double rhs = -scal / 6.0 * tri(gi, j, k, l) +
                             0.5 * tri(Fi, j, k, l) - 0.5 * tri(Fj, i, k, l) +
                             0.5 * f.F[i][j].value() * (k == l ? 1.0 : 0.0);
          worst = std::max(worst, std::fabs(lhs - rhs));
        }
  res.residual = worst;
  return res;
}

// g' = e^{2f} g, omega' = omega - df
inline WeylStructure gauge_transform(const WeylStructure& w,
                                     const ScalarField& fld) {
  WeylStructure out;
  out.chart = w.chart;
  out.provenance = w.provenance + "+gauge";
  auto base = w.geom;
  ScalarField f = fld;
  out.geom = [base, f](const Vec3& p, int deg) {
    GeomJets G = base(p, deg);
    Jet fj = field_jet(f, p, std::min(deg + 1, kJetMaxDeg));
    Jet e2f = exp(2.0 * fj);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) G.g[i][j] = e2f * G.g[i][j];
    for (int i = 0; i < 3; ++i) G.om[i] = G.om[i] - deriv(fj, i);
    return G;
  };
  return out;
}

// L_K g in an invariant norm
inline double killing_residual(const WeylStructure& w, const VectorFieldFn& K,
                               const Vec3& p) {
  auto f = geo::Frame::at(w, p, 2);
  JVec3 k = K(p, 2);
  double lie[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int m = 0; m < 3; ++m) {
        s += k[m].value() * deriv(f.g[i][j], m).value();
        s += f.g[m][j].value() * deriv(k[m], i).value();
        s += f.g[i][m].value() * deriv(k[m], j).value();
      }
      lie[i][j] = s;
    }
  return geo::inv_norm(f, lie);
}

// omega-sharp as a vector field (used as the Killing candidate)
inline VectorFieldFn omega_sharp_field(const WeylStructure& w) {
  auto geom = w.geom;
  return [geom](const Vec3& p, int deg) {
    GeomJets G = geom(p, deg);
    Jet det = geo::det3(G.g);
    JMat3 gi = geo::inv3(G.g, det);
    JVec3 out;
    for (int k = 0; k < 3; ++k) {
      Jet s(0.0, G.g[0][0].deg);
      for (int l = 0; l < 3; ++l) s += gi[k][l] * G.om[l];
      out[k] = s;
    }
    return out;
  };
}

struct KillingGaugeReport {
  bool degenerate = false;      // omega == 0: everything holds trivially
  bool gate_passed = false;
  double killing_res = 0.0;
  double dgF_identity = 0.0;    // (1): D^g F = (1/3) scal omega ^ <X,.>
  double cy_formula = 0.0;      // (2): closed-form Y against the direct one
  double omega_starF = 0.0;     // (3): <omega, *F^D>
  bool starF_checks_run = false;
  double starF_div = 0.0, starF_twist = 0.0, starF_conformal = 0.0,
         starF_preserves_D = 0.0;
};

inline KillingGaugeReport killing_gauge_checks(const WeylStructure& w,
                                               const std::vector<Vec3>& probes,
                                               double gate_tol = 1e-6) {
  KillingGaugeReport rep;
  VectorFieldFn omsharp = omega_sharp_field(w);
  double omega_scale = 0.0;
  for (const auto& p : probes) {
    auto f = geo::Frame::at(w, p, 2);
    Vec3 om{f.om[0].value(), f.om[1].value(), f.om[2].value()};
    omega_scale = std::max(omega_scale, geo::inv_norm_form(f, om));
  }
  if (omega_scale < 1e-12) {
    rep.degenerate = true;
    rep.gate_passed = true;
    return rep;
  }
  for (const auto& p : probes)
    rep.killing_res = std::max(rep.killing_res, killing_residual(w, omsharp, p));
  rep.gate_passed = rep.killing_res < gate_tol;
  if (!rep.gate_passed) return rep;

  for (const auto& p : probes) {
    auto f = geo::Frame::at(w, p);
    const double scal = f.scal.value();
    // (1) Levi-Civita derivative of F against the displayed right side
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double s = deriv(f.F[i][j], a).value();
          for (int m = 0; m < 3; ++m)
            s -= f.chg[m][a][i].value() * f.F[m][j].value() +
                 f.chg[m][a][j].value() * f.F[i][m].value();
          const double rhs = scal / 3.0 *
                             (f.om[i].value() * f.g[a][j].value() -
                              f.om[j].value() * f.g[a][i].value());
          rep.dgF_identity = std::max(rep.dgF_identity, std::fabs(s - rhs));
        }
    // (2) closed-form Cotton-York
    double F[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) F[i][j] = f.F[i][j].value();
    const Vec3 sf = geo::star2(f, F);  // *F as a 1-form
    double osf = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        osf += f.ginv[i][j].value() * f.om[i].value() * sf[j];
    double yform[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        yform[i][j] = 1.5 * (f.om[i].value() * sf[j] + f.om[j].value() * sf[i]) -
                      osf * f.g[i][j].value();
    double ydir[3][3];
    geo::cotton_york_frame(f, ydir);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        rep.cy_formula =
            std::max(rep.cy_formula, std::fabs(yform[i][j] - ydir[i][j]));
    rep.omega_starF = std::max(rep.omega_starF, std::fabs(osf));
  }

  if (rep.omega_starF < 1e-6) {
    // (4) K = <*F^D, .> sharp: divergence/twist/conformal/L_K D residuals
    rep.starF_checks_run = true;
    auto geomfn = w.geom;
    VectorFieldFn Kf = [geomfn](const Vec3& q, int deg) {
      GeomJets G = geomfn(q, std::min(deg + 1, kJetMaxDeg));
      Jet det = geo::det3(G.g);
      JMat3 gi = geo::inv3(G.g, det);
      Jet sq = sqrt(det);
      JMat3 F;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          F[i][j] = deriv(G.om[j], i) - deriv(G.om[i], j);
      JVec3 out;
      for (int k = 0; k < 3; ++k) {
        Jet s(0.0, G.g[0][0].deg);
        for (int l = 0; l < 3; ++l)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              const int e = geo::eps3(l, a, b);
              if (e == 0) continue;
              for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                  s += 0.5 * e * gi[k][l] * sq * gi[a][i] * gi[b][j] * F[i][j];
            }
        out[k] = s;
      }
      return out;
    };
    bool scale_set = false;
    double kscale = 1.0;
    for (const auto& p : probes) {
      auto f = geo::Frame::at(w, p, 3);
      JVec3 kj = Kf(p, 3);
      Vec3 kv{kj[0].value(), kj[1].value(), kj[2].value()};
      const double kn = geo::inv_norm_vec(f, kv);
      if (!scale_set) {
        kscale = std::max(kn, 1e-12);
        scale_set = true;
      }
      // divergence (Levi-Civita trace)
      double div = 0.0;
      for (int i = 0; i < 3; ++i) {
        div += deriv(kj[i], i).value();
        for (int m = 0; m < 3; ++m)
          div += f.chg[i][i][m].value() * kj[m].value();
      }
      rep.starF_div = std::max(rep.starF_div, std::fabs(div) / kscale);
      // conformal-Killing residual: trace-free part of sym grad K-flat
      double nab[3][3];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          // covariant: g_jm (d_i K^m + ch^m_il K^l)
          double s = 0.0;
          for (int m = 0; m < 3; ++m)
            s += f.g[j][m].value() * deriv(kj[m], i).value();
          for (int m = 0; m < 3; ++m)
            for (int l = 0; l < 3; ++l)
              s += f.g[j][m].value() * f.chg[m][i][l].value() * kj[l].value();
          nab[i][j] = s;
        }
      JMat3 nj;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) nj[i][j] = Jet(nab[i][j], 0);
      double ck[3][3];
      geo::sym0_of(f, nj, ck);
      rep.starF_conformal =
          std::max(rep.starF_conformal, geo::inv_norm(f, ck) / kscale);
      // twist: K-flat wedge d K-flat
      Vec3 kflat{};
      for (int i = 0; i < 3; ++i)
        for (int m = 0; m < 3; ++m)
          kflat[i] += f.g[i][m].value() * kj[m].value();
      // d(K-flat)_ij needs jets of K-flat: recompute through jets
      JVec3 kflatj;
      for (int i = 0; i < 3; ++i) {
        Jet s(0.0, kj[0].deg);
        for (int m = 0; m < 3; ++m) s += f.g[i][m] * kj[m];
        kflatj[i] = s;
      }
      double twist = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) {
            const int e = geo::eps3(i, j, k);
            if (e == 0) continue;
            twist += e * kflat[i] *
                     (deriv(kflatj[k], j).value());
          }
      rep.starF_twist = std::max(
          rep.starF_twist, std::fabs(twist) / (kscale * kscale * kscale));
      // preserves D: d trace DK + F^D(K,.) with trace DK via jets
      Vec3 FK{};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          FK[j] += f.F[i][j].value() * kj[i].value();
      rep.starF_preserves_D =
          std::max(rep.starF_preserves_D, geo::inv_norm_form(f, FK) / kscale);
    }
  }
  return rep;
}

}  // namespace ewlab

#endif
