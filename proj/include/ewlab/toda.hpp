#ifndef EWLAB_TODA_HPP
#define EWLAB_TODA_HPP

// The Toda Ansatz, congruence geometry, the rank-4 linear system for
// Toda structures, its holonomy-based structure count, the curvature
// obstructions, and the Wronskian symmetry constructions.
//
// A Toda structure is a parallel section (X, sigma) of the connection
//   D(X, sigma) = (DX - sigma id,
//                  Dsigma + 1/2 F^D(X,.) + 1/6 scal^D <X,.>)
// on weight-1/2 vectors plus a weight -1/2 density.  Parallel transport
// of the 4-component gauge representative v = (X^0,X^1,X^2,sigma) obeys
// dv/dt = -A_i(gamma) gamma'^i v with the matrices assembled below.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ewlab/ode.hpp"
#include "ewlab/weyl.hpp"

namespace ewlab {

struct GateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------
// Toda Ansatz

inline double toda_residual(const ScalarField& u, const Vec3& p) {
  Jet j = field_jet(u, p, 2);
  return j.hess(0, 0) + j.hess(1, 1) +
         std::exp(j.value()) * (j.hess(2, 2) + j.grad(2) * j.grad(2));
}

// g = e^u(dx^2+dy^2)+dz^2, omega = -u_z dz
inline WeylStructure build_toda(const ScalarField& u) {
  WeylStructure w;
  w.chart = u.chart;
  w.provenance = "toda:" + u.label;
  ScalarField uf = u;
  w.geom = [uf](const Vec3& p, int deg) {
    Jet j = field_jet(uf, p, std::min(deg + 1, kJetMaxDeg));
    Jet eu = exp(j);
    GeomJets G;
    const int d = j.deg;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) G.g[i][k] = Jet(0.0, d);
    G.g[0][0] = eu;
    G.g[1][1] = eu;
    G.g[2][2] = Jet(1.0, d);
    G.om[0] = Jet(0.0, d);
    G.om[1] = Jet(0.0, d);
    G.om[2] = -deriv(j, 2);
    return G;
  };
  return w;
}

// ------------------------------------------------------------------
// Congruence geometry

struct CongruenceReport {
  double divergence = 0.0;
  double shear_norm = 0.0;
  double twist_norm = 0.0;
  double acceleration_norm = 0.0;
  double tau = 0.0;  // gauge representative, = divergence/2
};

inline CongruenceReport congruence_decompose(const WeylStructure& w,
                                             const VectorFieldFn& chi,
                                             const Vec3& p) {
  auto f = geo::Frame::at(w, p, 2);
  JVec3 x = chi(p, 1);
  Vec3 xv{x[0].value(), x[1].value(), x[2].value()};
  double n2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) n2 += f.g[i][j].value() * xv[i] * xv[j];
  if (std::fabs(n2 - 1.0) > 1e-6)
    throw DomainError("congruence field is not unit at probe point");
  // D chi for the weightless unit field: section of L^{-1}TM
  double B[3][3];  // B[i][k] = D_i chi^k
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      double s = deriv(x[k], i).value() - f.om[i].value() * xv[k];
      for (int j = 0; j < 3; ++j) s += f.chd[k][i][j].value() * xv[j];
      B[i][k] = s;
    }
  CongruenceReport r;
  double Blow[3][3];  // B_ij = g_jk B[i][k]
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += f.g[j][k].value() * B[i][k];
      Blow[i][j] = s;
    }
  Vec3 xlow{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) xlow[i] += f.g[i][j].value() * xv[j];
  // acceleration = D_chi chi
  Vec3 acc{};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i) acc[k] += xv[i] * B[i][k];
  r.acceleration_norm = geo::inv_norm_vec(f, acc);
  double theta = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) theta += f.ginv[i][j].value() * Blow[i][j];
  r.divergence = theta;
  r.tau = 0.5 * theta;
  // restrict to the orthogonal plane with h_ij = g_ij - chi_i chi_j
  double h[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) h[i][j] = f.g[i][j].value() - xlow[i] * xlow[j];
  double hup[3][3];  // h with indices raised: projector mixed form
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += f.ginv[i][k].value() * h[k][j];
      hup[i][j] = s;  // h^i_j
    }
  double Bp[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          s += hup[a][i] * hup[b][j] * Blow[a][b];
      Bp[i][j] = s;
    }
  double thp = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) thp += f.ginv[i][j].value() * Bp[i][j];
  double shear[3][3], twist[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      shear[i][j] = 0.5 * (Bp[i][j] + Bp[j][i]) - 0.5 * thp * h[i][j];
      twist[i][j] = 0.5 * (Bp[i][j] - Bp[j][i]);
    }
  r.shear_norm = geo::inv_norm(f, shear);
  r.twist_norm = geo::inv_norm(f, twist);
  return r;
}

// ------------------------------------------------------------------
// The rank-4 connection

namespace detail {

using Mat4 = std::array<std::array<double, 4>, 4>;

inline std::array<Mat4, 3> toda_A(const geo::Frame& f) {
  std::array<Mat4, 3> A{};
  const double scal = f.scal.value();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 3; ++j)
        A[i][k][j] = f.chd[k][i][j].value() -
                     (k == j ? 0.5 * f.om[i].value() : 0.0);
      A[i][k][3] = (k == i) ? -1.0 : 0.0;
    }
    for (int j = 0; j < 3; ++j)
      A[i][3][j] = 0.5 * f.F[j][i].value() + scal / 6.0 * f.g[i][j].value();
    A[i][3][3] = -0.5 * f.om[i].value();
  }
  return A;
}

// integrate the system (or a 4x4 matrix of it) along one straight segment
template <int NCOL>
void transport_segment(const WeylStructure& w, const Vec3& a, const Vec3& b,
                       double v[4][NCOL], double rtol, double atol) {
  Vec3 d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  std::vector<double> y(4 * NCOL);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < NCOL; ++c) y[4 * c + r] = v[r][c];
  auto rhs = [&](double t, const std::vector<double>& yy,
                 std::vector<double>& out) {
    Vec3 p{a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]};
    auto f = geo::Frame::at(w, p, 3);
    auto A = toda_A(f);
    Mat4 M{};
    for (int i = 0; i < 3; ++i)
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) M[r][c] += d[i] * A[i][r][c];
    for (int c = 0; c < NCOL; ++c)
      for (int r = 0; r < 4; ++r) {
        double s = 0.0;
        for (int q = 0; q < 4; ++q) s -= M[r][q] * yy[4 * c + q];
        out[4 * c + r] = s;
      }
  };
  y = ode::integrate(rhs, std::move(y), 0.0, 1.0, rtol, atol);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < NCOL; ++c) v[r][c] = y[4 * c + r];
}

}  // namespace detail

// parallel transport of a (X, sigma) representative along a polyline
inline std::array<double, 4> transport(const WeylStructure& w,
                                       const std::vector<Vec3>& path,
                                       const std::array<double, 4>& seed,
                                       double rtol = 1e-12,
                                       double atol = 1e-14) {
  double v[4][1] = {{seed[0]}, {seed[1]}, {seed[2]}, {seed[3]}};
  for (std::size_t s = 0; s + 1 < path.size(); ++s)
    detail::transport_segment<1>(w, path[s], path[s + 1], v, rtol, atol);
  return {v[0][0], v[1][0], v[2][0], v[3][0]};
}

inline detail::Mat4 transport_matrix(const WeylStructure& w, const Vec3& a,
                                     const Vec3& b, double rtol = 1e-12,
                                     double atol = 1e-14) {
  double v[4][4] = {};
  for (int i = 0; i < 4; ++i) v[i][i] = 1.0;
  detail::transport_segment<4>(w, a, b, v, rtol, atol);
  detail::Mat4 m{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[r][c] = v[r][c];
  return m;
}

namespace detail {

inline Mat4 plaquette_holonomy(const WeylStructure& w, const Vec3& p, int i,
                               int j, double h, double rtol, double atol) {
  Vec3 q1 = p, q2 = p, q3 = p;
  q1[i] += h;
  q2[i] += h;
  q2[j] += h;
  q3[j] += h;
  double v[4][4] = {};
  for (int r = 0; r < 4; ++r) v[r][r] = 1.0;
  transport_segment<4>(w, p, q1, v, rtol, atol);
  transport_segment<4>(w, q1, q2, v, rtol, atol);
  transport_segment<4>(w, q2, q3, v, rtol, atol);
  transport_segment<4>(w, q3, p, v, rtol, atol);
  Mat4 m{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[r][c] = v[r][c];
  return m;
}

// (I - H)/h^2 at h and h/2, Richardson-combined
inline Mat4 plaquette_curvature(const WeylStructure& w, const Vec3& p, int i,
                                int j, double h, double rtol, double atol) {
  auto C = [&](double hh) {
    Mat4 H = plaquette_holonomy(w, p, i, j, hh, rtol, atol);
    Mat4 c{};
    for (int r = 0; r < 4; ++r)
      for (int s = 0; s < 4; ++s)
        c[r][s] = ((r == s ? 1.0 : 0.0) - H[r][s]) / (hh * hh);
    return c;
  };
  const Mat4 ch = C(h), ch2 = C(0.5 * h);
  Mat4 out{};
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s) out[r][s] = (4.0 * ch2[r][s] - ch[r][s]) / 3.0;
  return out;
}

}  // namespace detail

// the three coordinate-plane curvature operators at p
inline std::array<detail::Mat4, 3> toda_system_curvature(
    const WeylStructure& w, const Vec3& p, double h_loop = 1e-2,
    double ew_gate = 1e-5) {
  if (ew_residual_norm(w, p) > ew_gate)
    throw GateError("not Einstein-Weyl at probe point");
  static constexpr int planes[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  std::array<detail::Mat4, 3> out;
  for (int q = 0; q < 3; ++q)
    out[q] = detail::plaquette_curvature(w, p, planes[q][0], planes[q][1],
                                         h_loop, 1e-12, 1e-14);
  return out;
}

// ------------------------------------------------------------------
// Structure count

struct StructureCountOptions {
  double h_loop = 1e-2;
  double rtol = 1e-12;
  double atol = 1e-14;
  double kernel_rel = 1e-7;  // relative singular-value threshold
  double loop_tol = 1e-6;
  double ew_gate = 1e-5;
};

struct StructureCount {
  int upper_bound = 0;
  int confirmed = 0;
  std::array<double, 4> singular_values{};
  double gap = 0.0;
  double loop_residual = 0.0;  // worst confirmed-loop defect
  std::vector<std::array<double, 4>> basis;  // orthonormal seeds at base
  Vec3 base{};
};

// a margin-safe point near the middle of the chart box
inline Vec3 chart_center(const Chart& ch) {
  Vec3 c{0.5 * (ch.lo[0] + ch.hi[0]), 0.5 * (ch.lo[1] + ch.hi[1]),
         0.5 * (ch.lo[2] + ch.hi[2])};
  if (margin_safe(ch, c)) return c;
  auto s = sample_probes(ch, 1, 7u, 0.2 * (ch.hi[0] - ch.lo[0]));
  return s[0];
}

inline StructureCount toda_structure_count(
    const WeylStructure& w, const Vec3& base, const std::vector<Vec3>& probes,
    const StructureCountOptions& opt = {}) {
  StructureCount sc;
  sc.base = base;
  if (ew_residual_norm(w, base) > opt.ew_gate)
    throw GateError("not Einstein-Weyl at base point");
  double scale_c = 1e-3;
  for (const auto& q : probes) {
    if (ew_residual_norm(w, q) > opt.ew_gate)
      throw GateError("not Einstein-Weyl at probe point");
    auto f = geo::Frame::at(w, q, 3);
    double F[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) F[i][j] = f.F[i][j].value();
    scale_c = std::max(scale_c, std::fabs(f.scal.value()) / 6.0 +
                                    0.5 * geo::inv_norm(f, F));
  }
  static constexpr int planes[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  Eigen::MatrixXd S(static_cast<Eigen::Index>(12 * probes.size()), 4);
  Eigen::Index row = 0;
  for (const auto& q : probes) {
    auto T = transport_matrix(w, base, q, opt.rtol, opt.atol);
    for (int pl = 0; pl < 3; ++pl) {
      auto C = detail::plaquette_curvature(w, q, planes[pl][0], planes[pl][1],
                                           opt.h_loop, opt.rtol, opt.atol);
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          double s = 0.0;
          for (int m = 0; m < 4; ++m) s += C[r][m] * T[m][c];
          S(row, c) = s;
        }
        ++row;
      }
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  for (int i = 0; i < 4; ++i) sc.singular_values[i] = sv(i);
  const double smax = sv(0);
  const double thresh = std::max(opt.kernel_rel * smax, 1e-6 * scale_c);
  int k = 0;
  for (int i = 0; i < 4; ++i)
    if (sv(i) < thresh) ++k;
  sc.upper_bound = k;
  if (k == 4)
    sc.gap = scale_c / std::max(smax, 1e-15);
  else if (k == 0)
    sc.gap = sv(3) / thresh;
  else
    sc.gap = sv(3 - k) / std::max(sv(4 - k), 1e-15);
  // columns of V for the k smallest singular values are the last k
  for (int i = 0; i < k; ++i) {
    std::array<double, 4> b{};
    for (int c = 0; c < 4; ++c) b[c] = svd.matrixV()(c, 4 - k + i);
    sc.basis.push_back(b);
  }
  // confirmation: 12 rectangular loops per seed (3 planes x 2 scales x 2
  // anchors), sides a fixed fraction of the margin-shrunk box extent
  const Chart& ch = w.chart;
  Vec3 ext{ch.hi[0] - ch.lo[0], ch.hi[1] - ch.lo[1], ch.hi[2] - ch.lo[2]};
  sc.confirmed = 0;
  double worst_any = 0.0;
  for (const auto& seed : sc.basis) {
    double worst = 0.0;
    for (int pl = 0; pl < 3; ++pl)
      for (double frac : {0.08, 0.15})
        for (int anchor = 0; anchor < 2; ++anchor) {
          const int i = planes[pl][0], j = planes[pl][1];
          // grow the rectangle toward the box center; the second anchor
          // shifts it to the other side of the base point
          const double ci = 0.5 * (ch.lo[i] + ch.hi[i]),
                       cj = 0.5 * (ch.lo[j] + ch.hi[j]);
          double si = (base[i] <= ci ? 1.0 : -1.0) * frac * ext[i];
          double sj = (base[j] <= cj ? 1.0 : -1.0) * frac * ext[j];
          if (anchor == 1) si = -0.6 * si;
          Vec3 p0 = base, p1 = base, p2 = base, p3 = base;
          p1[i] += si;
          p2[i] += si;
          p2[j] += sj;
          p3[j] += sj;
          bool safe = margin_safe(ch, p0) && margin_safe(ch, p1) &&
                      margin_safe(ch, p2) && margin_safe(ch, p3);
          if (!safe) continue;
          auto out = transport(w, {p0, p1, p2, p3, p0}, seed, opt.rtol,
                               opt.atol);
          double num = 0.0, den = 0.0;
          for (int c = 0; c < 4; ++c) {
            num += (out[c] - seed[c]) * (out[c] - seed[c]);
            den += seed[c] * seed[c];
          }
          worst = std::max(worst, std::sqrt(num / den));
        }
    worst_any = std::max(worst_any, worst);
    if (worst < opt.loop_tol) ++sc.confirmed;
  }
  sc.loop_residual = worst_any;
  return sc;
}

// ------------------------------------------------------------------
// Linearization

// gauge potential of the LeBrun-Ward rescale: f with df = omega - 2 tau <chi,.>
inline double lw_potential(const WeylStructure& w, const VectorFieldFn& chi,
                           const Vec3& base, const Vec3& p, int nseg = 8) {
  static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665,
                               0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  Vec3 d{p[0] - base[0], p[1] - base[1], p[2] - base[2]};
  double acc = 0.0;
  for (int s = 0; s < nseg; ++s) {
    const double t0 = static_cast<double>(s) / nseg,
                 t1 = static_cast<double>(s + 1) / nseg;
    for (int k = 0; k < 5; ++k) {
      const double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * gx[k];
      Vec3 q{base[0] + t * d[0], base[1] + t * d[1], base[2] + t * d[2]};
      auto f = geo::Frame::at(w, q, 2);
      auto rep = congruence_decompose(w, chi, q);
      JVec3 x = chi(q, 0);
      Vec3 xlow{};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          xlow[i] += f.g[i][j].value() * x[j].value();
      double integrand = 0.0;
      for (int i = 0; i < 3; ++i)
        integrand += (f.om[i].value() - 2.0 * rep.tau * xlow[i]) * d[i];
      acc += 0.5 * (t1 - t0) * gw[k] * integrand;
    }
  }
  return acc;
}

// (X, sigma) = (mu^{1/2} chi, mu^{1/2} tau) with the LW gauge normalized
// to the chart gauge at the base point (the free homothety constant)
inline std::array<double, 4> linearize(const WeylStructure& w,
                                       const VectorFieldFn& chi,
                                       const Vec3& base, const Vec3& p,
                                       double tol = 1e-5) {
  auto rep = congruence_decompose(w, chi, p);
  if (rep.shear_norm > tol || rep.twist_norm > tol ||
      rep.acceleration_norm > tol)
    throw GateError("not a Toda congruence");
  const double f = lw_potential(w, chi, base, p);
  const double m = std::exp(-0.5 * f);  // representative of mu^{1/2}
  JVec3 x = chi(p, 0);
  return {m * x[0].value(), m * x[1].value(), m * x[2].value(), m * rep.tau};
}

struct Delinearized {
  Vec3 chi{};
  double mu = 0.0;   // gauge representative of |X|^2
  double tau = 0.0;  // gauge representative of sigma/|X|
};

inline Delinearized delinearize(const WeylStructure& w,
                                const std::array<double, 4>& v, const Vec3& p) {
  auto f = geo::Frame::at(w, p, 1);
  double n2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) n2 += f.g[i][j].value() * v[i] * v[j];
  if (n2 < 1e-14) throw DomainError("delinearize: X vanishes");
  Delinearized out;
  const double n = std::sqrt(n2);
  for (int i = 0; i < 3; ++i) out.chi[i] = v[i] / n;
  out.mu = n2;
  out.tau = v[3] / n;
  return out;
}

// ------------------------------------------------------------------
// Obstructions

// <X, *F^D> gauge representative
inline double obstruction_orth(const WeylStructure& w, const Vec3& X,
                               const Vec3& p) {
  auto f = geo::Frame::at(w, p);
  double F[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) F[i][j] = f.F[i][j].value();
  const Vec3 sf = geo::star2(f, F);  // *F^D as a 1-form
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += sf[i] * X[i];
  return s;
}

struct CyObstruction {
  Vec3 residual{};          // Y(X,.) + 1/6 (*Dscal)(.,X) - sigma *F^D
  double residual_norm = 0.0;
  double null_value = 0.0;  // Y(X,X)
};

inline CyObstruction obstruction_cy(const WeylStructure& w,
                                    const std::array<double, 4>& v,
                                    const Vec3& p) {
  auto f = geo::Frame::at(w, p);
  const Vec3 X{v[0], v[1], v[2]};
  const double sigma = v[3];
  double Y[3][3];
  geo::cotton_york_frame(f, Y);
  Vec3 dscal{};
  for (int i = 0; i < 3; ++i)
    dscal[i] =
        deriv(f.scal, i).value() - 2.0 * f.om[i].value() * f.scal.value();
  double sds[3][3];
  geo::star1(f, dscal, sds);  // *Dscal as a 2-form
  double F[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) F[i][j] = f.F[i][j].value();
  const Vec3 sf = geo::star2(f, F);
  CyObstruction out;
  for (int j = 0; j < 3; ++j) {
    double s = -sigma * sf[j];
    for (int i = 0; i < 3; ++i)
      s += Y[i][j] * X[i] + sds[j][i] * X[i] / 6.0;
    out.residual[j] = s;
  }
  out.residual_norm = geo::inv_norm_form(f, out.residual);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.null_value += Y[i][j] * X[i] * X[j];
  return out;
}

// ------------------------------------------------------------------
// Section jets and the Wronskian symmetry

namespace detail {

// Jets of a parallel section of the rank-4 system from its value at the
// frame's point, by recursive differentiation of dv = -A v.
inline std::array<Jet, 4> section_jets(const geo::Frame& f,
                                       const std::array<double, 4>& v,
                                       int deg) {
  const int d = std::min({deg, f.g[0][0].deg - 1, 3});
  // A as jets
  std::array<std::array<std::array<Jet, 4>, 4>, 3> A;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) A[i][k][j] = Jet(0.0, d);
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 3; ++j) {
        A[i][k][j] = f.chd[k][i][j];
        if (k == j) A[i][k][j] -= 0.5 * f.om[i];
      }
      A[i][k][3] = Jet(k == i ? -1.0 : 0.0, d);
    }
    for (int j = 0; j < 3; ++j)
      A[i][3][j] = 0.5 * f.F[j][i] + (1.0 / 6.0) * f.scal * f.g[i][j];
    A[i][3][3] = -0.5 * f.om[i];
  }
  std::array<Jet, 4> out;
  for (int c = 0; c < 4; ++c) out[c] = Jet(v[c], d);
  const auto& T = ewlab::detail::kJT;
  for (int order = 1; order <= d; ++order) {
    // w_i = -A_i out, correct through degree order-1
    std::array<std::array<Jet, 4>, 3> wv;
    for (int i = 0; i < 3; ++i)
      for (int r = 0; r < 4; ++r) {
        Jet s(0.0, d);
        for (int c = 0; c < 4; ++c) s -= A[i][r][c] * out[c];
        wv[i][r] = s;
      }
    for (int n = 0; n < kJetTerms; ++n) {
      if (T.degree[n] != order) continue;
      auto m = T.mono[n];
      int i = (m[0] > 0) ? 0 : (m[1] > 0 ? 1 : 2);
      auto mu = m;
      mu[i] -= 1;
      const int src = T.idx[mu[0]][mu[1]][mu[2]];
      for (int r = 0; r < 4; ++r) out[r].c[n] = wv[i][r].c[src] / m[i];
    }
  }
  return out;
}

}  // namespace detail

// K = *(X1 ^ X2) as jets at the frame's point
inline JVec3 wronskian_jets(const geo::Frame& f, const std::array<Jet, 4>& s1,
                            const std::array<Jet, 4>& s2) {
  const int d = std::min(s1[0].deg, f.g[0][0].deg);
  JVec3 a1, a2;
  for (int i = 0; i < 3; ++i) {
    Jet u(0.0, d), v(0.0, d);
    for (int j = 0; j < 3; ++j) {
      u += f.g[i][j] * s1[j];
      v += f.g[i][j] * s2[j];
    }
    a1[i] = u;
    a2[i] = v;
  }
  // 2-form X1-flat wedge X2-flat, then the star to a 1-form, then raise
  JVec3 kflat;
  Jet vol = f.sqrtdet * static_cast<double>(f.orientation);
  for (int k = 0; k < 3; ++k) {
    Jet s(0.0, d);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Jet bij = a1[i] * a2[j] - a1[j] * a2[i];
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            const int e = geo::eps3(k, a, b);
            if (e == 0) continue;
            s += static_cast<double>(e) * f.ginv[a][i] * f.ginv[b][j] * bij;
          }
      }
    kflat[k] = 0.5 * vol * s;
  }
  JVec3 K;
  for (int k = 0; k < 3; ++k) {
    Jet s(0.0, d);
    for (int l = 0; l < 3; ++l) s += f.ginv[k][l] * kflat[l];
    K[k] = s;
  }
  return K;
}

// vector field from two Toda-structure seeds at a base point
inline VectorFieldFn wronskian_field(const WeylStructure& w, const Vec3& base,
                                     const std::array<double, 4>& seed1,
                                     const std::array<double, 4>& seed2) {
  WeylStructure wc = w;
  return [wc, base, seed1, seed2](const Vec3& q, int deg) {
    auto f = geo::Frame::at(wc, q, 3);
    auto v1 = transport(wc, {base, q}, seed1);
    auto v2 = transport(wc, {base, q}, seed2);
    auto s1 = detail::section_jets(f, v1, std::min(deg, 2));
    auto s2 = detail::section_jets(f, v2, std::min(deg, 2));
    return wronskian_jets(f, s1, s2);
  };
}

struct AxialSymmetryReport {
  bool degenerate = false;  // K vanishes at some probe
  double divergence = 0.0;  // |trace DK| / |K|
  double twist = 0.0;       // |K-flat ^ dK-flat| normalized
  double conformal = 0.0;   // trace-free sym grad residual / |K|
  double lie_weyl = 0.0;    // |d trace DK + F^D(K,.)| / |K|
  double min_psi_component = 0.0;  // smallest K^psi seen (orientation check)
  double max_transverse = 0.0;     // largest |K^rho|,|K^eta| seen
};

inline AxialSymmetryReport axial_symmetry_checks(const WeylStructure& w,
                                                 const VectorFieldFn& K,
                                                 const std::vector<Vec3>& probes) {
  AxialSymmetryReport rep;
  rep.min_psi_component = std::numeric_limits<double>::infinity();
  for (const auto& p : probes) {
    auto f = geo::Frame::at(w, p, 3);
    JVec3 kj = K(p, 2);
    Vec3 kv{kj[0].value(), kj[1].value(), kj[2].value()};
    const double kn = geo::inv_norm_vec(f, kv);
    if (kn < 1e-10) {
      rep.degenerate = true;
      return rep;
    }
    rep.min_psi_component = std::min(rep.min_psi_component, kv[2]);
    rep.max_transverse =
        std::max({rep.max_transverse, std::fabs(kv[0]), std::fabs(kv[1])});
    // trace DK as a jet (Weyl connection on plain vector fields)
    Jet tr(0.0, 1);
    for (int i = 0; i < 3; ++i) {
      tr += deriv(kj[i], i);
      for (int j = 0; j < 3; ++j) tr += f.chd[i][i][j] * kj[j];
    }
    rep.divergence = std::max(rep.divergence, std::fabs(tr.value()) / kn);
    // twist
    JVec3 kflat;
    for (int i = 0; i < 3; ++i) {
      Jet s(0.0, kj[0].deg);
      for (int j = 0; j < 3; ++j) s += f.g[i][j] * kj[j];
      kflat[i] = s;
    }
    double tw = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          const int e = geo::eps3(i, j, k);
          if (e == 0) continue;
          tw += e * kflat[i].value() * deriv(kflat[k], j).value();
        }
    rep.twist = std::max(rep.twist, std::fabs(tw) / (kn * kn * kn));
    // conformal-Killing residual of g
    double nab[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = deriv(kflat[j], i).value();
        for (int m = 0; m < 3; ++m)
          s -= f.chg[m][i][j].value() * kflat[m].value();
        nab[i][j] = s;
      }
    JMat3 nj;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) nj[i][j] = Jet(nab[i][j], 0);
    double ck[3][3];
    geo::sym0_of(f, nj, ck);
    rep.conformal = std::max(rep.conformal, geo::inv_norm(f, ck) / kn);
    // L_K D = d trace DK + F^D(K,.)
    Vec3 lie{};
    for (int i = 0; i < 3; ++i) {
      lie[i] = deriv(tr, i).value();
      for (int j = 0; j < 3; ++j) lie[i] += kj[j].value() * f.F[j][i].value();
    }
    rep.lie_weyl = std::max(rep.lie_weyl, geo::inv_norm_form(f, lie) / kn);
  }
  return rep;
}

// ------------------------------------------------------------------
// D*-flatness

struct DstarResult {
  double alpha_fit_residual = 0.0;  // DK against the alpha-triangle form
  double curvature_residual = 0.0;  // projected plaquette curvature norm
};

namespace detail {

// alpha from DK = alpha(.) K - <K,.> alpha-sharp, least squares
inline Vec3 dstar_alpha(const geo::Frame& f, const JVec3& kj, double* fit_res) {
  Vec3 kv{kj[0].value(), kj[1].value(), kj[2].value()};
  double DK[3][3];  // DK[i][k] = D_i K^k
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      double s = deriv(kj[k], i).value();
      for (int j = 0; j < 3; ++j) s += f.chd[k][i][j].value() * kj[j].value();
      DK[i][k] = s;
    }
  Vec3 klow{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) klow[i] += f.g[i][j].value() * kv[j];
  Eigen::MatrixXd M(9, 3);
  Eigen::VectorXd rhs(9);
  int row = 0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l)
        M(row, l) = (l == i ? kv[k] : 0.0) - klow[i] * f.ginv[k][l].value();
      rhs(row) = DK[i][k];
      ++row;
    }
  Eigen::Vector3d a = M.colPivHouseholderQr().solve(rhs);
  if (fit_res) {
    const double scale = std::max(rhs.norm(), 1e-12);
    *fit_res = (M * a - rhs).norm() / scale;
  }
  return {a(0), a(1), a(2)};
}

}  // namespace detail

// curvature of D*_X Y = D_X Y - alpha(Y) X on weight-1/2 fields
// orthogonal to K, by projected plaquette transport
inline DstarResult dstar_flatness(const WeylStructure& w,
                                  const VectorFieldFn& K, const Vec3& p,
                                  double h_loop = 1e-2) {
  DstarResult res;
  {
    auto f = geo::Frame::at(w, p, 2);
    detail::dstar_alpha(f, K(p, 1), &res.alpha_fit_residual);
  }
  auto seg = [&](const Vec3& a, const Vec3& b, double v[3][3]) {
    Vec3 d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    std::vector<double> y(9);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) y[3 * c + r] = v[r][c];
    auto rhs = [&](double t, const std::vector<double>& yy,
                   std::vector<double>& out) {
      Vec3 q{a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]};
      auto f = geo::Frame::at(w, q, 2);
      Vec3 alpha = detail::dstar_alpha(f, K(q, 1), nullptr);
      double M[3][3]{};
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
          for (int j = 0; j < 3; ++j) {
            double Aikj = f.chd[k][i][j].value() -
                          (k == j ? 0.5 * f.om[i].value() : 0.0) -
                          (k == i ? alpha[j] : 0.0);
            M[k][j] += d[i] * Aikj;
          }
      for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) {
          double s = 0.0;
          for (int q2 = 0; q2 < 3; ++q2) s -= M[r][q2] * yy[3 * c + q2];
          out[3 * c + r] = s;
        }
    };
    y = ode::integrate(rhs, std::move(y), 0.0, 1.0, 1e-12, 1e-14);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) v[r][c] = y[3 * c + r];
  };
  auto loop_curv = [&](int i, int j, double h, double c[3][3]) {
    Vec3 q1 = p, q2 = p, q3 = p;
    q1[i] += h;
    q2[i] += h;
    q2[j] += h;
    q3[j] += h;
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    seg(p, q1, v);
    seg(q1, q2, v);
    seg(q2, q3, v);
    seg(q3, p, v);
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s)
        c[r][s] = ((r == s ? 1.0 : 0.0) - v[r][s]) / (h * h);
  };
  auto fbase = geo::Frame::at(w, p, 2);
  JVec3 kj = K(p, 1);
  Vec3 kv{kj[0].value(), kj[1].value(), kj[2].value()};
  Vec3 klow{};
  double kn2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) klow[i] += fbase.g[i][j].value() * kv[j];
  for (int i = 0; i < 3; ++i) kn2 += klow[i] * kv[i];
  double P[3][3];  // projector onto K-perp
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      P[k][j] = (k == j ? 1.0 : 0.0) - kv[k] * klow[j] / kn2;
  static constexpr int planes[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int pl = 0; pl < 3; ++pl) {
    double ch[3][3], ch2[3][3], c[3][3];
    loop_curv(planes[pl][0], planes[pl][1], h_loop, ch);
    loop_curv(planes[pl][0], planes[pl][1], 0.5 * h_loop, ch2);
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) c[r][s] = (4.0 * ch2[r][s] - ch[r][s]) / 3.0;
    // restrict to K-perp: P C P
    double worst = 0.0;
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) {
        double v2 = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) v2 += P[r][a] * c[a][b] * P[b][s];
        worst = std::max(worst, std::fabs(v2));
      }
    res.curvature_residual = std::max(res.curvature_residual, worst);
  }
  return res;
}

}  // namespace ewlab

#endif
