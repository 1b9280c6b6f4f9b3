// Acceptance gate: one pass/fail line per criterion, exit 0 only if all
// criteria hold.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ewlab/report.hpp"

using namespace ewlab;

namespace {

int failures = 0;

void criterion(int n, bool ok, const std::string& what) {
  std::printf("criterion %2d: %s  %s\n", n, ok ? "PASS" : "FAIL", what.c_str());
  if (!ok) ++failures;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::vector<HarmonicProfile> acceptance_profiles() {
  return {profile_logrho(),
          profile_linear(1.0),
          profile_point_source(1.0),
          profile_taubnut(1.0, 1.0, 1.0),
          profile_eguchi_hanson(-1, 0.0, 1.0, 1.0),
          profile_eguchi_hanson(1, 1.0, 1.0, 1.0)};
}

double max_ew(const WeylStructure& w, int nprobes, std::uint64_t seed) {
  double worst = 0.0;
  for (const auto& p : sample_probes(w.chart, nprobes, seed))
    worst = std::max(worst, ew_residual_norm(w, p));
  return worst;
}

}  // namespace

int main() {
  // 1. Ward construction validity
  {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const auto& prof : acceptance_profiles())
      worst = std::max(worst, max_ew(ward_build(prof), 100, 101u));
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    criterion(1, worst < 1e-6 && secs < 30.0,
              "harmonic profiles give Einstein-Weyl structures (max " +
                  sci(worst) + ", " + sci(secs) + " s)");
  }

  // 2. Toda <-> Einstein-Weyl correlation
  {
    Chart ch = cartesian_chart({-1.0, -1.0, 0.3}, {1.0, 1.0, 1.8});
    double worst = 0.0;
    std::vector<ScalarField> sols;
    sols.push_back(make_analytic(
        ch, [](auto x, auto, auto) { return 0.0 * x; }, "zero"));
    sols.push_back(make_analytic(
        ch, [](auto, auto, auto z) { return log(1.0 + z); }, "log(1+z)"));
    sols.push_back(make_analytic(
        ch, [](auto x, auto y, auto) { return x + y; }, "x+y"));
    for (const auto& u : sols)
      worst = std::max(worst, max_ew(build_toda(u), 100, 102u));
    ScalarField bad = make_analytic(
        ch, [](auto x, auto, auto) { return x * x; }, "x^2");
    bool bad_residual_two = true;
    for (const auto& p : sample_probes(ch, 20, 103u))
      bad_residual_two =
          bad_residual_two && std::fabs(toda_residual(bad, p) - 2.0) < 1e-12;
    const double bad_ew = max_ew(build_toda(bad), 20, 104u);
    criterion(2, worst < 1e-6 && bad_residual_two && bad_ew > 1e-2,
              "Toda solutions are Einstein-Weyl, non-solutions are not (max " +
                  sci(worst) + ", control " +
                  sci(bad_ew) + ")");
  }

  // 3. Structure counts with spectral gaps
  {
    struct Case {
      std::string label;
      WeylStructure w;
      int expect;
    };
    Chart ch = cartesian_chart({-1.0, -1.0, 0.3}, {1.0, 1.0, 1.8});
    std::vector<Case> cases;
    cases.push_back({"flat", *catalog("flat").weyl, 4});
    cases.push_back(
        {"toda(log z)",
         build_toda(make_analytic(
             ch, [](auto, auto, auto z) { return log(z); }, "log(z)")),
         4});
    cases.push_back({"taubnut", *catalog("taubnut").weyl, 2});
    cases.push_back({"eguchi-hanson-1", *catalog("eguchi-hanson-1").weyl, 2});
    cases.push_back(
        {"berger(1.5)", *catalog("berger", {{"a", 1.5}}).weyl, 0});
    bool ok = true;
    std::string detail;
    for (auto& c : cases) {
      const auto t0 = std::chrono::steady_clock::now();
      auto sc = toda_structure_count(c.w, chart_center(c.w.chart),
                                     sample_probes(c.w.chart, 2, 105u));
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
      const bool this_ok = sc.upper_bound == c.expect &&
                           sc.confirmed == c.expect && sc.gap >= 1e5 &&
                           secs < 60.0;
      ok = ok && this_ok;
      detail += c.label + "=" + std::to_string(sc.confirmed) + " ";
    }
    criterion(3, ok, "structure counts with gap >= 1e5: " + detail);
  }

  // 4. Obstruction identities for every confirmed structure
  {
    bool ok = true;
    double worst_orth = 0.0, worst_cy = 0.0;
    for (const auto& prof : acceptance_profiles()) {
      WeylStructure w = ward_build(prof);
      const Vec3 base = chart_center(w.chart);
      auto sc = toda_structure_count(w, base,
                                     sample_probes(w.chart, 2, 106u));
      ok = ok && sc.confirmed == sc.upper_bound && sc.confirmed > 0;
      for (const auto& p : sample_probes(w.chart, 50, 107u)) {
        auto T = transport_matrix(w, base, p);
        for (const auto& seed : sc.basis) {
          std::array<double, 4> v{};
          for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) v[r] += T[r][c] * seed[c];
          worst_orth = std::max(
              worst_orth,
              std::fabs(obstruction_orth(w, {v[0], v[1], v[2]}, p)));
          worst_cy =
              std::max(worst_cy, obstruction_cy(w, v, p).residual_norm);
        }
      }
    }
    criterion(4, ok && worst_orth < 1e-6 && worst_cy < 1e-5,
              "confirmed structures satisfy the obstructions (orth " +
                  sci(worst_orth) + ", cy " +
                  sci(worst_cy) + ")");
  }

  // 5. Curvature decomposition on weighted vector fields
  {
    double worst = 0.0;
    bool all = true;
    for (const auto& label : catalog_labels()) {
      auto e = catalog(label);
      for (const auto& p : sample_probes(e.weyl->chart, 100, 108u)) {
        auto r = ewcurv_check(*e.weyl, p);
        all = all && r.applicable;
        worst = std::max(worst, r.residual);
      }
    }
    criterion(5, all && worst < 1e-6,
              "curvature decomposition residual (max " + sci(worst) +
                  ")");
  }

  // 6. Closed-form crosschecks
  {
    double worst = 0.0;
    for (const char* label : {"taubnut", "eguchi-hanson-1", "eguchi-hanson-2"}) {
      auto e = catalog(label);
      for (const auto& p : sample_probes(e.closed_form->chart, 50, 109u))
        worst = std::max(worst, closed_form_crosscheck(e, p));
    }
    double worst_q = 0.0;
    for (const auto& p : sample_probes(detail::eh_lw_chart(-1), 50, 110u)) {
      auto r = s2h2_quotient_check(1.0, 1.0, p);
      worst_q = std::max({worst_q, r.conformal_mismatch, r.omega_mismatch});
    }
    criterion(6, worst < 1e-8 && worst_q < 1e-7,
              "closed forms match the construction (" + sci(worst) +
                  ", quotient " + sci(worst_q) + ")");
  }

  // 7. Wronskian symmetry of the multi-center space
  {
    auto e = catalog("taubnut");
    const Vec3 base = chart_center(e.weyl->chart);
    auto sc = toda_structure_count(*e.weyl, base,
                                   sample_probes(e.weyl->chart, 2, 111u));
    bool ok = sc.confirmed == 2;
    if (ok) {
      auto s1 = sc.basis[0], s2 = sc.basis[1];
      auto K = wronskian_field(*e.weyl, base, s1, s2);
      // orient the family so that K points along +psi
      if (K(base, 0)[2].value() < 0.0) std::swap(s1, s2);
      K = wronskian_field(*e.weyl, base, s1, s2);
      auto probes = sample_probes(e.weyl->chart, 4, 112u);
      auto rep = axial_symmetry_checks(*e.weyl, K, probes);
      auto ds = dstar_flatness(*e.weyl, K, base);
      ok = !rep.degenerate && rep.divergence < 1e-5 && rep.twist < 1e-5 &&
           rep.conformal < 1e-5 && rep.lie_weyl < 1e-5 &&
           rep.min_psi_component > 0.0 &&
           rep.max_transverse < 1e-6 * rep.min_psi_component &&
           ds.curvature_residual < 1e-6;
      criterion(7, ok,
                "Wronskian field is the rotation (residuals < 1e-5, reduced "
                "curvature " +
                    sci(ds.curvature_residual) + ")");
    } else {
      criterion(7, false, "structure count failed");
    }
  }

  // 8. Hyperbolic eigenfunction identity
  {
    double worst = 0.0;
    for (const auto& prof : acceptance_profiles())
      for (const auto& p : sample_probes(prof.chart, 100, 113u))
        worst = std::max(worst, std::fabs(eigenfunction_residual(prof, p)));
    criterion(8, worst < 1e-8,
              "profiles solve the hyperbolic eigenfunction equation (max " +
                  sci(worst) + ")");
  }

  // 9. Engine health
  {
    Chart ch = cartesian_chart();
    bool order_ok = true;
    for (const char* src : {"exp(x)", "sin(x)*exp(y)", "cos(x+z)"}) {
      auto r = convergence_order(parse_expression(src, ch), {0.4, 0.3, 0.2});
      order_ok = order_ok && !r.saturated && r.order > 3.5 && r.order < 4.5;
    }
    double worst = 0.0;
    for (const auto& prof : acceptance_profiles()) {
      ScalarField s = profile_field(prof);
      for (const auto& p : sample_probes(prof.chart, 20, 114u)) {
        Jet3 a = eval_jet3(s, p);  // analytic jets
        Jet3 b = fd_jet3(s.eval_d, p);
        worst = std::max(worst, std::fabs(a.value - b.value));
        for (int i = 0; i < 3; ++i) {
          worst = std::max(worst, std::fabs(a.grad[i] - b.grad[i]));
          for (int j = 0; j < 3; ++j)
            worst = std::max(worst, std::fabs(a.hess[i][j] - b.hess[i][j]));
        }
      }
    }
    criterion(9, order_ok && worst < 1e-6,
              "FD order 4 and analytic agreement (max dev " +
                  sci(worst) + ")");
  }

  // 10. Determinism of the reports
  {
    auto battery = []() {
      std::string acc;
      std::vector<RunConfig> cfgs;
      RunConfig a;
      a.command = "verify";
      a.check = "ew";
      a.space = "taubnut";
      a.probes = 20;
      a.seed = 7;
      cfgs.push_back(a);
      RunConfig b;
      b.command = "structures";
      b.space = "taubnut";
      b.probes = 2;
      b.seed = 7;
      cfgs.push_back(b);
      RunConfig c;
      c.command = "verify";
      c.check = "crosscheck";
      c.space = "eguchi-hanson-2";
      c.probes = 10;
      c.seed = 7;
      cfgs.push_back(c);
      RunConfig d;
      d.command = "obstruct";
      d.space = "hyperbolic";
      d.congruence = "0,0,1";
      d.probes = 5;
      d.seed = 7;
      cfgs.push_back(d);
      for (const auto& cfg : cfgs) {
        ordered_json j = to_json(run_command(cfg));
        j.erase("wall_time_ms");
        acc += j.dump() + "\n";
      }
      return acc;
    };
    const std::string first = battery(), second = battery();
    criterion(10, first == second,
              "repeated runs serialize byte-identically modulo wall time");
  }

  std::printf("%s\n", failures == 0 ? "ACCEPTANCE: ALL PASS"
                                    : "ACCEPTANCE: FAILURES PRESENT");
  return failures == 0 ? 0 : 1;
}
