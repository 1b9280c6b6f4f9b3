#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "ewlab/catalog.hpp"
#include "ewlab/toda.hpp"

using namespace ewlab;

namespace {

WeylStructure flat_structure() { return *catalog("flat").weyl; }

// unit radial field on the Euclidean chart
VectorFieldFn radial_field() {
  return [](const Vec3& p, int deg) {
    Jet x = Jet::variable(p[0], 0, deg), y = Jet::variable(p[1], 1, deg),
        z = Jet::variable(p[2], 2, deg);
    Jet r = sqrt(x * x + y * y + z * z);
    return JVec3{x / r, y / r, z / r};
  };
}

VectorFieldFn constant_field(const Vec3& v) {
  return [v](const Vec3&, int deg) {
    return JVec3{Jet(v[0], deg), Jet(v[1], deg), Jet(v[2], deg)};
  };
}

}  // namespace

TEST_CASE("Toda equation residual") {
  Chart ch = cartesian_chart({-1.0, -1.0, 0.3}, {1.0, 1.0, 1.8});
  SECTION("solutions") {
    ScalarField u0 = make_analytic(
        ch, [](auto x, auto, auto) { return 0.0 * x; }, "zero");
    CHECK(std::fabs(toda_residual(u0, {0.2, 0.1, 1.0})) < 1e-12);
    ScalarField ulog = make_analytic(
        ch, [](auto, auto, auto z) { return log(z); }, "log(z)");
    for (const auto& p : sample_probes(ch, 10, 31u))
      CHECK(std::fabs(toda_residual(ulog, p)) < 1e-12);
    ScalarField uaff = make_analytic(
        ch, [](auto, auto, auto z) { return log(0.7 * z + 0.4); }, "log-affine");
    for (const auto& p : sample_probes(ch, 10, 32u))
      CHECK(std::fabs(toda_residual(uaff, p)) < 1e-12);
  }
  SECTION("non-solution") {
    ScalarField u = make_analytic(
        ch, [](auto x, auto, auto) { return x * x; }, "x^2");
    CHECK(toda_residual(u, {0.2, 0.1, 1.0}) == Catch::Approx(2.0));
  }
}

TEST_CASE("the Toda Ansatz structure") {
  Chart ch = cartesian_chart({-1.0, -1.0, 0.3}, {1.0, 1.0, 1.8});
  ScalarField u = make_analytic(
      ch, [](auto, auto, auto z) { return log(z); }, "log(z)");
  WeylStructure w = build_toda(u);
  const Vec3 p{0.3, -0.2, 0.9};
  GeomJets G = w.geom(p, 1);
  CHECK(G.g[0][0].value() == Catch::Approx(p[2]));  // e^u = z
  CHECK(G.g[1][1].value() == Catch::Approx(p[2]));
  CHECK(G.g[2][2].value() == Catch::Approx(1.0));
  CHECK(G.om[2].value() == Catch::Approx(-1.0 / p[2]));  // -u_z
  CHECK(G.om[0].value() == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("congruence decomposition") {
  SECTION("the vertical congruence of a Toda structure") {
    Chart ch = cartesian_chart({-1.0, -1.0, 0.3}, {1.0, 1.0, 1.8});
    ScalarField u = make_analytic(
        ch, [](auto x, auto, auto z) { return log(z) + 0.0 * x; }, "log(z)");
    WeylStructure w = build_toda(u);
    auto chi = constant_field({0.0, 0.0, 1.0});
    for (const auto& p : sample_probes(ch, 10, 33u)) {
      auto r = congruence_decompose(w, chi, p);
      CHECK(r.shear_norm < 1e-10);
      CHECK(r.twist_norm < 1e-10);
      CHECK(r.acceleration_norm < 1e-10);
      // tau = -u_z/2 for the vertical congruence
      CHECK(r.tau == Catch::Approx(-0.5 / p[2]));
    }
  }
  SECTION("radial congruence in flat space") {
    WeylStructure w = flat_structure();
    auto chi = radial_field();
    const Vec3 p{0.5, 0.3, 0.4};
    auto r = congruence_decompose(w, chi, p);
    const double rad = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    CHECK(r.shear_norm < 1e-10);
    CHECK(r.twist_norm < 1e-10);
    CHECK(r.acceleration_norm < 1e-10);
    CHECK(r.divergence == Catch::Approx(2.0 / rad));
    CHECK(r.tau == Catch::Approx(1.0 / rad));
  }
  SECTION("a non-unit field is rejected") {
    WeylStructure w = flat_structure();
    CHECK_THROWS_AS(
        congruence_decompose(w, constant_field({0.0, 0.0, 2.0}), {0.1, 0.1, 0.1}),
        DomainError);
  }
}

TEST_CASE("parallel transport of the rank-4 system") {
  WeylStructure w = flat_structure();
  SECTION("constant sections in flat space") {
    auto out = transport(w, {{0.1, 0.1, 0.1}, {0.5, -0.3, 0.6}},
                         {0.0, 0.0, 1.0, 0.0});
    CHECK(out[0] == Catch::Approx(0.0).margin(1e-10));
    CHECK(out[1] == Catch::Approx(0.0).margin(1e-10));
    CHECK(out[2] == Catch::Approx(1.0));
    CHECK(out[3] == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("the dilation section in flat space") {
    const Vec3 a{0.1, 0.2, -0.3}, b{0.6, -0.4, 0.5};
    auto out = transport(w, {a, b}, {0.0, 0.0, 0.0, 1.0});
    for (int i = 0; i < 3; ++i)
      CHECK(out[i] == Catch::Approx(b[i] - a[i]).margin(1e-10));
    CHECK(out[3] == Catch::Approx(1.0));
  }
  SECTION("transport along a polyline composes") {
    const Vec3 a{0.1, 0.2, -0.3}, m{0.4, 0.4, 0.1}, b{0.6, -0.4, 0.5};
    auto direct = transport(w, {a, b}, {0.3, -0.2, 0.5, 0.7});
    auto via = transport(w, {a, m, b}, {0.3, -0.2, 0.5, 0.7});
    for (int i = 0; i < 4; ++i)
      CHECK(direct[i] == Catch::Approx(via[i]).margin(1e-10));
  }
}

TEST_CASE("linearization and delinearization") {
  SECTION("radial congruence linearizes to the dilation structure") {
    WeylStructure w = flat_structure();
    auto chi = radial_field();
    const Vec3 base{0.5, 0.3, 0.4};
    const double r0 =
        std::sqrt(base[0] * base[0] + base[1] * base[1] + base[2] * base[2]);
    for (const Vec3& p : {Vec3{0.7, 0.1, 0.5}, Vec3{0.4, 0.5, 0.6}}) {
      auto v = linearize(w, chi, base, p);
      // (X, sigma) = (q, 1)/r0 up to the chart-gauge normalization at base
      for (int i = 0; i < 3; ++i)
        CHECK(v[i] == Catch::Approx(p[i] / r0).epsilon(1e-8));
      CHECK(v[3] == Catch::Approx(1.0 / r0).epsilon(1e-8));
      auto back = delinearize(w, v, p);
      const double rp = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      CHECK(back.tau == Catch::Approx(1.0 / rp));
      for (int i = 0; i < 3; ++i)
        CHECK(back.chi[i] == Catch::Approx(p[i] / rp));
    }
  }
  SECTION("sheared congruences are rejected") {
    WeylStructure w = flat_structure();
    // unit field with shear: normalized linear field
    VectorFieldFn chi = [](const Vec3& p, int deg) {
      Jet x = Jet::variable(p[0], 0, deg), y = Jet::variable(p[1], 1, deg);
      Jet n = sqrt(1.0 + x * x + y * y);
      return JVec3{x / n, y / n, recip(n)};
    };
    CHECK_THROWS_AS(linearize(w, chi, {0.1, 0.1, 0.1}, {0.4, 0.2, 0.3}),
                    GateError);
  }
  SECTION("delinearize round trip") {
    WeylStructure w = flat_structure();
    auto d = delinearize(w, {0.0, 0.0, 2.0, 0.6}, {0.1, 0.2, 0.3});
    CHECK(d.mu == Catch::Approx(4.0));
    CHECK(d.tau == Catch::Approx(0.3));
    CHECK(d.chi[2] == Catch::Approx(1.0));
  }
}

TEST_CASE("structure counts") {
  SECTION("flat space carries the full four-dimensional family") {
    WeylStructure w = flat_structure();
    auto probes = sample_probes(w.chart, 2, 34u);
    auto sc = toda_structure_count(w, chart_center(w.chart), probes);
    CHECK(sc.upper_bound == 4);
    CHECK(sc.confirmed == 4);
    CHECK(sc.gap > 1e5);
  }
  SECTION("hyperbolic space carries the full family") {
    auto e = catalog("hyperbolic");
    auto probes = sample_probes(e.weyl->chart, 2, 35u);
    auto sc = toda_structure_count(*e.weyl, chart_center(e.weyl->chart), probes);
    CHECK(sc.upper_bound == 4);
    CHECK(sc.confirmed == 4);
  }
  SECTION("the three-parameter multi-center space carries two") {
    auto e = catalog("taubnut");
    auto probes = sample_probes(e.weyl->chart, 2, 36u);
    auto sc = toda_structure_count(*e.weyl, chart_center(e.weyl->chart), probes);
    CHECK(sc.upper_bound == 2);
    CHECK(sc.confirmed == 2);
    CHECK(sc.gap > 1e2);
    CHECK(sc.loop_residual < 1e-6);
  }
  SECTION("the two-center space carries two") {
    auto e = catalog("eguchi-hanson-1");
    auto probes = sample_probes(e.weyl->chart, 2, 37u);
    auto sc = toda_structure_count(*e.weyl, chart_center(e.weyl->chart), probes);
    CHECK(sc.upper_bound == 2);
    CHECK(sc.confirmed == 2);
  }
  SECTION("the squashed sphere carries none") {
    auto e = catalog("berger", {{"a", 1.5}});
    auto probes = sample_probes(e.weyl->chart, 2, 38u);
    auto sc = toda_structure_count(*e.weyl, chart_center(e.weyl->chart), probes);
    CHECK(sc.upper_bound == 0);
    CHECK(sc.confirmed == 0);
    CHECK(sc.gap > 10.0);
  }
  SECTION("gated on the Einstein-Weyl property") {
    WeylStructure w;
    w.chart = cartesian_chart();
    w.geom = [](const Vec3& p, int deg) {
      GeomJets G;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) G.g[i][j] = Jet(i == j ? 1.0 : 0.0, deg);
      G.om[0] = Jet::variable(p[1], 1, deg);
      G.om[1] = Jet(0.0, deg);
      G.om[2] = Jet(0.0, deg);
      return G;
    };
    CHECK_THROWS_AS(
        toda_structure_count(w, {0.0, 0.0, 0.0}, {{0.2, 0.1, 0.0}}),
        GateError);
  }
}

TEST_CASE("curvature obstructions") {
  SECTION("trivial in flat space") {
    WeylStructure w = flat_structure();
    CHECK(std::fabs(obstruction_orth(w, {1.0, 2.0, 3.0}, {0.1, 0.2, 0.3})) <
          1e-14);
    auto ob = obstruction_cy(w, {1.0, 2.0, 3.0, 0.5}, {0.1, 0.2, 0.3});
    CHECK(ob.residual_norm < 1e-12);
    CHECK(std::fabs(ob.null_value) < 1e-12);
  }
  SECTION("kernel seeds satisfy the obstructions") {
    auto e = catalog("taubnut");
    const Vec3 base = chart_center(e.weyl->chart);
    auto probes = sample_probes(e.weyl->chart, 2, 39u);
    auto sc = toda_structure_count(*e.weyl, base, probes);
    REQUIRE(sc.basis.size() == 2);
    for (const auto& v : sc.basis) {
      auto ob = obstruction_cy(*e.weyl, v, base);
      CHECK(ob.residual_norm < 1e-5);
      CHECK(std::fabs(ob.null_value) < 1e-5);
      CHECK(std::fabs(obstruction_orth(*e.weyl, {v[0], v[1], v[2]}, base)) <
            1e-5);
    }
  }
}

TEST_CASE("Wronskian vector fields") {
  SECTION("constant seeds in flat space give a translation") {
    WeylStructure w = flat_structure();
    const Vec3 base{0.0, 0.0, 0.0};
    auto K = wronskian_field(w, base, {1.0, 0.0, 0.0, 0.0},
                             {0.0, 1.0, 0.0, 0.0});
    const Vec3 q{0.3, -0.2, 0.4};
    JVec3 kj = K(q, 1);
    CHECK(kj[0].value() == Catch::Approx(0.0).margin(1e-9));
    CHECK(kj[1].value() == Catch::Approx(0.0).margin(1e-9));
    CHECK(kj[2].value() == Catch::Approx(1.0).epsilon(1e-8));
  }
  SECTION("a translation against the dilation gives a rotation") {
    WeylStructure w = flat_structure();
    const Vec3 base{0.0, 0.0, 0.0};
    // X1 = e_x, X2 = q: K = e_x cross q
    auto K = wronskian_field(w, base, {1.0, 0.0, 0.0, 0.0},
                             {0.0, 0.0, 0.0, 1.0});
    const Vec3 q{0.3, -0.2, 0.4};
    JVec3 kj = K(q, 1);
    CHECK(kj[0].value() == Catch::Approx(0.0).margin(1e-9));
    CHECK(kj[1].value() == Catch::Approx(-q[2]).epsilon(1e-8));
    CHECK(kj[2].value() == Catch::Approx(q[1]).epsilon(1e-8));
    // rotations are Killing: all axial residuals vanish
    auto rep = axial_symmetry_checks(w, K, {{0.3, -0.2, 0.4}, {0.5, 0.1, 0.2}});
    REQUIRE_FALSE(rep.degenerate);
    CHECK(rep.divergence < 1e-8);
    CHECK(rep.twist < 1e-8);
    CHECK(rep.conformal < 1e-8);
    CHECK(rep.lie_weyl < 1e-8);
  }
}

TEST_CASE("axial symmetry of the multi-center spaces") {
  auto e = catalog("taubnut");
  const Vec3 base = chart_center(e.weyl->chart);
  auto probes = sample_probes(e.weyl->chart, 2, 40u);
  auto sc = toda_structure_count(*e.weyl, base, probes);
  REQUIRE(sc.basis.size() == 2);
  auto K = wronskian_field(*e.weyl, base, sc.basis[0], sc.basis[1]);
  auto kprobes = sample_probes(e.weyl->chart, 4, 41u);
  auto rep = axial_symmetry_checks(*e.weyl, K, kprobes);
  REQUIRE_FALSE(rep.degenerate);
  CHECK(rep.divergence < 1e-6);
  CHECK(rep.twist < 1e-6);
  CHECK(rep.conformal < 1e-6);
  CHECK(rep.lie_weyl < 1e-6);
  // K points along the rotation direction: no transverse components, and
  // the psi component keeps one sign
  JVec3 k0 = K(kprobes[0], 0);
  const double kpsi = std::fabs(k0[2].value());
  CHECK(rep.max_transverse < 1e-6 * kpsi);
  CHECK(rep.min_psi_component * k0[2].value() > 0.0);
}

TEST_CASE("flatness of the reduced connection") {
  SECTION("rotations in flat space") {
    WeylStructure w = flat_structure();
    VectorFieldFn K = [](const Vec3& p, int deg) {
      Jet x = Jet::variable(p[0], 0, deg), y = Jet::variable(p[1], 1, deg);
      return JVec3{-1.0 * y, x, Jet(0.0, deg)};
    };
    auto res = dstar_flatness(w, K, {0.4, 0.3, 0.2});
    CHECK(res.alpha_fit_residual < 1e-10);
    CHECK(res.curvature_residual < 1e-7);
  }
  SECTION("the rotation field of the multi-center spaces") {
    for (const char* label : {"ward-logrho", "taubnut"}) {
      DYNAMIC_SECTION("space " << label) {
        auto e = catalog(label);
        auto K = constant_field({0.0, 0.0, 1.0});
        const Vec3 p = chart_center(e.weyl->chart);
        auto res = dstar_flatness(*e.weyl, K, p);
        CHECK(res.alpha_fit_residual < 1e-8);
        CHECK(res.curvature_residual < 1e-6);
      }
    }
  }
}
