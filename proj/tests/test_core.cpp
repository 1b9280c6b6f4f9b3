#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "ewlab/chart.hpp"
#include "ewlab/expr.hpp"
#include "ewlab/field.hpp"
#include "ewlab/jet.hpp"

using namespace ewlab;

TEST_CASE("jet arithmetic reproduces closed-form derivatives") {
  const double x0 = 0.7, y0 = -0.3, z0 = 1.2;
  Jet x = Jet::variable(x0, 0), y = Jet::variable(y0, 1),
      z = Jet::variable(z0, 2);

  SECTION("polynomial") {
    Jet f = x * x * y + z * z * z - 2.0 * x * z;
    CHECK(f.value() == Catch::Approx(x0 * x0 * y0 + z0 * z0 * z0 - 2 * x0 * z0));
    CHECK(f.grad(0) == Catch::Approx(2 * x0 * y0 - 2 * z0));
    CHECK(f.hess(0, 1) == Catch::Approx(2 * x0));
    CHECK(f.third(2, 2, 2) == Catch::Approx(6.0));
    CHECK(f.third(0, 0, 1) == Catch::Approx(2.0));
  }
  SECTION("transcendental") {
    Jet f = exp(x) * sin(y) + log(z) * sqrt(z);
    CHECK(f.grad(0) == Catch::Approx(std::exp(x0) * std::sin(y0)));
    CHECK(f.grad(1) == Catch::Approx(std::exp(x0) * std::cos(y0)));
    const double dlogsqrt =
        std::sqrt(z0) / z0 + 0.5 * std::log(z0) / std::sqrt(z0);
    CHECK(f.grad(2) == Catch::Approx(dlogsqrt));
    CHECK(f.hess(0, 1) == Catch::Approx(std::exp(x0) * std::cos(y0)));
  }
  SECTION("quotients and reciprocals") {
    Jet f = (x + y) / (z * z);
    CHECK(f.grad(2) == Catch::Approx(-2.0 * (x0 + y0) / (z0 * z0 * z0)));
    Jet g = recip(x * x + 1.0);
    const double d = 1.0 + x0 * x0;
    CHECK(g.grad(0) == Catch::Approx(-2.0 * x0 / (d * d)));
  }
  SECTION("half-integer powers via sqrt") {
    Jet f = pow_halfint(z, 3);  // z^{3/2}
    CHECK(f.value() == Catch::Approx(std::pow(z0, 1.5)));
    CHECK(f.grad(2) == Catch::Approx(1.5 * std::sqrt(z0)));
    Jet g = pow_halfint(z, -1);  // z^{-1/2}
    CHECK(g.grad(2) == Catch::Approx(-0.5 * std::pow(z0, -1.5)));
    Jet h = pow_halfint(x, 4);  // x^2
    CHECK(h.hess(0, 0) == Catch::Approx(2.0));
  }
  SECTION("deriv operator lowers degree") {
    Jet f = sin(x * y);
    Jet fx = deriv(f, 0);
    CHECK(fx.deg == 3);
    CHECK(fx.value() == Catch::Approx(y0 * std::cos(x0 * y0)));
    CHECK(fx.grad(1) ==
          Catch::Approx(std::cos(x0 * y0) - x0 * y0 * std::sin(x0 * y0)));
  }
  SECTION("domain errors") {
    Jet w = Jet::variable(-1.0, 0);
    CHECK_THROWS_AS(log(w), std::domain_error);
    CHECK_THROWS_AS(sqrt(w), std::domain_error);
    CHECK_THROWS_AS(recip(Jet(0.0)), std::domain_error);
  }
}

TEST_CASE("expression parsing") {
  Chart ch = cartesian_chart();

  SECTION("basic evaluation") {
    auto t = parse_expression_text("x^2", ch.coords);
    CHECK(t->eval<double>({3.0, 0.0, 0.0}) == Catch::Approx(9.0));
    auto u = parse_expression_text("log(1+z)", ch.coords);
    CHECK(u->eval<double>({0.0, 0.0, 1.0}) == Catch::Approx(std::log(2.0)));
  }
  SECTION("precedence and associativity") {
    auto t = parse_expression_text("2+3*4^2", ch.coords);
    CHECK(t->eval<double>({0, 0, 0}) == Catch::Approx(50.0));
    auto u = parse_expression_text("2-3-4", ch.coords);
    CHECK(u->eval<double>({0, 0, 0}) == Catch::Approx(-5.0));
    auto v = parse_expression_text("-x^2", ch.coords);
    CHECK(v->eval<double>({2, 0, 0}) == Catch::Approx(-4.0));
  }
  SECTION("half-integer exponents") {
    auto t = parse_expression_text("x^1.5", ch.coords);
    CHECK(t->eval<double>({4.0, 0, 0}) == Catch::Approx(8.0));
    auto u = parse_expression_text("x^(-0.5)", ch.coords);
    CHECK(u->eval<double>({4.0, 0, 0}) == Catch::Approx(0.5));
  }
  SECTION("errors carry byte offsets") {
    try {
      parse_expression_text("a*log(rho)", ch.coords);
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      CHECK(e.offset == 0);
      CHECK(e.message.find("unknown identifier") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_expression_text("sin(x,y)", ch.coords), ParseError);
    CHECK_THROWS_AS(parse_expression_text("x^y", ch.coords), ParseError);
    CHECK_THROWS_AS(parse_expression_text("x+", ch.coords), ParseError);
    CHECK_THROWS_AS(parse_expression_text("frob(x)", ch.coords), ParseError);
  }
  SECTION("print/parse round trip") {
    for (const char* src :
         {"log(1+z)", "x^2*sin(y)-z/x", "exp(x)*cos(y)+sqrt(1+z^2)",
          "-x^(-2)+tan(z)", "x^0.5+atan(y)"}) {
      auto t1 = parse_expression_text(src, ch.coords);
      std::string printed = print_expression(*t1, ch.coords);
      auto t2 = parse_expression_text(printed, ch.coords);
      CHECK(t1->equal(*t2));
    }
  }
  SECTION("expressions evaluate over jets") {
    auto t = parse_expression_text("exp(x)*sin(y)", ch.coords);
    std::array<Jet, 3> v{Jet::variable(0.3, 0), Jet::variable(0.7, 1),
                         Jet::variable(0.0, 2)};
    Jet j = t->eval<Jet>(v);
    CHECK(j.grad(0) == Catch::Approx(std::exp(0.3) * std::sin(0.7)));
  }
}

TEST_CASE("charts and probe sampling") {
  Chart ch = halfspace_chart();
  SECTION("margin safety") {
    CHECK(margin_safe(ch, {1.0, 1.0, 0.5}));
    CHECK_FALSE(margin_safe(ch, {0.01, 1.0, 0.5}));
    CHECK_THROWS_AS(require_margin_safe(ch, {5.0, 1.0, 0.5}), DomainError);
  }
  SECTION("deterministic sampling") {
    auto a = sample_probes(ch, 25, 42u);
    auto b = sample_probes(ch, 25, 42u);
    REQUIRE(a.size() == 25);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] == b[i]);
      CHECK(margin_safe(ch, a[i]));
    }
    auto c = sample_probes(ch, 25, 43u);
    CHECK(a[0] != c[0]);
  }
}

TEST_CASE("finite-difference engine") {
  Chart ch = cartesian_chart();

  SECTION("stencil exactness on quartics") {
    ScalarField f = parse_expression("x^4+x^2*y*z-3*z^4+y^3*x", ch);
    ScalarField fa = make_analytic(
        ch,
        [](auto x, auto y, auto z) {
          return x * x * x * x + x * x * y * z - 3.0 * z * z * z * z +
                 y * y * y * x;
        },
        "quartic");
    for (auto& p : sample_probes(ch, 10, 1u, 0.1)) {
      Jet3 fd = eval_jet3(f, p);
      Jet3 ex = eval_jet3(fa, p);
      const double scale = 10.0;
      CHECK(fd.value == Catch::Approx(ex.value));
      for (int i = 0; i < 3; ++i)
        CHECK(std::fabs(fd.grad[i] - ex.grad[i]) < 1e-10 * scale);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          CHECK(std::fabs(fd.hess[i][j] - ex.hess[i][j]) < 1e-10 * scale);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            CHECK(std::fabs(fd.third[i][j][k] - ex.third[i][j][k]) <
                  1e-7 * scale);
    }
  }
  SECTION("worked examples") {
    ScalarField f = parse_expression("z^2", ch);
    Jet3 j = fd_jet3(f.eval_d, {0.0, 0.0, 2.0});
    CHECK(j.value == Catch::Approx(4.0));
    CHECK(j.grad[2] == Catch::Approx(4.0));
    CHECK(j.hess[2][2] == Catch::Approx(2.0));

    Chart hs = halfspace_chart();
    ScalarField g = parse_expression("log(rho)", hs);
    Jet3 jg = fd_jet3(g.eval_d, {1.0, 1.0, 0.5});
    CHECK(jg.grad[0] == Catch::Approx(1.0));
    CHECK(jg.hess[0][0] == Catch::Approx(-1.0).margin(1e-8));
  }
  SECTION("analytic vs FD agreement") {
    ScalarField fd = parse_expression("exp(x)*sin(y)+log(2+z)", ch);
    ScalarField an = make_analytic(
        ch,
        [](auto x, auto y, auto z) { return exp(x) * sin(y) + log(2.0 + z); },
        "oracle");
    for (auto& p : sample_probes(ch, 20, 3u, 0.1)) {
      Jet3 a = eval_jet3(an, p);
      Jet3 b = eval_jet3(fd, p);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          CHECK(std::fabs(a.hess[i][j] - b.hess[i][j]) < 1e-8);
          for (int k = 0; k < 3; ++k)
            CHECK(std::fabs(a.third[i][j][k] - b.third[i][j][k]) < 1e-6);
        }
    }
  }
  SECTION("convergence order") {
    ScalarField f = parse_expression("exp(x)", ch);
    auto r = convergence_order(f, {0.5, 0.0, 0.0});
    CHECK_FALSE(r.saturated);
    CHECK(r.order > 3.5);
    CHECK(r.order < 4.5);

    ScalarField q = parse_expression("x^3-2*x", ch);
    CHECK(convergence_order(q, {0.5, 0.0, 0.0}).saturated);

    Chart hs = halfspace_chart();
    ScalarField lr = parse_expression("log(rho)", hs);
    CHECK_THROWS_AS(convergence_order(lr, {0.02, 1.0, 0.5}), DomainError);
  }
  SECTION("hessian and third symmetry") {
    ScalarField f = parse_expression("sin(x*y)*exp(z)+cos(y*z)", ch);
    Jet3 j = eval_jet3(f, {0.3, -0.4, 0.2});
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        CHECK(j.hess[i][k] == j.hess[k][i]);
        for (int l = 0; l < 3; ++l) {
          CHECK(j.third[i][k][l] == j.third[k][i][l]);
          CHECK(j.third[i][k][l] == j.third[i][l][k]);
        }
      }
  }
  SECTION("non-finite values rejected") {
    ScalarField f = parse_expression("1/x", ch);
    CHECK_THROWS_AS(eval_jet3(f, {0.0, 0.5, 0.5}), DomainError);
  }
}
