#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "scenarios.hpp"
#include "wgwin/model.hpp"

using namespace wgwin;
using wgwin::testing::strip_model;
using wgwin::testing::wide_strip_model;

TEST_CASE("straight strip with identity coefficients validates") {
  auto m = strip_model(0.3);
  CHECK(m.alpha0 == 1.0);
  CHECK(check_model(m.spec, m.chart, m.window, m.trunc).empty());
}

TEST_CASE("coefficient matrix with a negative eigenvalue is rejected") {
  auto m = strip_model(0.3);
  WaveguideSpec bad = m.spec;
  bad.coeff = make_coefficients("pinched", {});
  // min eigenvalue -0.1 at the sample (-1/2, 1/2)
  CHECK_THROWS_AS(validate_spec(bad, m.chart, m.window, m.trunc), Error);
  try {
    validate_spec(bad, m.chart, m.window, m.trunc);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EllipticityViolation);
  }
}

TEST_CASE("window that does not fit the chart is rejected") {
  auto m = strip_model(0.3);
  WindowSpec w = m.window;
  w.ell = 0.6;  // 0.6 * 2 > chart length 1
  try {
    validate_spec(m.spec, m.chart, w, m.trunc);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GeometryInconsistency);
  }
}

TEST_CASE("scale_window maps the reference window affinely") {
  auto m = wide_strip_model();
  SUBCASE("identity scale reproduces kappa^{-1}(Sigma*)") {
    auto w = scale_window(m, 1.0);
    CHECK(w.y_lo == doctest::Approx(-2.5).epsilon(1e-15));
    CHECK(w.y_hi == doctest::Approx(-0.5).epsilon(1e-15));
  }
  SUBCASE("half scale on the documented strip chart") {
    // chart kappa(y) = 2 (y + 1/2): the unscaled window is (-1, 0) and
    // halving the scale shrinks it to (-0.75, -0.25) about the centre
    auto ms = strip_model(0.3);
    ChartSpec chart = ms.chart;
    chart.halflen = 1.0;
    chart.scale = 2.0;
    auto wide = validate_spec(ms.spec, chart, ms.window, ms.trunc);
    CHECK(wide.alpha0 == 0.5);
    auto w1 = scale_window(wide, 1.0);
    CHECK(w1.y_lo == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(w1.y_hi == doctest::Approx(0.0).epsilon(1e-15));
    auto w = scale_window(wide, 0.5);
    CHECK(w.y_lo == doctest::Approx(-0.75).epsilon(1e-15));
    CHECK(w.y_hi == doctest::Approx(-0.25).epsilon(1e-15));
  }
  SUBCASE("composition law in chart coordinates") {
    double l1 = 0.7, l2 = 0.4;
    auto w12 = scale_window(m, l1 * l2);
    auto w2 = scale_window(m, l2);
    // scaling by l1 in chart coordinates shrinks the l2-window about center
    double c = m.chart.center_y;
    CHECK(w12.y_lo == doctest::Approx(c + l1 * (w2.y_lo - c)).epsilon(1e-14));
    CHECK(w12.y_hi == doctest::Approx(c + l1 * (w2.y_hi - c)).epsilon(1e-14));
  }
  SUBCASE("monotone in ell") {
    auto a = scale_window(m, 0.2), b = scale_window(m, 0.5);
    CHECK(a.y_lo > b.y_lo);
    CHECK(a.y_hi < b.y_hi);
  }
  SUBCASE("out of range scale") {
    CHECK_THROWS_AS(scale_window(m, 0.0), Error);
    CHECK_THROWS_AS(scale_window(m, 1.5), Error);
  }
}

TEST_CASE("JSON round trip is bit identical and strict") {
  auto m = strip_model(0.17);
  json j = m.to_json();
  auto m2 = model_from_json(j);
  CHECK(m2.to_json().dump() == j.dump());
  CHECK(m2.to_json() == j);

  SUBCASE("unknown keys rejected") {
    json bad = j;
    bad["geometry"]["extra"] = 1;
    CHECK_THROWS_AS(model_from_json(bad), Error);
    json bad2 = j;
    bad2["typo_section"] = json::object();
    CHECK_THROWS_AS(model_from_json(bad2), Error);
  }
}

TEST_CASE("diag and sheared builtins keep the cylinder limit") {
  auto m = wgwin::testing::strip_model_coeff("diag", {4.0, 1.0, 0.0});
  CHECK(m.spec.coeff.a_mat0(0.3)(0, 0) == 4.0);
  auto s = wgwin::testing::strip_model_coeff("sheared", {0.3});
  CHECK(s.spec.coeff.a_mat0(0.7)(0, 1) == 0.3);
  CHECK_THROWS_AS(make_coefficients("nope", {}), Error);
}
