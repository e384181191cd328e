#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wgwin/gsigal.hpp"

using namespace wgwin;

namespace {

MeromorphicFamily diag_family(std::function<Complex(Complex)> f11, std::function<Complex(Complex)> f22) {
  MeromorphicFamily fam;
  fam.eval = [=](Complex w) {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2, 2);
    A(0, 0) = f11(w);
    A(1, 1) = f22(w);
    return A;
  };
  return fam;
}

}  // namespace

TEST_CASE("simple characteristic value counts once") {
  auto fam = diag_family([](Complex w) { return w - 0.3; }, [](Complex) { return Complex(1, 0); });
  ContourSpec c{Complex(0.3, 0), 0.2, 32};
  CHECK(multiplicity(fam, c) == 1);
}

TEST_CASE("double root: count and first moment") {
  MeromorphicFamily fam;
  fam.eval = [](Complex w) {
    Eigen::MatrixXcd A(1, 1);
    A(0, 0) = (w - 0.3) * (w - 0.3);
    return A;
  };
  ContourSpec c{Complex(0.25, 0), 0.2, 64};
  CHECK(multiplicity(fam, c) == 2);
  Complex s = log_residue_sum(fam, c, [](Complex w) { return w; });
  CHECK(std::abs(s - Complex(0.6, 0)) < 1e-9);
}

TEST_CASE("declared pole counts with negative (polar) multiplicity") {
  auto fam = diag_family([](Complex w) { return 1.0 / (w - 0.3); }, [](Complex) { return Complex(1, 0); });
  ContourSpec c{Complex(0.3, 0), 0.2, 64};
  CHECK(multiplicity(fam, c) == -1);
}

TEST_CASE("inversion antisymmetry M(A) = -M(A^{-1})") {
  auto fam = diag_family([](Complex w) { return w - 0.3; }, [](Complex w) { return (w - 0.31); });
  MeromorphicFamily inv;
  inv.eval = [&fam](Complex w) { return fam.eval(w).inverse().eval(); };
  ContourSpec c{Complex(0.3, 0), 0.1, 64};
  CHECK(multiplicity(fam, c) == 2);
  CHECK(multiplicity(inv, c) == -2);
}

TEST_CASE("additivity over disjoint contours") {
  auto fam = diag_family([](Complex w) { return w - 0.2; }, [](Complex w) { return w - 0.5; });
  ContourSpec big{Complex(0.35, 0), 0.3, 64};
  ContourSpec c1{Complex(0.2, 0), 0.1, 64};
  ContourSpec c2{Complex(0.5, 0), 0.1, 64};
  CHECK(multiplicity(fam, big) == multiplicity(fam, c1) + multiplicity(fam, c2));
}

TEST_CASE("quadrature stability under node doubling") {
  auto fam = diag_family([](Complex w) { return w - 0.3; }, [](Complex) { return Complex(1, 0); });
  ContourSpec c16{Complex(0.3, 0.01), 0.17, 16};
  ContourSpec c32{Complex(0.3, 0.01), 0.17, 32};
  auto f = [](Complex w) { return w * w; };
  Complex a = log_residue_sum(fam, c16, f);
  Complex b = log_residue_sum(fam, c32, f);
  CHECK(std::abs(a - b) < 1e-8);
}

TEST_CASE("singular-on-contour guard") {
  auto fam = diag_family([](Complex w) { return w - 0.3; }, [](Complex) { return Complex(1, 0); });
  ContourSpec c{Complex(0.2, 0), 0.1, 32};  // root 0.3 sits on the circle
  CHECK_THROWS_AS(multiplicity(fam, c), Error);
}

TEST_CASE("Rouche comparison") {
  auto A = diag_family([](Complex w) { return w - 0.3; }, [](Complex) { return Complex(1, 0); });

  SUBCASE("small perturbation: verdict true, multiplicities agree") {
    MeromorphicFamily B;
    B.eval = [](Complex) { return (0.1 * Eigen::MatrixXcd::Identity(2, 2)).eval(); };
    ContourSpec c{Complex(0.3, 0), 0.5, 64};
    auto r = rouche_compare(A, B, c);
    CHECK(r.comparable);
    CHECK(r.margin < 1.0);
    CHECK(r.margin > 0.0);
  }
  SUBCASE("large perturbation: no conclusion") {
    MeromorphicFamily B;
    B.eval = [](Complex) { return (2.0 * Eigen::MatrixXcd::Identity(2, 2)).eval(); };
    ContourSpec c{Complex(0.3, 0), 0.1, 32};
    auto r = rouche_compare(A, B, c);
    CHECK(!r.comparable);
  }
  SUBCASE("zero perturbation: margin zero") {
    MeromorphicFamily B;
    B.eval = [](Complex) { return Eigen::MatrixXcd::Zero(2, 2).eval(); };
    ContourSpec c{Complex(0.3, 0), 0.2, 32};
    auto r = rouche_compare(A, B, c);
    CHECK(r.comparable);
    CHECK(r.margin == 0.0);
  }
}

TEST_CASE("locate_resonance on a scalar family") {
  MeromorphicFamily fam;
  fam.eval = [](Complex w) {
    Eigen::MatrixXcd A(1, 1);
    A(0, 0) = w - 0.31;
    return A;
  };
  Complex lam = locate_resonance(fam, Complex(0.3, 0), 0.05, 32);
  CHECK(std::abs(lam - Complex(0.31, 0)) < 1e-10);
}

TEST_CASE("locate_resonance on a synthetic DtN-like family") {
  // Q(w) = Q0/l + R_{-1}/(w - lambda0) + R0 with rank-one R_{-1} = a b^T.
  // det Q = det(M) (1 + b^T M^{-1} a/(w - lambda0)) for M = Q0/l + R0, so the
  // characteristic value is lambda0 - b^T M^{-1} a in closed form.
  int n = 6;
  Eigen::MatrixXcd Q0 = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) Q0(i, i) = 0.5 * (i + 1);
  Eigen::MatrixXcd R0 = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R0(i, j) = 0.01 / (1.0 + i + j);
  Eigen::VectorXcd a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = 0.02 + 0.01 * i;
    b[i] = 0.03 - 0.002 * i;
  }
  double ell = 0.2;
  Complex lambda0(1.7, 0);
  Eigen::MatrixXcd M = Q0 / ell + R0;
  Complex root = lambda0 - (b.transpose() * M.inverse() * a).value();

  MeromorphicFamily fam;
  fam.eval = [=](Complex w) {
    return (Q0 / ell + a * b.transpose() / (w - lambda0) + R0).eval();
  };
  Complex lam = locate_resonance(fam, lambda0 + 0.001, 0.05, 48);
  CHECK(std::abs(lam - root) < 1e-8);
}

TEST_CASE("two enclosed roots trigger MultiplicityNotOne") {
  auto fam = diag_family([](Complex w) { return w - 0.28; }, [](Complex w) { return w - 0.32; });
  CHECK_THROWS_AS(locate_resonance(fam, Complex(0.3, 0), 0.1, 32), Error);
}
