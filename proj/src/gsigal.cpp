#include "wgwin/gsigal.hpp"

#include <cmath>

namespace wgwin {

Eigen::MatrixXcd MeromorphicFamily::d(Complex omega, double scale) const {
  if (deriv) return deriv(omega);
  // Central differences with one step of Richardson control. The family is
  // analytic near the contour, so the step can stay comfortably large.
  double h = std::max(1e-7, 1e-5 * scale);
  Eigen::MatrixXcd d1 = (eval(omega + h) - eval(omega - h)) / (2.0 * h);
  Eigen::MatrixXcd d2 = (eval(omega + 0.5 * h) - eval(omega - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

namespace {

Complex contour_sum(const MeromorphicFamily& fam, const ContourSpec& contour,
                    const std::function<Complex(Complex)>& f, int nq, double cond_max, int threads) {
  std::vector<Complex> vals(nq);
  parallel_for(nq, threads, [&](std::size_t q) {
    double th = 2.0 * M_PI * double(q) / nq;
    Complex w = std::polar(contour.radius, th);
    Complex omega = contour.center + w;
    Eigen::MatrixXcd A = fam.eval(omega);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    // cheap invertibility estimate: |det| scaled by row norms
    double rcond_proxy = std::abs(lu.determinant());
    double scale = 1.0;
    for (int i = 0; i < A.rows(); ++i) scale *= std::max(1e-300, A.row(i).norm());
    require(rcond_proxy > scale / cond_max, Errc::SingularOnContour,
            "family nearly singular on the contour");
    Eigen::MatrixXcd X = lu.solve(fam.d(omega, contour.radius));
    Complex dom = Complex(0, 1) * w * (2.0 * M_PI / nq);
    vals[q] = f(omega) * X.trace() * dom;
  });
  Complex total(0, 0);
  for (Complex v : vals) total += v;  // deterministic node order
  return total / Complex(0, 2.0 * M_PI);
}

}  // namespace

Complex log_residue_sum(const MeromorphicFamily& fam, const ContourSpec& contour,
                        const std::function<Complex(Complex)>& f, const LogResidueOptions& opts) {
  require(contour.nq >= 16, Errc::QuadratureNotConverged, "need at least 16 contour nodes");
  int nq = contour.nq;
  Complex prev = contour_sum(fam, contour, f, nq, opts.cond_max, opts.threads);
  for (int it = 0; it < opts.max_doublings; ++it) {
    nq *= 2;
    Complex cur = contour_sum(fam, contour, f, nq, opts.cond_max, opts.threads);
    if (std::abs(cur - prev) <= opts.stability_tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  fail(Errc::QuadratureNotConverged, "contour quadrature did not stabilize under node doubling");
}

int multiplicity(const MeromorphicFamily& fam, const ContourSpec& contour,
                 const LogResidueOptions& opts) {
  Complex m = log_residue_sum(fam, contour, [](Complex) { return Complex(1, 0); }, opts);
  double r = std::round(m.real());
  require(std::abs(m.imag()) <= 1e-6 && std::abs(m.real() - r) <= 1e-6, Errc::NotNearInteger,
          "trace integral not near an integer: " + std::to_string(m.real()) + " + " +
              std::to_string(m.imag()) + "i");
  return int(r);
}

RoucheResult rouche_compare(const MeromorphicFamily& A, const MeromorphicFamily& B,
                            const ContourSpec& contour, const LogResidueOptions& opts) {
  RoucheResult res{false, 0.0};
  std::vector<double> norms(contour.nq);
  parallel_for(contour.nq, opts.threads, [&](std::size_t q) {
    double th = 2.0 * M_PI * double(q) / contour.nq;
    Complex omega = contour.center + std::polar(contour.radius, th);
    Eigen::MatrixXcd Am = A.eval(omega);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Am);
    double rcond_proxy = std::abs(lu.determinant());
    double scale = 1.0;
    for (int i = 0; i < Am.rows(); ++i) scale *= std::max(1e-300, Am.row(i).norm());
    require(rcond_proxy > scale / opts.cond_max, Errc::SingularOnContour,
            "A nearly singular on the contour");
    Eigen::MatrixXcd X = lu.solve(B.eval(omega));
    norms[q] = X.operatorNorm();
  });
  for (double n : norms) res.margin = std::max(res.margin, n);
  res.comparable = res.margin < 1.0;
  if (res.comparable) {
    MeromorphicFamily sum;
    sum.eval = [&A, &B](Complex w) { return (A.eval(w) + B.eval(w)).eval(); };
    if (A.deriv && B.deriv)
      sum.deriv = [&A, &B](Complex w) { return (A.deriv(w) + B.deriv(w)).eval(); };
    int ma = multiplicity(A, contour, opts);
    int ms = multiplicity(sum, contour, opts);
    require(ma == ms, Errc::NotNearInteger,
            "Rouche self-test failed: multiplicities " + std::to_string(ma) + " vs " + std::to_string(ms));
  }
  return res;
}

Complex locate_resonance(const MeromorphicFamily& fam, Complex lambda0, double eps, int nq,
                         const LogResidueOptions& opts) {
  ContourSpec c{lambda0, eps, nq};
  int m = multiplicity(fam, c, opts);
  require(m == 1, Errc::MultiplicityNotOne,
          "contour encloses total multiplicity " + std::to_string(m) + ", need exactly 1");
  Complex lam = lambda0 + log_residue_sum(fam, c, [&](Complex w) { return w - lambda0; }, opts);
  // Shrink the contour around the estimate until the location stabilizes.
  for (int it = 0; it < 30; ++it) {
    double r = std::max(0.25 * std::abs(lam - c.center) + 0.1 * c.radius, 16.0 * 1e-9);
    ContourSpec cs{lam, std::min(r, 0.5 * c.radius), nq};
    int ms = multiplicity(fam, cs, opts);
    if (ms != 1) {  // root slipped outside; widen again
      cs.radius = 0.5 * c.radius;
      ms = multiplicity(fam, cs, opts);
      require(ms == 1, Errc::MultiplicityNotOne, "lost the root while shrinking the contour");
    }
    Complex next = lam + log_residue_sum(fam, cs, [&](Complex w) { return w - lam; }, opts);
    c = cs;
    if (std::abs(next - lam) <= 1e-8 * std::max(1.0, std::abs(next))) return next;
    lam = next;
  }
  fail(Errc::NotConverged, "resonance location did not stabilize");
}

}  // namespace wgwin
