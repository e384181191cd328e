#pragma once

#include <Eigen/Dense>
#include <functional>

#include "wgwin/common.hpp"

namespace wgwin {

// Finitely meromorphic matrix family omega -> A(omega). The derivative is
// optional; central differences with step control are used when absent.
struct MeromorphicFamily {
  std::function<Eigen::MatrixXcd(Complex)> eval;
  std::function<Eigen::MatrixXcd(Complex)> deriv;  // may be empty

  Eigen::MatrixXcd d(Complex omega, double scale) const;
};

struct ContourSpec {
  Complex center;
  double radius = 0.1;
  int nq = 64;  // trapezoid nodes on the circle
};

struct LogResidueOptions {
  double stability_tol = 1e-8;  // node-doubling stability requirement
  double cond_max = 1e13;       // contour-invertibility guard
  int max_doublings = 4;
  int threads = 1;
};

// (1/2 pi i) tr \oint f(omega) A(omega)^{-1} A'(omega) d omega,
// the f-weighted sum of total multiplicities inside the contour.
Complex log_residue_sum(const MeromorphicFamily& fam, const ContourSpec& contour,
                        const std::function<Complex(Complex)>& f, const LogResidueOptions& opts = {});

// f == 1 specialization: asserts the result is within 1e-6 of an integer
// (|imaginary part| <= 1e-6 as well) and rounds.
int multiplicity(const MeromorphicFamily& fam, const ContourSpec& contour,
                 const LogResidueOptions& opts = {});

struct RoucheResult {
  bool comparable;  // max ||A^{-1}B|| < 1 on the contour
  double margin;    // the max itself
};

// Operator Rouche test: if ||A^{-1}B|| < 1 on the contour then A and A+B
// enclose the same total multiplicity (verified as a self-test when true).
RoucheResult rouche_compare(const MeromorphicFamily& A, const MeromorphicFamily& B,
                            const ContourSpec& contour, const LogResidueOptions& opts = {});

// Locate the unique simple characteristic value near lambda0 via the weighted
// trace integral with f(omega) = omega - lambda0, then shrink the contour
// around the estimate until stable to 1e-8.
Complex locate_resonance(const MeromorphicFamily& fam, Complex lambda0, double eps, int nq,
                         const LogResidueOptions& opts = {});

}  // namespace wgwin
