#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <optional>
#include <vector>

#include "wgwin/banded.hpp"
#include "wgwin/common.hpp"
#include "wgwin/fem1d.hpp"
#include "wgwin/model.hpp"

namespace wgwin {

// Discrete transversal family  A(xi) = xi^2 M2 + i xi M1 + M0  with Dirichlet
// conditions on the cross-section ends, quadratic elements, mass matrix Mb.
// M2, M0, Mb are symmetric (M2, Mb positive definite), M1 is skew-symmetric,
// so A(xi) is Hermitian for real xi and complex-symmetric for complex xi.
struct TransversalPencil {
  int n = 0;  // interior dofs
  double height = 1.0;
  std::shared_ptr<Fem1D> fe;  // full 1-d grid including boundary nodes
  Eigen::SparseMatrix<double> M2, M0, Mb, M1;
  bool has_m1 = false;
  static constexpr int kd = 2;

  // Full (non-eliminated) operators, used for boundary-flux extraction.
  Eigen::SparseMatrix<double> M0_full, Mb_full;

  Eigen::MatrixXcd a_dense(Complex xi, Complex omega2) const;  // A(xi) - omega^2 Mb
  Eigen::MatrixXcd a_prime_dense(Complex xi) const;            // 2 xi M2 + i M1

  // Lowest `count` eigenpairs of (A(xi), Mb) for real xi; B-orthonormal.
  BandedEig lowest(double xi, int count) const;

  // Hellmann-Feynman derivative mu'(xi) for a B-normalized eigenvector.
  double mu_prime(double xi, const Eigen::VectorXcd& x) const;

  // Embed an interior vector into the full grid (zeros at the ends).
  Eigen::VectorXcd embed(const Eigen::VectorXcd& x) const;

  // Conormal derivative of the P2 interpolant at the z=0 end, extracted from
  // the variational residual of the full operator (superconvergent).
  double boundary_flux_bottom(const Eigen::VectorXd& interior, double mu) const;
};

TransversalPencil assemble_transversal(const ValidatedModel& model, int N);

struct DispersionData {
  std::vector<double> xi;                 // sorted grid after refinement
  Eigen::MatrixXd mu;                     // (k_max, n_xi)
  Eigen::MatrixXd dmu;                    // analytic derivative along each branch
  std::vector<Eigen::MatrixXcd> vecs;     // per grid point: (n, k_max), Mb-orthonormal
  std::vector<double> interval_overlap;   // tracking score per interval
  std::shared_ptr<const TransversalPencil> pencil;  // evaluator; null for injected data

  int k_max() const { return int(mu.rows()); }
  // Branch value / derivative off the grid (pencil-backed, eigenvector-matched;
  // local polynomial interpolation for injected data).
  double branch_mu(int k, double x) const;
  double branch_dmu(int k, double x) const;
  double branch_d2mu(int k, double x, double step = 1e-4) const;
  Eigen::VectorXcd branch_vec(int k, double x) const;
};

struct SweepOptions {
  double overlap_min = 0.9;
  int buffer = 3;       // extra branches carried for tracking
  int max_refine = 12;  // bisection depth before TrackingAmbiguity
  int threads = 1;
};

DispersionData dispersion_sweep(std::shared_ptr<const TransversalPencil> pencil,
                                const std::vector<double>& xi_grid, int k_max,
                                const SweepOptions& opts = {});

// Synthetic data entry point (threshold detection on injected curves).
DispersionData inject_dispersion(const std::vector<double>& xi,
                                 const std::vector<std::vector<double>>& mu_branches);

struct Threshold {
  double Lambda;    // frequency, Lambda > 0
  double xi_star;   // location of the extremum
  int branch;       // branch index k
  int order;        // branching order n (root multiplicity of mu_k - Lambda^2)
  double mu2;       // mu_k''(xi_star)
};

std::vector<Threshold> find_thresholds(const DispersionData& data, double omega_max);

struct CharRoot {
  Complex xi;
  int multiplicity = 1;
  int sign = 0;  // +1 in Xi_{beta,+}, -1 in Xi_{beta,-}, 0 undetermined (threshold pair)
  Eigen::VectorXcd vec;       // null vector at the root (chain head)
  Complex mu_prime;           // d mu/d xi along the crossing branch (simple roots)
};

struct CharacteristicSet {
  Complex omega;
  double beta = 1.0;
  std::vector<CharRoot> roots;
  int total_multiplicity_plus() const;
  int total_multiplicity_minus() const;
};

// A stored continuation path from the upper half-plane down to the target
// frequency; required to partition roots when Im(omega) < 0.
struct OmegaPath {
  std::vector<Complex> points;
};

CharacteristicSet characteristic_values(const TransversalPencil& pencil, Complex omega, double beta,
                                        const OmegaPath* path = nullptr);

struct OutgoingMode {
  Complex xi0;
  int sign = 0;
  std::vector<Eigen::VectorXcd> chain;  // u_0, ..., u_k on the full grid
  double residual = 0.0;
  std::shared_ptr<Fem1D> fe;

  // U_j(y,z) = e^{i xi0 y} sum_q (i y)^q / q! * u_{j-q}(z)
  Complex eval(int j, double y, double z) const;
};

std::vector<OutgoingMode> outgoing_modes(const CharacteristicSet& cs, const TransversalPencil& pencil);

}  // namespace wgwin
