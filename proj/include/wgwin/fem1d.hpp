#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "wgwin/common.hpp"

namespace wgwin {

// Quadratic Lagrange elements on a 1-d mesh given by its breakpoints.
// Node ordering: vertices and midpoints interleaved along the interval,
// so matrices are banded with bandwidth 2.
struct Fem1D {
  std::vector<double> breaks;   // element boundaries, strictly increasing
  std::vector<double> nodes;    // all P2 nodes (vertices + midpoints)
  int n_nodes = 0;

  explicit Fem1D(std::vector<double> breakpoints);

  int node_index_of_vertex(int vertex) const { return 2 * vertex; }

  // Bilinear forms, assembled with 3-point Gauss quadrature per element:
  //   mass(c)      : integral c(x) u v
  //   stiffness(c) : integral c(x) u' v'
  //   skew(c)      : S_ij = integral c (phi_j phi_i' - phi_j' phi_i)   (skew-symmetric)
  // An optional per-element complex factor multiplies the element matrix;
  // this realizes piecewise-analytic coordinate scaling.
  Eigen::SparseMatrix<double> mass(const std::function<double(double)>& c) const;
  Eigen::SparseMatrix<double> stiffness(const std::function<double(double)>& c) const;
  Eigen::SparseMatrix<double> skew(const std::function<double(double)>& c) const;

  Eigen::SparseMatrix<Complex> mass_scaled(const std::function<double(double)>& c,
                                           const std::vector<Complex>& jac) const;
  Eigen::SparseMatrix<Complex> stiffness_scaled(const std::function<double(double)>& c,
                                                const std::vector<Complex>& inv_jac) const;

  // Interpolate nodal values at x (piecewise quadratic).
  double eval(const Eigen::VectorXd& u, double x) const;
  Complex eval(const Eigen::VectorXcd& u, double x) const;

  // Nodal interpolation of a function.
  Eigen::VectorXd interpolate(const std::function<double(double)>& f) const;
};

// Restriction of a P2 operator pair to interior nodes (homogeneous Dirichlet
// at both endpoints).
Eigen::SparseMatrix<double> drop_dirichlet(const Eigen::SparseMatrix<double>& A);

}  // namespace wgwin
