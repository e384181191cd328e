#include "wgwin/fem1d.hpp"

#include <array>
#include <cmath>

namespace wgwin {

namespace {

// 3-point Gauss rule on [0,1]; exact through degree 5.
constexpr double kGx[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
constexpr double kGw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

// P2 shape functions on the reference element [0,1], local nodes {0, 1/2, 1}.
inline std::array<double, 3> shp(double t) {
  return {2.0 * (t - 0.5) * (t - 1.0), -4.0 * t * (t - 1.0), 2.0 * t * (t - 0.5)};
}
inline std::array<double, 3> dshp(double t) {
  return {4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0};
}

}  // namespace

Fem1D::Fem1D(std::vector<double> breakpoints) : breaks(std::move(breakpoints)) {
  require(breaks.size() >= 2, Errc::AssemblyFailure, "need at least one element");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    require(breaks[i] > breaks[i - 1], Errc::AssemblyFailure, "breakpoints not increasing");
  int ne = int(breaks.size()) - 1;
  n_nodes = 2 * ne + 1;
  nodes.resize(n_nodes);
  for (int e = 0; e < ne; ++e) {
    nodes[2 * e] = breaks[e];
    nodes[2 * e + 1] = 0.5 * (breaks[e] + breaks[e + 1]);
  }
  nodes[2 * ne] = breaks[ne];
}

template <typename Scalar, typename Factor>
static Eigen::SparseMatrix<Scalar> assemble(const Fem1D& fe, const std::function<double(double)>& c,
                                            const Factor& factor, int kind) {
  // kind: 0 mass, 1 stiffness, 2 skew
  int ne = int(fe.breaks.size()) - 1;
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(9 * ne);
  for (int e = 0; e < ne; ++e) {
    double a = fe.breaks[e], b = fe.breaks[e + 1], h = b - a;
    Scalar f = factor(e);
    Eigen::Matrix<Scalar, 3, 3> el = Eigen::Matrix<Scalar, 3, 3>::Zero();
    for (int q = 0; q < 3; ++q) {
      double x = a + h * kGx[q];
      double w = kGw[q] * c(x);
      auto N = shp(kGx[q]);
      auto dN = dshp(kGx[q]);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double v;
          switch (kind) {
            case 0: v = w * h * N[i] * N[j]; break;
            case 1: v = w * dN[i] * dN[j] / h; break;
            default: v = w * (N[j] * dN[i] - dN[j] * N[i]); break;  // S_ij = int c (u_j v_i' - u_j' v_i)
          }
          el(i, j) += f * v;
        }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(2 * e + i, 2 * e + j, el(i, j));
  }
  Eigen::SparseMatrix<Scalar> A(fe.n_nodes, fe.n_nodes);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::SparseMatrix<double> Fem1D::mass(const std::function<double(double)>& c) const {
  return assemble<double>(*this, c, [](int) { return 1.0; }, 0);
}
Eigen::SparseMatrix<double> Fem1D::stiffness(const std::function<double(double)>& c) const {
  return assemble<double>(*this, c, [](int) { return 1.0; }, 1);
}
Eigen::SparseMatrix<double> Fem1D::skew(const std::function<double(double)>& c) const {
  return assemble<double>(*this, c, [](int) { return 1.0; }, 2);
}

Eigen::SparseMatrix<Complex> Fem1D::mass_scaled(const std::function<double(double)>& c,
                                                const std::vector<Complex>& jac) const {
  require(jac.size() + 1 == breaks.size(), Errc::AssemblyFailure, "per-element factor size");
  return assemble<Complex>(*this, c, [&](int e) { return jac[e]; }, 0);
}
Eigen::SparseMatrix<Complex> Fem1D::stiffness_scaled(const std::function<double(double)>& c,
                                                     const std::vector<Complex>& inv_jac) const {
  require(inv_jac.size() + 1 == breaks.size(), Errc::AssemblyFailure, "per-element factor size");
  return assemble<Complex>(*this, c, [&](int e) { return inv_jac[e]; }, 1);
}

template <typename Scalar>
static Scalar eval_impl(const Fem1D& fe, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u, double x) {
  int ne = int(fe.breaks.size()) - 1;
  int e = int(std::upper_bound(fe.breaks.begin(), fe.breaks.end(), x) - fe.breaks.begin()) - 1;
  e = std::max(0, std::min(e, ne - 1));
  double t = (x - fe.breaks[e]) / (fe.breaks[e + 1] - fe.breaks[e]);
  auto N = shp(t);
  return N[0] * u[2 * e] + N[1] * u[2 * e + 1] + N[2] * u[2 * e + 2];
}

double Fem1D::eval(const Eigen::VectorXd& u, double x) const { return eval_impl(*this, u, x); }
Complex Fem1D::eval(const Eigen::VectorXcd& u, double x) const { return eval_impl(*this, u, x); }

Eigen::VectorXd Fem1D::interpolate(const std::function<double(double)>& f) const {
  Eigen::VectorXd v(n_nodes);
  for (int i = 0; i < n_nodes; ++i) v[i] = f(nodes[i]);
  return v;
}

Eigen::SparseMatrix<double> drop_dirichlet(const Eigen::SparseMatrix<double>& A) {
  int n = int(A.rows());
  Eigen::SparseMatrix<double> out(n - 2, n - 2);
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      int i = int(it.row()), j = int(it.col());
      if (i == 0 || j == 0 || i == n - 1 || j == n - 1) continue;
      trip.emplace_back(i - 1, j - 1, it.value());
    }
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace wgwin
