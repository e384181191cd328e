#include "wgwin/banded.hpp"

#include <lapacke.h>

#include <cmath>
#include <vector>

namespace wgwin {

namespace {

// Upper banded column-major storage: entry (i,j) with j-kd <= i <= j goes to
// ab[kd + i - j + j*ldab].
template <typename Scalar>
std::vector<Scalar> to_banded_upper(const Eigen::SparseMatrix<Scalar>& A, int kd) {
  int n = int(A.rows());
  int ldab = kd + 1;
  std::vector<Scalar> ab(std::size_t(ldab) * n, Scalar(0));
  for (int k = 0; k < A.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(A, k); it; ++it) {
      int i = int(it.row()), j = int(it.col());
      if (i > j) continue;  // store upper triangle
      require(j - i <= kd, Errc::LinalgFailure, "bandwidth exceeded");
      ab[std::size_t(kd + i - j) + std::size_t(j) * ldab] = it.value();
    }
  return ab;
}

// General banded storage (LAPACK gb format) with room for LU fill.
template <typename Scalar>
void gb_fill(const Eigen::SparseMatrix<Scalar>& A, int kd, std::vector<Scalar>& ab, int& ldab) {
  int n = int(A.rows());
  ldab = 3 * kd + 1;
  ab.assign(std::size_t(ldab) * n, Scalar(0));
  for (int k = 0; k < A.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(A, k); it; ++it) {
      int i = int(it.row()), j = int(it.col());
      require(std::abs(i - j) <= kd, Errc::LinalgFailure, "bandwidth exceeded");
      ab[std::size_t(2 * kd + i - j) + std::size_t(j) * ldab] = it.value();
    }
}

int gbtrf(int n, int kd, std::vector<double>& ab, int ldab, std::vector<lapack_int>& ipiv) {
  ipiv.resize(n);
  return LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kd, kd, ab.data(), ldab, ipiv.data());
}
int gbtrf(int n, int kd, std::vector<Complex>& ab, int ldab, std::vector<lapack_int>& ipiv) {
  ipiv.resize(n);
  return LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kd, kd,
                        reinterpret_cast<lapack_complex_double*>(ab.data()), ldab, ipiv.data());
}
void gbtrs(int n, int kd, const std::vector<double>& ab, int ldab, const std::vector<lapack_int>& ipiv,
           Eigen::VectorXd& x) {
  LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kd, kd, 1, ab.data(), ldab, ipiv.data(), x.data(), n);
}
void gbtrs(int n, int kd, const std::vector<Complex>& ab, int ldab, const std::vector<lapack_int>& ipiv,
           Eigen::VectorXcd& x) {
  LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n, kd, kd, 1,
                 reinterpret_cast<const lapack_complex_double*>(ab.data()), ldab, ipiv.data(),
                 reinterpret_cast<lapack_complex_double*>(x.data()), n);
}

// Inverse iteration for the eigenvectors of (A, B) at the computed values.
// Values within cluster_tol are treated as a cluster and B-orthogonalized
// between iterations.
template <typename Scalar, typename MatA>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> selected_vectors(
    const MatA& A, const Eigen::SparseMatrix<double>& B, int kd, const Eigen::VectorXd& values) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  int n = int(A.rows());
  int m = int(values.size());
  Mat V(n, m);
  double scale = 1.0;
  for (int j = 0; j < m; ++j) scale = std::max(scale, std::abs(values[j]));
  double cluster_tol = 1e-8 * scale;

  Eigen::SparseMatrix<Scalar> Bs = B.template cast<Scalar>();
  int j = 0;
  while (j < m) {
    int j1 = j + 1;
    while (j1 < m && values[j1] - values[j1 - 1] < cluster_tol) ++j1;
    int csize = j1 - j;
    double mu = 0.0;
    for (int t = j; t < j1; ++t) mu += values[t];
    mu /= csize;
    // shifted factorization; the tiny offset keeps the LU well defined
    Eigen::SparseMatrix<Scalar> T = A - Scalar(mu + 1e-10 * scale) * Bs;
    std::vector<Scalar> ab;
    int ldab;
    gb_fill<Scalar>(T, kd, ab, ldab);
    std::vector<lapack_int> ipiv;
    int info = gbtrf(n, kd, ab, ldab, ipiv);
    require(info >= 0, Errc::LinalgFailure, "banded LU failed");
    Mat C(n, csize);
    for (int t = 0; t < csize; ++t)
      for (int i = 0; i < n; ++i)
        C(i, t) = Scalar(std::sin((t + 1.0) * M_PI * (i + 1.0) / (n + 1.0)) + 0.3 / (i + t + 2.0));
    for (int it = 0; it < 3; ++it) {
      for (int t = 0; t < csize; ++t) {
        Vec x = Bs * Vec(C.col(t));
        gbtrs(n, kd, ab, ldab, ipiv, x);
        C.col(t) = x;
      }
      // B-orthonormalize the cluster (modified Gram-Schmidt)
      for (int t = 0; t < csize; ++t) {
        for (int s = 0; s < t; ++s) {
          Scalar proj = (C.col(s).adjoint() * (Bs * Vec(C.col(t))))(0, 0);
          C.col(t) -= proj * C.col(s);
        }
        Scalar nrm = std::sqrt(std::abs((C.col(t).adjoint() * (Bs * Vec(C.col(t))))(0, 0)));
        require(std::abs(nrm) > 0, Errc::LinalgFailure, "inverse iteration breakdown");
        C.col(t) /= nrm;
      }
    }
    V.middleCols(j, csize) = C;
    j = j1;
  }
  return V;
}

}  // namespace

BandedEig banded_lowest_sym(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B,
                            int kd, int count) {
  int n = int(A.rows());
  count = std::min(count, n);
  auto ab = to_banded_upper(A, kd);
  auto bb = to_banded_upper(B, kd);
  std::vector<double> w(n), z(1);
  std::vector<lapack_int> ifail(n);
  lapack_int m = 0;
  lapack_int info = LAPACKE_dsbgvx(LAPACK_COL_MAJOR, 'N', 'I', 'U', n, kd, kd, ab.data(), kd + 1,
                                   bb.data(), kd + 1, nullptr, n, 0.0, 0.0, 1, count,
                                   2.0 * LAPACKE_dlamch('S'), &m, w.data(), z.data(), n, ifail.data());
  require(info == 0, Errc::LinalgFailure, "dsbgvx failed, info=" + std::to_string(info));
  BandedEig out;
  out.values = Eigen::Map<Eigen::VectorXd>(w.data(), m);
  Eigen::MatrixXd V = selected_vectors<double>(A, B, kd, out.values);
  out.vectors = V.cast<Complex>();
  return out;
}

BandedEig banded_lowest_herm(const Eigen::SparseMatrix<Complex>& A, const Eigen::SparseMatrix<double>& B,
                             int kd, int count) {
  int n = int(A.rows());
  count = std::min(count, n);
  auto ab = to_banded_upper(A, kd);
  Eigen::SparseMatrix<Complex> Bc = B.cast<Complex>();
  auto bb = to_banded_upper(Bc, kd);
  std::vector<double> w(n);
  std::vector<Complex> z(1);
  std::vector<lapack_int> ifail(n);
  lapack_int m = 0;
  lapack_int info = LAPACKE_zhbgvx(
      LAPACK_COL_MAJOR, 'N', 'I', 'U', n, kd, kd, reinterpret_cast<lapack_complex_double*>(ab.data()),
      kd + 1, reinterpret_cast<lapack_complex_double*>(bb.data()), kd + 1, nullptr, n, 0.0, 0.0, 1,
      count, 2.0 * LAPACKE_dlamch('S'), &m, w.data(), reinterpret_cast<lapack_complex_double*>(z.data()),
      n, ifail.data());
  require(info == 0, Errc::LinalgFailure, "zhbgvx failed, info=" + std::to_string(info));
  BandedEig out;
  out.values = Eigen::Map<Eigen::VectorXd>(w.data(), m);
  out.vectors = selected_vectors<Complex>(A, B, kd, out.values);
  return out;
}

}  // namespace wgwin
