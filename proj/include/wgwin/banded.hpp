#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "wgwin/common.hpp"

namespace wgwin {

// Lowest eigenpairs of the banded generalized problem A x = mu B x with
// A Hermitian, B Hermitian positive definite, both of bandwidth kd.
// Eigenvectors come back B-orthonormal. Thin wrappers over LAPACK *sbgvx/*hbgvx.
struct BandedEig {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;  // complex in general; imaginary part zero for real pencils
};

BandedEig banded_lowest_sym(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B,
                            int kd, int count);

BandedEig banded_lowest_herm(const Eigen::SparseMatrix<Complex>& A, const Eigen::SparseMatrix<double>& B,
                             int kd, int count);

}  // namespace wgwin
