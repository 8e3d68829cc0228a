#pragma once

#include <Eigen/Dense>

namespace proxbridge::linalg {

// Singular values below rel_tol * max_sv count as zero throughout.
inline constexpr double kSvRelTol = 1e-10;

struct MinNormSolution {
  Eigen::VectorXd x;            // minimum-Euclidean-norm least-squares solution
  Eigen::MatrixXd null_basis;   // orthonormal basis of the kernel of A
  int rank = 0;
  double residual_inf = 0.0;    // ||A x - b||_inf
};

MinNormSolution min_norm_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               double rel_tol = kSvRelTol);

Eigen::MatrixXd pinv(const Eigen::MatrixXd& A, double rel_tol = kSvRelTol);

Eigen::MatrixXd null_space(const Eigen::MatrixXd& A, double rel_tol = kSvRelTol);

int rank(const Eigen::MatrixXd& A, double rel_tol = kSvRelTol);

}  // namespace proxbridge::linalg
