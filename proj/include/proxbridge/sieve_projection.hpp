#pragma once

#include <Eigen/Dense>

#include "proxbridge/sieve_basis.hpp"

namespace proxbridge::projection {

// Least-squares projection onto the instrument design: the sieve estimator
// of E[B | Z, A, X]. Immutable once fitted.
struct ProjectionModel {
  Eigen::MatrixXd gram_inverse;  // (Phi'Phi + ridge I)^-1
  Eigen::MatrixXd coefficients;  // k x t
  double ridge_used = 0.0;
  bool rank_flag = false;        // condition check failed, ridge applied
  double min_gram_eigenvalue = 0.0;  // of Phi'Phi/n
};

// coefficients = (Phi'Phi + eps tr(Phi'Phi)/k I)^-1 Phi' targets, eps = 0
// unless the reciprocal condition number falls below 1e-12 (then eps = 1e-8).
ProjectionModel fit(const basis::DesignMatrix& phi, const Eigen::MatrixXd& targets);

Eigen::MatrixXd predict(const ProjectionModel& model, const Eigen::MatrixXd& phi_rows);

// n x m matrix of E_hat[psi_m(W,A,X) | Z_i, A_i, X_i]: the hat matrix of
// phi applied to psi columnwise.
Eigen::MatrixXd cross_operator(const basis::DesignMatrix& phi,
                               const basis::DesignMatrix& psi);

}  // namespace proxbridge::projection
