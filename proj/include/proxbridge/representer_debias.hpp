#pragma once

#include <Eigen/Dense>

#include "proxbridge/bridge_solver.hpp"
#include "proxbridge/sieve_fit.hpp"

namespace proxbridge::representer {

// R_n(h) = (1/n) sum_i I(A_i=a) Ehat{h|Z_i,A_i,X_i}^2
//          - (2/n) sum_i h(W_i, a, X_i),
// expressed as Q(beta) = beta'G beta - 2 g'beta with c = 0.
bridge::QuadraticCriterion assemble_representer_criterion(const SieveContext& ctx, int arm);

struct RepresenterEstimate {
  Eigen::VectorXd beta_g;
  double r_value = 0.0;                 // R_n at the estimate
  bool degenerate_flag = false;         // sample criterion unbounded below; ridged
  double column_space_residual = 0.0;   // relative residual of g against col(G)
};

// Minimizer of R_n over the sieve. When the linear term leaves the column
// space of G the criterion is unbounded below (the representer assumption
// fails in-sample); a small ridge is applied and the result flagged.
RepresenterEstimate estimate_representer(const bridge::QuadraticCriterion& q_r);

// ehat(Z_i, A_i, X_i, h) = Ehat[Y|Z_i,A_i,X_i] - Ehat[h|Z_i,A_i,X_i]
Eigen::VectorXd residuals(const Eigen::VectorXd& h_beta, const SieveContext& ctx);

// r_hat_n = (1/n) sum_i I(A_i=a) Ehat{g|Z_i,A_i,X_i} ehat(Z_i,A_i,X_i,h)
double debias_correction(const Eigen::VectorXd& g_beta, const Eigen::VectorXd& h_beta,
                         const SieveContext& ctx, int arm);

}  // namespace proxbridge::representer
