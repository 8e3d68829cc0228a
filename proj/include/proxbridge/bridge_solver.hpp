#pragma once

#include <Eigen/Dense>
#include <string>

#include "proxbridge/sieve_fit.hpp"

namespace proxbridge::bridge {

// Q(beta) = beta'G beta - 2 g'beta + c, an exact reformulation of the
// sample criterion over sieve coefficients.
struct QuadraticCriterion {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  double c = 0.0;
  long n = 0;
  int arm = -1;  // -1 = both arms
  std::string kind;

  double value(const Eigen::VectorXd& beta) const {
    return beta.dot(G * beta) - 2.0 * g.dot(beta) + c;
  }
};

enum class CriterionArm { both = -1, arm0 = 0, arm1 = 1 };

// C_n(h) = (1/n) sum_i ehat^2(Z_i, A_i, X_i, h), optionally restricted to
// one arm by masking rows with I(A_i = a).
QuadraticCriterion assemble_outcome_criterion(const SieveContext& ctx, CriterionArm arm);

struct CriterionMinimum {
  Eigen::VectorXd beta;  // minimum-Euclidean-norm minimizer
  double c_min = 0.0;
};

CriterionMinimum minimize_criterion(const QuadraticCriterion& q);

// c_n = c_min + kappa k_n log(n) / n; kappa = 0 degenerates the sublevel
// set to the argmin (allowed, callers flag it), kappa < 0 is an error.
double choose_threshold(double c_min, long n, int k_n, double kappa);

// M_n(h) = (1/n) sum_i h(W_i,A_i,X_i)^2 in coefficients, ridged to strict
// convexity.
struct SelectionWeights {
  Eigen::MatrixXd M;
  double ridge = 0.0;
};

SelectionWeights selection_weights(const SieveContext& ctx);

struct BridgeEstimate {
  Eigen::VectorXd beta;
  double c_min = 0.0;
  double c_n = 0.0;
  double m_value = 0.0;
  double lagrange_multiplier = 0.0;
  bool feasible = false;
};

// min beta'M beta subject to Q(beta) <= c_n, solved by Lagrangian bisection
// on the single multiplier (both forms convex, M positive definite).
BridgeEstimate select_min_norm(const QuadraticCriterion& q, double c_n,
                               const SelectionWeights& weights);

bool membership(const Eigen::VectorXd& beta, const QuadraticCriterion& q, double c_n);

}  // namespace proxbridge::bridge
