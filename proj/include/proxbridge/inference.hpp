#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "proxbridge/sieve_fit.hpp"

namespace proxbridge::inference {

struct EstimateReport {
  int arm = 0;
  double mu_plugin = 0.0;
  double r_hat_n = 0.0;
  double mu_debiased = 0.0;  // mu_plugin + r_hat_n, exactly
  double sigma2 = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
  long n = 0;

  // diagnostics
  double c_min = 0.0;
  double c_n = 0.0;
  double m_value = 0.0;
  double lagrange_multiplier = 0.0;
  double projection_ridge = 0.0;
  double min_gram_eigenvalue = 0.0;
  bool representer_degenerate = false;
  bool sigma_degenerate = false;
  bool basis_clamped = false;
  bool threshold_degenerate = false;  // kappa == 0
  bool small_sample = false;          // n < 30, Wald interval advisory

  std::vector<std::string> flag_list() const;
};

// mu_hat_a = (1/n) sum_i h(W_i, a, X_i)
double plugin_mean(const Eigen::VectorXd& h_beta, const SieveContext& ctx, int arm);

// per-observation influence values
//   h(W_i,a,X_i) - mu + I(A_i=a) Ehat{g|Z_i,A_i,X_i} (Y_i - h(W_i,A_i,X_i))
Eigen::VectorXd influence_values(const Eigen::VectorXd& h_beta,
                                 const Eigen::VectorXd& g_beta, const SieveContext& ctx,
                                 int arm, double mu);

double normal_quantile(double p);

// Wald interval center +/- z_{1-alpha/2} sqrt(sigma2 / n)
std::pair<double, double> confidence_interval(double center, double sigma2, long n,
                                              double level);

struct ArmEstimate {
  EstimateReport report;
  Eigen::VectorXd influence;
  Eigen::VectorXd h_beta;
  Eigen::VectorXd g_beta;
};

// Full per-arm pipeline: criterion, threshold, min-norm selection,
// representer, debiasing, influence-function inference.
ArmEstimate estimate_arm(const SieveContext& ctx, int arm, double kappa, double level);

struct AteReport {
  double ate = 0.0;
  double sigma2 = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
  long n = 0;
};

AteReport ate(const ArmEstimate& treated, const ArmEstimate& control);

}  // namespace proxbridge::inference
