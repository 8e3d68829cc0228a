#include "proxbridge/representer_debias.hpp"

#include <cmath>

#include "proxbridge/errors.hpp"
#include "proxbridge/linalg.hpp"

namespace proxbridge::representer {

bridge::QuadraticCriterion assemble_representer_criterion(const SieveContext& ctx, int arm) {
  const auto n = static_cast<double>(ctx.n());
  Eigen::MatrixXd psi_hat = ctx.psi_hat;
  long in_arm = 0;
  for (Eigen::Index i = 0; i < ctx.data.n(); ++i) {
    if (ctx.data.a(i) == arm)
      ++in_arm;
    else
      psi_hat.row(i).setZero();
  }
  if (in_arm == 0) throw data_error("no observations in arm " + std::to_string(arm));

  bridge::QuadraticCriterion q;
  q.G = psi_hat.transpose() * psi_hat / n;
  q.G = ((q.G + q.G.transpose()) / 2.0).eval();
  // linear term: mean of psi evaluated at (W_i, a, X_i) over all i
  q.g = ctx.psi_arm[arm].values.colwise().mean();
  q.c = 0.0;
  q.n = ctx.n();
  q.arm = arm;
  q.kind = "representer";
  return q;
}

RepresenterEstimate estimate_representer(const bridge::QuadraticCriterion& q_r) {
  RepresenterEstimate est;
  const double g_norm = q_r.g.norm();
  if (g_norm == 0.0) {
    est.beta_g = Eigen::VectorXd::Zero(q_r.G.cols());
    est.r_value = 0.0;
    return est;
  }

  const auto sol = linalg::min_norm_solve(q_r.G, q_r.g);
  est.column_space_residual = (q_r.G * sol.x - q_r.g).norm() / g_norm;
  if (est.column_space_residual <= 1e-8) {
    est.beta_g = sol.x;
  } else {
    est.degenerate_flag = true;
    const auto p = static_cast<double>(q_r.G.cols());
    Eigen::MatrixXd ridged = q_r.G;
    ridged.diagonal().array() += 1e-8 * q_r.G.trace() / p;
    est.beta_g = Eigen::LDLT<Eigen::MatrixXd>(ridged).solve(q_r.g);
  }
  est.r_value = q_r.value(est.beta_g);
  return est;
}

Eigen::VectorXd residuals(const Eigen::VectorXd& h_beta, const SieveContext& ctx) {
  if (h_beta.size() != ctx.psi_hat.cols())
    throw data_error("bridge coefficients have wrong length");
  return ctx.y_cond - ctx.psi_hat * h_beta;
}

double debias_correction(const Eigen::VectorXd& g_beta, const Eigen::VectorXd& h_beta,
                         const SieveContext& ctx, int arm) {
  const Eigen::VectorXd e_hat = residuals(h_beta, ctx);
  const Eigen::VectorXd g_cond = ctx.psi_hat * g_beta;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ctx.data.n(); ++i)
    if (ctx.data.a(i) == arm) sum += g_cond(i) * e_hat(i);
  return sum / static_cast<double>(ctx.n());
}

}  // namespace proxbridge::representer
