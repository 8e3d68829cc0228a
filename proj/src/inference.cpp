#include "proxbridge/inference.hpp"

#include <cmath>

#include "proxbridge/bridge_solver.hpp"
#include "proxbridge/errors.hpp"
#include "proxbridge/representer_debias.hpp"

namespace proxbridge::inference {

std::vector<std::string> EstimateReport::flag_list() const {
  std::vector<std::string> f;
  if (projection_ridge > 0.0) f.push_back("projection_ridge");
  if (representer_degenerate) f.push_back("representer_degenerate");
  if (sigma_degenerate) f.push_back("sigma_degenerate");
  if (basis_clamped) f.push_back("basis_clamped");
  if (threshold_degenerate) f.push_back("threshold_degenerate");
  if (small_sample) f.push_back("small_sample");
  return f;
}

double plugin_mean(const Eigen::VectorXd& h_beta, const SieveContext& ctx, int arm) {
  return (ctx.psi_arm[arm].values * h_beta).mean();
}

Eigen::VectorXd influence_values(const Eigen::VectorXd& h_beta,
                                 const Eigen::VectorXd& g_beta, const SieveContext& ctx,
                                 int arm, double mu) {
  const Eigen::VectorXd h_at_arm = ctx.psi_arm[arm].values * h_beta;
  const Eigen::VectorXd h_observed = ctx.psi.values * h_beta;
  const Eigen::VectorXd g_cond = ctx.psi_hat * g_beta;
  Eigen::VectorXd out(ctx.data.n());
  for (Eigen::Index i = 0; i < ctx.data.n(); ++i) {
    const double correction =
        ctx.data.a(i) == arm ? g_cond(i) * (ctx.data.y(i) - h_observed(i)) : 0.0;
    out(i) = h_at_arm(i) - mu + correction;
  }
  return out;
}

// Wichura's AS 241 inverse normal CDF, double precision.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw config_error("quantile level must lie in (0,1)");
  const double q = p - 0.5;
  double r, val;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    val = q *
          (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                67265.770927008700853) * r + 45921.953931549871457) * r +
              13731.693765509461125) * r + 1971.5909503065514427) * r +
            133.14166789178437745) * r + 3.387132872796366608) /
          (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                39307.89580009271061) * r + 21213.794301586595867) * r +
              5394.1960214247511077) * r + 687.1870074920579083) * r +
            42.313330701600911252) * r + 1.0);
    return val;
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

std::pair<double, double> confidence_interval(double center, double sigma2, long n,
                                              double level) {
  if (!(level > 0.0 && level < 1.0))
    throw config_error("confidence level must lie in (0,1)");
  if (sigma2 < 0.0) throw numeric_error("variance must be nonnegative");
  const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  const double half = z * std::sqrt(sigma2 / static_cast<double>(n));
  return {center - half, center + half};
}

ArmEstimate estimate_arm(const SieveContext& ctx, int arm, double kappa, double level) {
  ArmEstimate est;
  EstimateReport& rep = est.report;
  rep.arm = arm;
  rep.n = ctx.n();
  rep.level = level;

  const auto q = bridge::assemble_outcome_criterion(
      ctx, arm == 0 ? bridge::CriterionArm::arm0 : bridge::CriterionArm::arm1);
  const auto minimum = bridge::minimize_criterion(q);
  rep.c_min = minimum.c_min;
  rep.c_n = bridge::choose_threshold(minimum.c_min, ctx.n(), ctx.k_count(), kappa);
  rep.threshold_degenerate = kappa == 0.0;

  const auto weights = bridge::selection_weights(ctx);
  const auto bridge_est = bridge::select_min_norm(q, rep.c_n, weights);
  est.h_beta = bridge_est.beta;
  rep.m_value = bridge_est.m_value;
  rep.lagrange_multiplier = bridge_est.lagrange_multiplier;

  const auto q_r = representer::assemble_representer_criterion(ctx, arm);
  const auto rep_est = representer::estimate_representer(q_r);
  est.g_beta = rep_est.beta_g;
  rep.representer_degenerate = rep_est.degenerate_flag;

  rep.mu_plugin = plugin_mean(est.h_beta, ctx, arm);
  rep.r_hat_n = representer::debias_correction(est.g_beta, est.h_beta, ctx, arm);
  rep.mu_debiased = rep.mu_plugin + rep.r_hat_n;

  est.influence = influence_values(est.h_beta, est.g_beta, ctx, arm, rep.mu_debiased);
  const double mean_if = est.influence.mean();
  rep.sigma2 = (est.influence.array() - mean_if).square().mean();
  rep.sigma_degenerate = rep.sigma2 == 0.0;
  rep.small_sample = ctx.n() < 30;

  std::tie(rep.ci_low, rep.ci_high) =
      confidence_interval(rep.mu_debiased, rep.sigma2, ctx.n(), level);

  rep.projection_ridge = ctx.proj.ridge_used;
  rep.min_gram_eigenvalue = ctx.proj.min_gram_eigenvalue;
  rep.basis_clamped = ctx.clamped();
  return est;
}

AteReport ate(const ArmEstimate& treated, const ArmEstimate& control) {
  if (treated.report.n != control.report.n ||
      treated.influence.size() != control.influence.size())
    throw data_error("ATE requires both arms estimated on the same dataset");
  AteReport out;
  out.n = treated.report.n;
  out.level = treated.report.level;
  out.ate = treated.report.mu_debiased - control.report.mu_debiased;
  const Eigen::VectorXd diff = treated.influence - control.influence;
  const double mean_diff = diff.size() > 0 ? diff.mean() : 0.0;
  out.sigma2 = diff.size() > 0 ? (diff.array() - mean_diff).square().mean() : 0.0;
  std::tie(out.ci_low, out.ci_high) =
      confidence_interval(out.ate, out.sigma2, out.n, out.level);
  return out;
}

}  // namespace proxbridge::inference
