#include "proxbridge/bridge_solver.hpp"

#include <cmath>

#include "proxbridge/errors.hpp"
#include "proxbridge/linalg.hpp"

namespace proxbridge::bridge {

QuadraticCriterion assemble_outcome_criterion(const SieveContext& ctx, CriterionArm arm) {
  const auto n = static_cast<double>(ctx.n());
  Eigen::MatrixXd psi_hat = ctx.psi_hat;
  Eigen::VectorXd y_cond = ctx.y_cond;

  if (arm != CriterionArm::both) {
    const int a = static_cast<int>(arm);
    long in_arm = 0;
    for (Eigen::Index i = 0; i < ctx.data.n(); ++i) {
      if (ctx.data.a(i) == a) {
        ++in_arm;
      } else {
        psi_hat.row(i).setZero();
        y_cond(i) = 0.0;
      }
    }
    if (in_arm == 0)
      throw data_error("no observations in arm " + std::to_string(a));
  }

  QuadraticCriterion q;
  q.G = psi_hat.transpose() * psi_hat / n;
  q.G = ((q.G + q.G.transpose()) / 2.0).eval();
  q.g = psi_hat.transpose() * y_cond / n;
  q.c = y_cond.squaredNorm() / n;
  q.n = ctx.n();
  q.arm = static_cast<int>(arm);
  q.kind = "outcome";
  return q;
}

CriterionMinimum minimize_criterion(const QuadraticCriterion& q) {
  CriterionMinimum out;
  out.beta = linalg::pinv(q.G) * q.g;
  double val = q.value(out.beta);
  if (val < 0.0 && val > -1e-10) val = 0.0;
  out.c_min = val;
  return out;
}

double choose_threshold(double c_min, long n, int k_n, double kappa) {
  if (kappa < 0.0) throw config_error("kappa must be nonnegative");
  if (c_min < 0.0) throw numeric_error("c_min must be nonnegative");
  return c_min + kappa * static_cast<double>(k_n) * std::log(static_cast<double>(n)) /
                     static_cast<double>(n);
}

SelectionWeights selection_weights(const SieveContext& ctx) {
  const auto n = static_cast<double>(ctx.n());
  SelectionWeights w;
  w.M = ctx.psi.values.transpose() * ctx.psi.values / n;
  w.M = ((w.M + w.M.transpose()) / 2.0).eval();
  const auto p = static_cast<double>(w.M.cols());
  w.ridge = 1e-10 * w.M.trace() / p;
  w.M.diagonal().array() += w.ridge;
  return w;
}

BridgeEstimate select_min_norm(const QuadraticCriterion& q, double c_n,
                               const SelectionWeights& weights) {
  const Eigen::Index p = q.G.cols();
  BridgeEstimate est;
  est.c_n = c_n;
  est.c_min = minimize_criterion(q).c_min;

  const double tol_q = 1e-10 * std::max(1.0, c_n);

  // Unconstrained M-minimizer (no linear term): beta = 0.
  if (q.c <= c_n + tol_q) {
    est.beta = Eigen::VectorXd::Zero(p);
    est.lagrange_multiplier = 0.0;
    est.m_value = 0.0;
    est.feasible = true;
    return est;
  }

  // Simultaneous diagonalization: with M = L L' and L^-1 G L^-T = V D V',
  // the KKT path beta(lambda) = (M + lambda G)^-1 lambda g becomes
  // u_i = lambda w_i / (1 + lambda d_i), beta = L^-T V u. Stable for any
  // lambda since d_i >= 0.
  Eigen::LLT<Eigen::MatrixXd> llt(weights.M);
  if (llt.info() != Eigen::Success)
    throw numeric_error("selection weights are not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd c_mat = l.triangularView<Eigen::Lower>().solve(
      l.triangularView<Eigen::Lower>().solve(q.G).transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      ((c_mat + c_mat.transpose()) / 2.0).eval());
  const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd v = es.eigenvectors();
  const Eigen::VectorXd w_vec =
      v.transpose() * l.triangularView<Eigen::Lower>().solve(q.g);

  // Directions with d_i = 0 carry no criterion gradient (g lies in the
  // column space of G for criteria built from averages of squares); zeroing
  // their floating-point residue keeps the selected point at the M-minimum
  // along them, the pseudoinverse tie-break.
  const double d_cut = d.size() > 0 ? 1e-12 * d.maxCoeff() : 0.0;
  auto beta_at = [&](double lambda) {
    Eigen::VectorXd u(p);
    for (Eigen::Index i = 0; i < p; ++i)
      u(i) = d(i) <= d_cut ? 0.0 : lambda * w_vec(i) / (1.0 + lambda * d(i));
    return l.transpose().triangularView<Eigen::Upper>().solve(v * u).eval();
  };

  double hi = 1.0;
  int doublings = 0;
  while (q.value(beta_at(hi)) > c_n + tol_q) {
    hi *= 2.0;
    if (++doublings > 60)
      throw numeric_error(
          "min-norm selection failed to bracket the multiplier after 60 doublings; "
          "criterion appears ill-scaled");
  }
  double lo = doublings == 0 ? 0.0 : hi / 2.0;

  double lambda = hi;
  Eigen::VectorXd beta = beta_at(hi);
  for (int it = 0; it < 300; ++it) {
    const double mid = (lo + hi) / 2.0;
    const Eigen::VectorXd cand = beta_at(mid);
    const double val = q.value(cand);
    if (val > c_n) {
      lo = mid;
    } else {
      hi = mid;
      lambda = mid;
      beta = cand;
    }
    // complementary slackness needs |Q - c_n| small relative to 1/lambda
    const double target = std::min(tol_q, 1e-9 / std::max(1.0, lambda));
    if (std::abs(q.value(beta) - c_n) <= target) break;
    if (hi - lo <= 1e-15 * hi) break;
  }

  est.beta = beta;
  est.lagrange_multiplier = lambda;
  est.m_value = beta.dot(weights.M * beta);
  est.feasible = q.value(beta) <= c_n + 1e-10;
  return est;
}

bool membership(const Eigen::VectorXd& beta, const QuadraticCriterion& q, double c_n) {
  if (beta.size() != q.G.cols()) throw data_error("membership: beta has wrong length");
  return q.value(beta) <= c_n + 1e-12;
}

}  // namespace proxbridge::bridge
