#include "proxbridge/sieve_projection.hpp"

#include <string>

#include "proxbridge/errors.hpp"
#include "proxbridge/linalg.hpp"

namespace proxbridge::projection {

ProjectionModel fit(const basis::DesignMatrix& phi, const Eigen::MatrixXd& targets) {
  const Eigen::Index n = phi.values.rows();
  const Eigen::Index k = phi.values.cols();
  if (targets.rows() != n) throw data_error("projection targets have wrong row count");
  if (n <= k)
    throw data_error("sieve projection needs n > k_n (n = " + std::to_string(n) +
                     ", k_n = " + std::to_string(k) + "); reduce the instrument basis");

  ProjectionModel model;
  Eigen::MatrixXd gram = phi.values.transpose() * phi.values;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double ev_min = es.eigenvalues().minCoeff();
  const double ev_max = es.eigenvalues().maxCoeff();
  model.min_gram_eigenvalue = ev_min / static_cast<double>(n);
  const double rcond = ev_max > 0.0 ? ev_min / ev_max : 0.0;
  if (rcond < 1e-12) {
    model.ridge_used = 1e-8;
    model.rank_flag = true;
    gram.diagonal().array() += model.ridge_used * gram.trace() / static_cast<double>(k);
  }

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) {
    model.gram_inverse = llt.solve(Eigen::MatrixXd::Identity(k, k));
  } else {
    model.gram_inverse = linalg::pinv(gram);  // robust fallback
  }
  model.coefficients = model.gram_inverse * (phi.values.transpose() * targets);
  return model;
}

Eigen::MatrixXd predict(const ProjectionModel& model, const Eigen::MatrixXd& phi_rows) {
  if (phi_rows.cols() != model.coefficients.rows())
    throw data_error("prediction rows have " + std::to_string(phi_rows.cols()) +
                     " columns, model expects " + std::to_string(model.coefficients.rows()));
  return phi_rows * model.coefficients;
}

Eigen::MatrixXd cross_operator(const basis::DesignMatrix& phi,
                               const basis::DesignMatrix& psi) {
  if (phi.values.rows() != psi.values.rows())
    throw data_error("cross_operator designs must share observations");
  const ProjectionModel model = fit(phi, psi.values);
  return predict(model, phi.values);
}

}  // namespace proxbridge::projection
