#include "proxbridge/linalg.hpp"

#include <algorithm>

namespace proxbridge::linalg {

namespace {

int effective_rank(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0) return 0;
  const double max_sv = sv(0);
  if (max_sv <= 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * max_sv) ++r;
  return r;
}

}  // namespace

MinNormSolution min_norm_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const int r = effective_rank(sv, rel_tol);

  MinNormSolution out;
  out.rank = r;
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(A.cols());
  const Eigen::VectorXd utb = svd.matrixU().transpose() * b;
  for (int i = 0; i < r; ++i) coef(i) = utb(i) / sv(i);
  out.x = svd.matrixV() * coef;
  out.null_basis = svd.matrixV().rightCols(A.cols() - r);
  out.residual_inf = b.size() > 0 ? (A * out.x - b).cwiseAbs().maxCoeff() : 0.0;
  return out;
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& A, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const int r = effective_rank(sv, rel_tol);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (int i = 0; i < r; ++i) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& A, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const int r = effective_rank(svd.singularValues(), rel_tol);
  return svd.matrixV().rightCols(A.cols() - r);
}

int rank(const Eigen::MatrixXd& A, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return effective_rank(svd.singularValues(), rel_tol);
}

}  // namespace proxbridge::linalg
