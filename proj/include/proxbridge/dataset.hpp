#pragma once

#include <Eigen/Dense>

namespace proxbridge {

// Observed columns (Y, A, Z, W, X) of n observations; the universal
// estimator input. X may be empty (d = 0).
struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXi a;
  Eigen::VectorXd z;
  Eigen::VectorXd w;
  Eigen::MatrixXd x;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index x_dim() const { return x.cols(); }

  // consistent column lengths, binary treatment
  void validate() const;
};

}  // namespace proxbridge
