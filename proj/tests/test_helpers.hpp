#pragma once

#include <Eigen/Dense>

#include "proxbridge/discrete_oracle.hpp"
#include "proxbridge/rng.hpp"

namespace proxbridge::testing {

// Random joint built from a latent-unconfoundedness factorization
// p(u) p(x) p(a|u,x) p(z|u,a,x) p(w|u,x) p(y|a,u,x), each conditional kept
// well inside (0,1) so positivity holds.
inline oracle::DiscreteJoint random_joint(std::uint64_t seed, int cu, int cx, int cz,
                                          int cw, int cy = 2) {
  Rng rng(seed);
  auto simplex = [&rng](int k) {
    std::vector<double> v(k);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      v[i] = 0.15 + rng.uniform();
      total += v[i];
    }
    for (double& x : v) x /= total;
    return v;
  };

  oracle::DiscreteJoint j;
  j.card_u = cu;
  j.card_x = cx;
  j.card_a = 2;
  j.card_z = cz;
  j.card_w = cw;
  j.card_y = cy;
  j.prob.assign(j.cell_count(), 0.0);

  const auto pu = simplex(cu);
  const auto px = simplex(cx);
  std::vector<std::vector<double>> pa(cu * cx);
  std::vector<std::vector<double>> pw(cu * cx);
  for (int i = 0; i < cu * cx; ++i) {
    pa[i] = simplex(2);
    pw[i] = simplex(cw);
  }
  std::vector<std::vector<double>> pz(cu * cx * 2);
  for (auto& v : pz) v = simplex(cz);
  std::vector<std::vector<double>> py(cu * cx * 2);
  for (auto& v : py) v = simplex(cy);

  for (int u = 0; u < cu; ++u)
    for (int x = 0; x < cx; ++x)
      for (int a = 0; a < 2; ++a)
        for (int z = 0; z < cz; ++z)
          for (int w = 0; w < cw; ++w)
            for (int y = 0; y < cy; ++y)
              j.at(u, x, a, z, w, y) = pu[u] * px[x] * pa[u * cx + x][a] *
                                       pz[(u * cx + x) * 2 + a][z] *
                                       pw[u * cx + x][w] * py[(u * cx + x) * 2 + a][y];

  // exact renormalization
  double total = 0.0;
  for (double v : j.prob) total += v;
  for (double& v : j.prob) v /= total;
  return j;
}

// column-space membership test by modified Gram-Schmidt, independent of the
// SVD route used by the library
inline bool in_column_space(const Eigen::MatrixXd& m, const Eigen::VectorXd& v,
                            double tol) {
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::VectorXd u = m.col(c);
    for (const auto& b : basis) u -= b.dot(u) * b;
    const double norm = u.norm();
    if (norm > 1e-10 * std::max(1.0, m.col(c).norm())) basis.push_back(u / norm);
  }
  Eigen::VectorXd r = v;
  for (const auto& b : basis) r -= b.dot(r) * b;
  return r.cwiseAbs().maxCoeff() <= tol * std::max(1.0, v.cwiseAbs().maxCoeff());
}

// kernel basis from the eigendecomposition of A'A, independent of the SVD
// route; eigenvalues of kernel directions sit at squared-roundoff scale
inline Eigen::MatrixXd brute_null_space(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double cut = 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff());
  int dim = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) <= cut) ++dim;
  return es.eigenvectors().leftCols(dim);
}

}  // namespace proxbridge::testing
