#pragma once

#include <Eigen/Dense>

#include "proxbridge/dataset.hpp"
#include "proxbridge/sieve_basis.hpp"
#include "proxbridge/sieve_projection.hpp"

namespace proxbridge {

// Everything the criterion builders need, assembled once per dataset: the
// two designs, the instrument projection, and the projected quantities
// E[Y|Z,A,X] and E[psi_m|Z,A,X]. Immutable after construction.
struct SieveContext {
  Dataset data;
  basis::BasisSet psi_basis;
  basis::BasisSet phi_basis;
  basis::DesignMatrix psi;         // bridge design at observed arms
  basis::DesignMatrix phi;         // instrument design at observed arms
  basis::DesignMatrix psi_arm[2];  // bridge design with the arm overridden
  projection::ProjectionModel proj;
  Eigen::VectorXd y_cond;     // fitted E[Y|Z,A,X]
  Eigen::MatrixXd psi_hat;    // fitted E[psi|Z,A,X], n x m

  long n() const { return static_cast<long>(data.n()); }
  int m_count() const { return static_cast<int>(psi.values.cols()); }
  int k_count() const { return static_cast<int>(phi.values.cols()); }
  bool clamped() const { return psi.clamped || phi.clamped; }
};

SieveContext make_context(Dataset data, const basis::BasisSpec& spec);

}  // namespace proxbridge
