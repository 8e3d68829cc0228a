#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace proxbridge::oracle {

// Exact joint law over finite-valued (U, X, A, Z, W, Y). Y levels take the
// values 0, 1, ..., card_y - 1. For discrete laws the bridge integral
// equations are matrix equations, so truth is computable by linear algebra.
struct DiscreteJoint {
  int card_u = 1;
  int card_x = 1;
  int card_a = 2;
  int card_z = 2;
  int card_w = 2;
  int card_y = 2;
  std::vector<double> prob;  // row-major over (u, x, a, z, w, y)

  std::size_t cell_count() const {
    return static_cast<std::size_t>(card_u) * card_x * card_a * card_z * card_w * card_y;
  }
  std::size_t index(int u, int x, int a, int z, int w, int y) const {
    return ((((static_cast<std::size_t>(u) * card_x + x) * card_a + a) * card_z + z) *
                card_w + w) * card_y + y;
  }
  double p(int u, int x, int a, int z, int w, int y) const {
    return prob[index(u, x, a, z, w, y)];
  }
  double& at(int u, int x, int a, int z, int w, int y) {
    return prob[index(u, x, a, z, w, y)];
  }

  // entries nonnegative, sum to 1 within 1e-12, card_a == 2
  void validate() const;

  // marginals; each is an exact sum over the omitted coordinates
  double p_ux(int u, int x) const;
  double p_x(int x) const;
  double p_aux(int a, int u, int x) const;
  double p_zax(int z, int a, int x) const;
  double p_wax(int w, int a, int x) const;
  double p_wzax(int w, int z, int a, int x) const;
  double p_wx(int w, int x) const;
  double e_y_given_zax(int z, int a, int x) const;
  double e_y_given_aux(int a, int u, int x) const;

  std::string to_json() const;
  static DiscreteJoint from_json(const std::string& text);
};

enum class BridgeKind { outcome, treatment };

// Affine set {particular + null_basis * t} of solutions to one bridge
// equation at a fixed arm. Coefficients are indexed x-major: outcome kind
// idx = x * card_w + w, treatment kind idx = x * card_z + z. The retained
// rows of the defining system (probability-zero strata excluded) are kept
// for the weighted metric and adjoint computations.
struct AffineSolutionSet {
  Eigen::VectorXd particular;  // minimum-Euclidean-norm solution
  Eigen::MatrixXd null_basis;  // orthonormal kernel basis
  int dim = 0;

  Eigen::MatrixXd system;      // retained rows of the conditional matrix
  Eigen::VectorXd rhs;
  Eigen::VectorXd row_weight;  // P(row stratum, arm) per retained row
  Eigen::VectorXd col_weight;  // P(col cell, arm) defining the L2 inner product
  int arm = 0;
  BridgeKind kind = BridgeKind::outcome;

  // ||h||_w^2 = h' * weight() * h; annihilates null directions
  Eigen::MatrixXd weight() const;
};

struct IdentificationReport {
  bool functional_identified = false;
  bool root_n_range_member = false;
  int null_dim = 0;
  double orthogonality_residual = 0.0;  // max |<phi, nu>| over null basis
  double range_residual = 0.0;          // least-squares residual of the adjoint solve
};

// g-formula over the latent confounder; simulation ground truth only.
double true_counterfactual_mean(const DiscreteJoint& joint, int arm);

// Full affine solution set of the outcome (Eq. over (z,x) strata) or
// treatment (over (w,x) strata) bridge equation. Throws no_bridge_error if
// the system is inconsistent beyond 1e-9.
AffineSolutionSet bridge_solution_set(const DiscreteJoint& joint, int arm, BridgeKind kind);

// Is E[phi * h] invariant over the solution set? phi is a function on the
// coefficient grid; the inner product carries the P(cell, arm) weighting.
bool functional_identified(const DiscreteJoint& joint, int arm,
                           const Eigen::VectorXd& phi, BridgeKind kind);

// Necessary condition for root-n estimability: phi in the range of the
// adjoint operator (closed in finite dimensions).
IdentificationReport root_n_range_member(const DiscreteJoint& joint, int arm,
                                         const Eigen::VectorXd& phi, BridgeKind kind);

enum class SetMetric { sup, weighted };

struct SetDistance {
  double value = 0.0;
  bool euclidean_fallback = false;  // weighted metric was degenerate
};

// Directed distance inf over the set of ||point - h|| in the requested norm.
SetDistance directed_distance(const Eigen::VectorXd& point, const AffineSolutionSet& set,
                              SetMetric metric);

// Unique minimizer of h' diag(weights) h over the affine set (the population
// squared-length selection target when weights = P(cell, arm)).
Eigen::VectorXd min_weighted_norm_element(const AffineSolutionSet& set,
                                          const Eigen::VectorXd& diag_weights);

// E[Y(a)] functional applied to a treatment-bridge vector by exact
// enumeration of E[I(A=a) q(Z,a,X) Y].
double treatment_bridge_functional(const DiscreteJoint& joint, int arm,
                                   const Eigen::VectorXd& q);

// Plug-in functional sum_{w,x} h(w,x) P(W=w, X=x) for an outcome-bridge vector.
double outcome_plugin_functional(const DiscreteJoint& joint, const Eigen::VectorXd& h);

}  // namespace proxbridge::oracle
