#include "proxbridge/discrete_oracle.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "proxbridge/errors.hpp"
#include "proxbridge/linalg.hpp"

namespace proxbridge::oracle {

void DiscreteJoint::validate() const {
  if (card_a != 2) throw data_error("DiscreteJoint requires a binary treatment (card_a = 2)");
  if (card_u < 1 || card_x < 1 || card_z < 1 || card_w < 1 || card_y < 1)
    throw data_error("DiscreteJoint cardinalities must be positive");
  if (prob.size() != cell_count())
    throw data_error("DiscreteJoint probability tensor has wrong length");
  double total = 0.0;
  for (double v : prob) {
    if (!(v >= 0.0)) throw data_error("DiscreteJoint entries must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw data_error("DiscreteJoint entries must sum to 1 (got " + std::to_string(total) + ")");
}

double DiscreteJoint::p_ux(int u, int x) const {
  double s = 0.0;
  for (int a = 0; a < card_a; ++a)
    for (int z = 0; z < card_z; ++z)
      for (int w = 0; w < card_w; ++w)
        for (int y = 0; y < card_y; ++y) s += p(u, x, a, z, w, y);
  return s;
}

double DiscreteJoint::p_x(int x) const {
  double s = 0.0;
  for (int u = 0; u < card_u; ++u) s += p_ux(u, x);
  return s;
}

double DiscreteJoint::p_aux(int a, int u, int x) const {
  double s = 0.0;
  for (int z = 0; z < card_z; ++z)
    for (int w = 0; w < card_w; ++w)
      for (int y = 0; y < card_y; ++y) s += p(u, x, a, z, w, y);
  return s;
}

double DiscreteJoint::p_zax(int z, int a, int x) const {
  double s = 0.0;
  for (int u = 0; u < card_u; ++u)
    for (int w = 0; w < card_w; ++w)
      for (int y = 0; y < card_y; ++y) s += p(u, x, a, z, w, y);
  return s;
}

double DiscreteJoint::p_wax(int w, int a, int x) const {
  double s = 0.0;
  for (int u = 0; u < card_u; ++u)
    for (int z = 0; z < card_z; ++z)
      for (int y = 0; y < card_y; ++y) s += p(u, x, a, z, w, y);
  return s;
}

double DiscreteJoint::p_wzax(int w, int z, int a, int x) const {
  double s = 0.0;
  for (int u = 0; u < card_u; ++u)
    for (int y = 0; y < card_y; ++y) s += p(u, x, a, z, w, y);
  return s;
}

double DiscreteJoint::p_wx(int w, int x) const {
  double s = 0.0;
  for (int a = 0; a < card_a; ++a) s += p_wax(w, a, x);
  return s;
}

double DiscreteJoint::e_y_given_zax(int z, int a, int x) const {
  const double denom = p_zax(z, a, x);
  double s = 0.0;
  for (int u = 0; u < card_u; ++u)
    for (int w = 0; w < card_w; ++w)
      for (int y = 0; y < card_y; ++y) s += y * p(u, x, a, z, w, y);
  return s / denom;
}

double DiscreteJoint::e_y_given_aux(int a, int u, int x) const {
  const double denom = p_aux(a, u, x);
  double s = 0.0;
  for (int z = 0; z < card_z; ++z)
    for (int w = 0; w < card_w; ++w)
      for (int y = 0; y < card_y; ++y) s += y * p(u, x, a, z, w, y);
  return s / denom;
}

std::string DiscreteJoint::to_json() const {
  nlohmann::json j;
  j["dims"] = {{"u", card_u}, {"x", card_x}, {"a", card_a},
               {"z", card_z}, {"w", card_w}, {"y", card_y}};
  j["order"] = {"u", "x", "a", "z", "w", "y"};
  j["prob"] = prob;
  return j.dump(2);
}

DiscreteJoint DiscreteJoint::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("invalid DiscreteJoint JSON: ") + e.what());
  }
  DiscreteJoint out;
  try {
    const auto& dims = j.at("dims");
    out.card_u = dims.at("u").get<int>();
    out.card_x = dims.at("x").get<int>();
    out.card_a = dims.at("a").get<int>();
    out.card_z = dims.at("z").get<int>();
    out.card_w = dims.at("w").get<int>();
    out.card_y = dims.at("y").get<int>();
    const std::vector<std::string> expected = {"u", "x", "a", "z", "w", "y"};
    if (j.at("order").get<std::vector<std::string>>() != expected)
      throw data_error("DiscreteJoint JSON must use order [u, x, a, z, w, y]");
    out.prob = j.at("prob").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("invalid DiscreteJoint JSON: ") + e.what());
  }
  out.validate();
  return out;
}

Eigen::MatrixXd AffineSolutionSet::weight() const {
  return system.transpose() * row_weight.asDiagonal() * system;
}

double true_counterfactual_mean(const DiscreteJoint& joint, int arm) {
  joint.validate();
  double mu = 0.0;
  for (int u = 0; u < joint.card_u; ++u)
    for (int x = 0; x < joint.card_x; ++x) {
      const double pux = joint.p_ux(u, x);
      if (pux <= 0.0) continue;
      const double pa = joint.p_aux(arm, u, x) / pux;
      if (pa <= 0.0 || pa >= 1.0)
        throw data_error("positivity violated at (u=" + std::to_string(u) + ", x=" +
                         std::to_string(x) + "): P(A=" + std::to_string(arm) +
                         "|u,x) = " + std::to_string(pa));
      mu += joint.e_y_given_aux(arm, u, x) * pux;
    }
  return mu;
}

AffineSolutionSet bridge_solution_set(const DiscreteJoint& joint, int arm, BridgeKind kind) {
  joint.validate();
  AffineSolutionSet set;
  set.arm = arm;
  set.kind = kind;

  const int n_cols = kind == BridgeKind::outcome ? joint.card_x * joint.card_w
                                                 : joint.card_x * joint.card_z;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs_vals, weights;

  if (kind == BridgeKind::outcome) {
    // per (z, x): sum_w h(w, x) P(w | z, arm, x) = E[Y | z, arm, x]
    for (int x = 0; x < joint.card_x; ++x)
      for (int z = 0; z < joint.card_z; ++z) {
        const double pz = joint.p_zax(z, arm, x);
        if (pz <= 0.0) continue;  // almost-sure statement: drop null strata
        Eigen::VectorXd row = Eigen::VectorXd::Zero(n_cols);
        for (int w = 0; w < joint.card_w; ++w)
          row(x * joint.card_w + w) = joint.p_wzax(w, z, arm, x) / pz;
        rows.push_back(row);
        rhs_vals.push_back(joint.e_y_given_zax(z, arm, x));
        weights.push_back(pz);
      }
    set.col_weight = Eigen::VectorXd::Zero(n_cols);
    for (int x = 0; x < joint.card_x; ++x)
      for (int w = 0; w < joint.card_w; ++w)
        set.col_weight(x * joint.card_w + w) = joint.p_wax(w, arm, x);
  } else {
    // per (w, x): sum_z q(z, x) P(z | w, arm, x) = 1 / P(A=arm | w, x)
    for (int x = 0; x < joint.card_x; ++x)
      for (int w = 0; w < joint.card_w; ++w) {
        const double pw = joint.p_wax(w, arm, x);
        if (pw <= 0.0) continue;
        Eigen::VectorXd row = Eigen::VectorXd::Zero(n_cols);
        for (int z = 0; z < joint.card_z; ++z)
          row(x * joint.card_z + z) = joint.p_wzax(w, z, arm, x) / pw;
        rows.push_back(row);
        rhs_vals.push_back(joint.p_wx(w, x) / pw);
        weights.push_back(pw);
      }
    set.col_weight = Eigen::VectorXd::Zero(n_cols);
    for (int x = 0; x < joint.card_x; ++x)
      for (int z = 0; z < joint.card_z; ++z)
        set.col_weight(x * joint.card_z + z) = joint.p_zax(z, arm, x);
  }

  const int n_rows = static_cast<int>(rows.size());
  set.system.resize(n_rows, n_cols);
  set.rhs.resize(n_rows);
  set.row_weight.resize(n_rows);
  for (int i = 0; i < n_rows; ++i) {
    set.system.row(i) = rows[i].transpose();
    set.rhs(i) = rhs_vals[i];
    set.row_weight(i) = weights[i];
  }

  auto sol = linalg::min_norm_solve(set.system, set.rhs);
  if (sol.residual_inf > 1e-9)
    throw no_bridge_error(std::string("no ") +
                          (kind == BridgeKind::outcome ? "outcome" : "treatment") +
                          " bridge exists for arm " + std::to_string(arm) +
                          " (inconsistency " + std::to_string(sol.residual_inf) + ")");
  set.particular = sol.x;
  set.null_basis = sol.null_basis;
  set.dim = static_cast<int>(sol.null_basis.cols());
  return set;
}

namespace {

void check_phi_dim(const Eigen::VectorXd& phi, const AffineSolutionSet& set) {
  if (phi.size() != set.particular.size())
    throw data_error("phi has length " + std::to_string(phi.size()) + ", expected " +
                     std::to_string(set.particular.size()));
}

bool identified_against(const Eigen::VectorXd& phi, const AffineSolutionSet& set,
                        double* residual_out) {
  const Eigen::VectorXd weighted_phi = set.col_weight.cwiseProduct(phi);
  const double phi_norm =
      std::sqrt(phi.cwiseProduct(weighted_phi).cwiseAbs().sum());
  double worst = 0.0;
  for (Eigen::Index c = 0; c < set.null_basis.cols(); ++c)
    worst = std::max(worst, std::abs(weighted_phi.dot(set.null_basis.col(c))));
  if (residual_out) *residual_out = worst;
  return worst <= 1e-9 * std::max(1.0, phi_norm);
}

}  // namespace

bool functional_identified(const DiscreteJoint& joint, int arm,
                           const Eigen::VectorXd& phi, BridgeKind kind) {
  const AffineSolutionSet set = bridge_solution_set(joint, arm, kind);
  check_phi_dim(phi, set);
  return identified_against(phi, set, nullptr);
}

IdentificationReport root_n_range_member(const DiscreteJoint& joint, int arm,
                                         const Eigen::VectorXd& phi, BridgeKind kind) {
  const AffineSolutionSet set = bridge_solution_set(joint, arm, kind);
  check_phi_dim(phi, set);

  IdentificationReport report;
  report.null_dim = set.dim;
  report.functional_identified = identified_against(phi, set, &report.orthogonality_residual);

  // Adjoint in the probability-weighted inner products:
  //   T' = diag(col_weight)^-1 * system' * diag(row_weight),
  // the conditional-expectation operator in the opposite direction.
  // Coefficients with zero marginal weight are irrelevant in L2 and dropped.
  std::vector<int> live;
  for (Eigen::Index j = 0; j < set.col_weight.size(); ++j)
    if (set.col_weight(j) > 0.0) live.push_back(static_cast<int>(j));

  Eigen::MatrixXd adjoint(live.size(), set.system.rows());
  Eigen::VectorXd target(live.size());
  for (std::size_t r = 0; r < live.size(); ++r) {
    const int j = live[r];
    adjoint.row(r) = (set.system.col(j).cwiseProduct(set.row_weight) / set.col_weight(j))
                         .transpose();
    target(r) = phi(j);
  }
  auto sol = linalg::min_norm_solve(adjoint, target);
  report.range_residual = sol.residual_inf;
  const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  report.root_n_range_member = sol.residual_inf <= 1e-9 * scale;
  return report;
}

SetDistance directed_distance(const Eigen::VectorXd& point, const AffineSolutionSet& set,
                              SetMetric metric) {
  if (point.size() != set.particular.size())
    throw data_error("point has length " + std::to_string(point.size()) + ", expected " +
                     std::to_string(set.particular.size()));
  const Eigen::VectorXd r = point - set.particular;
  SetDistance out;

  if (metric == SetMetric::weighted) {
    // ||h||_w annihilates the kernel, so the inf over the set is attained
    // immediately: apply the system first for exact cancellation on members.
    if (set.system.allFinite() && set.row_weight.allFinite() &&
        set.row_weight.sum() > 0.0) {
      const Eigen::VectorXd v = set.system * r;
      out.value = std::sqrt(v.cwiseProduct(set.row_weight).dot(v));
      return out;
    }
    // degenerate weighting: Euclidean projection distance instead
    out.euclidean_fallback = true;
    const Eigen::VectorXd proj =
        r - set.null_basis * (set.null_basis.transpose() * r);
    out.value = proj.norm();
    return out;
  }

  // sup norm over the affine set: minimize max-abs over null coordinates by
  // a dense grid refined twice around the incumbent (test-oracle accuracy).
  const Eigen::MatrixXd& nb = set.null_basis;
  const int d = static_cast<int>(nb.cols());
  auto objective = [&](const Eigen::VectorXd& t) {
    return (r - nb * t).cwiseAbs().maxCoeff();
  };
  if (d == 0) {
    out.value = r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
    return out;
  }

  Eigen::VectorXd best_t = nb.transpose() * r;  // Euclidean projection seed
  double best = objective(best_t);
  const double radius0 =
      r.norm() * (1.0 + std::sqrt(static_cast<double>(r.size()))) + 1e-12;
  const int points = 13;
  double radius = radius0;
  Eigen::VectorXd center = best_t;
  for (int pass = 0; pass < 3; ++pass) {
    std::vector<int> idx(d, 0);
    while (true) {
      Eigen::VectorXd t = center;
      for (int k = 0; k < d; ++k)
        t(k) += radius * (2.0 * idx[k] / (points - 1) - 1.0);
      const double val = objective(t);
      if (val < best) {
        best = val;
        best_t = t;
      }
      int k = 0;
      while (k < d && ++idx[k] == points) idx[k++] = 0;
      if (k == d) break;
    }
    center = best_t;
    radius *= 2.0 / (points - 1);  // two grid cells around the incumbent
  }
  out.value = best;
  return out;
}

Eigen::VectorXd min_weighted_norm_element(const AffineSolutionSet& set,
                                          const Eigen::VectorXd& diag_weights) {
  if (set.dim == 0) return set.particular;
  const Eigen::MatrixXd dn = diag_weights.asDiagonal() * set.null_basis;
  const Eigen::MatrixXd gram = set.null_basis.transpose() * dn;
  const Eigen::VectorXd rhs = dn.transpose() * set.particular;
  const Eigen::VectorXd t = -(linalg::pinv(gram) * rhs);
  return set.particular + set.null_basis * t;
}

double treatment_bridge_functional(const DiscreteJoint& joint, int arm,
                                   const Eigen::VectorXd& q) {
  double s = 0.0;
  for (int u = 0; u < joint.card_u; ++u)
    for (int x = 0; x < joint.card_x; ++x)
      for (int z = 0; z < joint.card_z; ++z)
        for (int w = 0; w < joint.card_w; ++w)
          for (int y = 0; y < joint.card_y; ++y)
            s += y * q(x * joint.card_z + z) * joint.p(u, x, arm, z, w, y);
  return s;
}

double outcome_plugin_functional(const DiscreteJoint& joint, const Eigen::VectorXd& h) {
  double s = 0.0;
  for (int x = 0; x < joint.card_x; ++x)
    for (int w = 0; w < joint.card_w; ++w)
      s += h(x * joint.card_w + w) * joint.p_wx(w, x);
  return s;
}

}  // namespace proxbridge::oracle
