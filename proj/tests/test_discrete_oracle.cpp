#include <doctest.h>

#include <cmath>

#include "proxbridge/discrete_oracle.hpp"
#include "proxbridge/errors.hpp"
#include "proxbridge/simulation.hpp"
#include "test_helpers.hpp"

using namespace proxbridge;
using oracle::BridgeKind;
using proxbridge::testing::random_joint;

namespace {

// independent weighted-orthogonality check against every kernel direction
bool brute_identified(const oracle::AffineSolutionSet& set, const Eigen::VectorXd& phi) {
  const Eigen::MatrixXd kernel = testing::brute_null_space(set.system);
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    double dot = 0.0;
    for (Eigen::Index j = 0; j < phi.size(); ++j)
      dot += phi(j) * kernel(j, c) * set.col_weight(j);
    if (std::abs(dot) > 1e-9) return false;
  }
  return true;
}

Eigen::MatrixXd adjoint_matrix(const oracle::AffineSolutionSet& set) {
  Eigen::MatrixXd adj(set.col_weight.size(), set.system.rows());
  for (Eigen::Index j = 0; j < set.col_weight.size(); ++j)
    adj.row(j) = (set.system.col(j).cwiseProduct(set.row_weight) /
                  std::max(set.col_weight(j), 1e-300))
                     .transpose();
  return adj;
}

}  // namespace

TEST_SUITE_BEGIN("discrete_oracle");

TEST_CASE("constant outcome has counterfactual mean one") {
  auto j = random_joint(7, 2, 1, 2, 2, 2);
  // force Y = 1: move all mass to y = 1
  for (int u = 0; u < 2; ++u)
    for (int a = 0; a < 2; ++a)
      for (int z = 0; z < 2; ++z)
        for (int w = 0; w < 2; ++w) {
          j.at(u, 0, a, z, w, 1) += j.at(u, 0, a, z, w, 0);
          j.at(u, 0, a, z, w, 0) = 0.0;
        }
  CHECK(oracle::true_counterfactual_mean(j, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(oracle::true_counterfactual_mean(j, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("independent outcome gives its marginal mean for both arms") {
  auto j = random_joint(11, 2, 1, 2, 3, 2);
  // overwrite Y with an independent fair coin
  oracle::DiscreteJoint ind = j;
  for (int u = 0; u < 2; ++u)
    for (int a = 0; a < 2; ++a)
      for (int z = 0; z < 2; ++z)
        for (int w = 0; w < 3; ++w) {
          const double mass = j.at(u, 0, a, z, w, 0) + j.at(u, 0, a, z, w, 1);
          ind.at(u, 0, a, z, w, 0) = mass / 2;
          ind.at(u, 0, a, z, w, 1) = mass / 2;
        }
  CHECK(oracle::true_counterfactual_mean(ind, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(oracle::true_counterfactual_mean(ind, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("binary-U law matches the enumeration formula") {
  // P(U=1) = 0.5, P(Y=1|A=1,U=u) = 0.3 + 0.4u  =>  mu_1 = 0.5
  oracle::DiscreteJoint j;
  j.card_u = 2; j.card_x = 1; j.card_z = 2; j.card_w = 2; j.card_y = 2;
  j.prob.assign(j.cell_count(), 0.0);
  for (int u = 0; u < 2; ++u)
    for (int a = 0; a < 2; ++a)
      for (int z = 0; z < 2; ++z)
        for (int w = 0; w < 2; ++w)
          for (int y = 0; y < 2; ++y) {
            const double pz = z == 1 ? 0.4 + 0.2 * u : 0.6 - 0.2 * u;
            const double pw = w == 1 ? 0.3 + 0.3 * u : 0.7 - 0.3 * u;
            const double pa = a == 1 ? 0.35 + 0.2 * u : 0.65 - 0.2 * u;
            const double py1 = a == 1 ? 0.3 + 0.4 * u : 0.2 + 0.1 * u;
            j.at(u, 0, a, z, w, y) = 0.5 * pz * pw * pa * (y == 1 ? py1 : 1.0 - py1);
          }
  CHECK(oracle::true_counterfactual_mean(j, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("positivity violation is rejected with the offending cell named") {
  auto j = random_joint(3, 2, 1, 2, 2, 2);
  // make arm 1 impossible at u = 0
  for (int z = 0; z < 2; ++z)
    for (int w = 0; w < 2; ++w)
      for (int y = 0; y < 2; ++y) {
        j.at(0, 0, 0, z, w, y) += j.at(0, 0, 1, z, w, y);
        j.at(0, 0, 1, z, w, y) = 0.0;
      }
  CHECK_THROWS_WITH_AS(oracle::true_counterfactual_mean(j, 1),
                       doctest::Contains("u=0"), data_error);
}

TEST_CASE("square full-rank system yields a unique bridge") {
  const auto j = random_joint(19, 2, 1, 2, 2, 2);
  const auto set = oracle::bridge_solution_set(j, 1, BridgeKind::outcome);
  CHECK(set.dim == 0);
  CHECK(set.null_basis.cols() == 0);
  CHECK((set.system * set.particular - set.rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("wide system has the rank-nullity kernel dimension") {
  const auto spec = sim::nonunique_preset();
  for (int arm = 0; arm < 2; ++arm) {
    const auto set = oracle::bridge_solution_set(spec.joint, arm, BridgeKind::outcome);
    CHECK(set.dim == 1);  // 2 retained rows, 3 unknowns, full row rank
    CHECK(set.null_basis.cols() == 1);
    CHECK(std::abs(set.null_basis.col(0).norm() - 1.0) < 1e-12);
    CHECK((set.system * set.null_basis).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((set.system * set.particular - set.rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("degenerate proxies W = Z recover the outcome regression") {
  // W identical to Z: h(w, a) = E[Y | Z=w, A=a] solves the square system
  oracle::DiscreteJoint j;
  j.card_u = 2; j.card_x = 1; j.card_z = 2; j.card_w = 2; j.card_y = 2;
  j.prob.assign(j.cell_count(), 0.0);
  for (int u = 0; u < 2; ++u)
    for (int a = 0; a < 2; ++a)
      for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 2; ++y) {
          const double pz = z == 1 ? 0.3 + 0.4 * u : 0.7 - 0.4 * u;
          const double pa = a == 1 ? 0.4 + 0.2 * u : 0.6 - 0.2 * u;
          const double py1 = 0.2 + 0.3 * a + 0.25 * u;
          j.at(u, 0, a, z, /*w=*/z, y) = 0.5 * pz * pa * (y == 1 ? py1 : 1.0 - py1);
        }
  for (int arm = 0; arm < 2; ++arm) {
    const auto set = oracle::bridge_solution_set(j, arm, BridgeKind::outcome);
    REQUIRE(set.dim == 0);
    for (int z = 0; z < 2; ++z)
      CHECK(set.particular(z) ==
            doctest::Approx(j.e_y_given_zax(z, arm, 0)).epsilon(1e-10));
  }
}

TEST_CASE("inconsistent treatment equation reports no bridge") {
  // Z carries no information about U while 1/P(A=a|W) varies with W
  oracle::DiscreteJoint j;
  j.card_u = 2; j.card_x = 1; j.card_z = 2; j.card_w = 2; j.card_y = 2;
  j.prob.assign(j.cell_count(), 0.0);
  for (int u = 0; u < 2; ++u)
    for (int a = 0; a < 2; ++a)
      for (int z = 0; z < 2; ++z)
        for (int w = 0; w < 2; ++w)
          for (int y = 0; y < 2; ++y) {
            const double pw = w == 1 ? 0.2 + 0.6 * u : 0.8 - 0.6 * u;
            const double pa = a == 1 ? 0.25 + 0.5 * u : 0.75 - 0.5 * u;
            j.at(u, 0, a, z, w, y) = 0.5 * 0.5 * pw * pa * 0.5;
          }
  CHECK_THROWS_AS(oracle::bridge_solution_set(j, 1, BridgeKind::treatment),
                  no_bridge_error);
}

TEST_CASE("trivial null space identifies every functional") {
  const auto j = random_joint(23, 2, 1, 3, 2, 2);
  const auto set = oracle::bridge_solution_set(j, 0, BridgeKind::outcome);
  REQUIRE(set.dim == 0);
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd phi(set.particular.size());
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = rng.normal();
    CHECK(oracle::functional_identified(j, 0, phi, BridgeKind::outcome));
  }
}

TEST_CASE("a null direction is never identified") {
  const auto spec = sim::nonunique_preset();
  for (int arm = 0; arm < 2; ++arm) {
    const auto set = oracle::bridge_solution_set(spec.joint, arm, BridgeKind::outcome);
    REQUIRE(set.dim == 1);
    const Eigen::VectorXd phi = set.null_basis.col(0);
    CHECK_FALSE(oracle::functional_identified(spec.joint, arm, phi, BridgeKind::outcome));
    const auto report = oracle::root_n_range_member(spec.joint, arm, phi,
                                                    BridgeKind::outcome);
    CHECK_FALSE(report.root_n_range_member);
    CHECK_FALSE(report.functional_identified);
  }
}

TEST_CASE("inverse-propensity weighting is identified when the treatment bridge exists") {
  const auto spec = sim::nonunique_preset();
  const auto& j = spec.joint;
  for (int arm = 0; arm < 2; ++arm) {
    Eigen::VectorXd phi(j.card_w);
    for (int w = 0; w < j.card_w; ++w)
      phi(w) = j.p_wx(w, 0) / j.p_wax(w, arm, 0);  // 1 / P(A=arm | w)
    CHECK(oracle::functional_identified(j, arm, phi, BridgeKind::outcome));

    const auto report = oracle::root_n_range_member(j, arm, phi, BridgeKind::outcome);
    CHECK(report.root_n_range_member);
    CHECK(report.functional_identified);
    CHECK(report.null_dim == 1);

    // the adjoint preimage solves the treatment bridge equation
    const auto set = oracle::bridge_solution_set(j, arm, BridgeKind::outcome);
    const Eigen::MatrixXd adj = adjoint_matrix(set);
    const Eigen::VectorXd q = adj.completeOrthogonalDecomposition().solve(phi);
    const auto treatment = oracle::bridge_solution_set(j, arm, BridgeKind::treatment);
    CHECK((treatment.system * q - treatment.rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("constructed adjoint images are range members") {
  Rng rng(31);
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto j = random_joint(100 + s, 2, 1, 2, 3, 2);
    for (auto kind : {BridgeKind::outcome, BridgeKind::treatment}) {
      const auto set = oracle::bridge_solution_set(j, 1, kind);
      const Eigen::MatrixXd adj = adjoint_matrix(set);
      Eigen::VectorXd v(adj.cols());
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
      const Eigen::VectorXd phi = adj * v;
      const auto report = oracle::root_n_range_member(j, 1, phi, kind);
      CHECK(report.root_n_range_member);
      CHECK(report.functional_identified);
    }
  }
}

TEST_CASE("identification agrees with brute force on randomized joints") {
  int checked = 0;
  const int dims[4][4] = {{2, 1, 2, 3}, {2, 1, 3, 2}, {3, 1, 3, 3}, {2, 2, 2, 3}};
  Rng rng(17);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto& d = dims[s % 4];
    const auto j = random_joint(1000 + s, d[0], d[1], d[2], d[3], 2);
    const int arm = static_cast<int>(s % 2);
    oracle::AffineSolutionSet set;
    try {
      set = oracle::bridge_solution_set(j, arm, BridgeKind::outcome);
    } catch (const no_bridge_error&) {
      continue;  // legitimate outcome for cw < cu draws
    }
    const Eigen::MatrixXd adj = adjoint_matrix(set);
    for (int t = 0; t < 6; ++t) {
      Eigen::VectorXd phi(set.particular.size());
      if (t == 0 && set.dim > 0) {
        phi = set.null_basis.col(0);
      } else if (t == 1) {
        Eigen::VectorXd v(adj.cols());
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
        phi = adj * v;
      } else {
        for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = rng.normal();
      }
      const auto report = oracle::root_n_range_member(j, arm, phi, BridgeKind::outcome);
      CHECK(report.functional_identified == brute_identified(set, phi));
      CHECK(report.root_n_range_member == testing::in_column_space(adj, phi, 1e-9));
      if (report.root_n_range_member) CHECK(report.functional_identified);
      ++checked;
    }
  }
  CHECK(checked >= 200);
}

TEST_CASE("identification depends only on the null space, not the particular solution") {
  // same proxies, different outcome: the solution set shifts but the kernel
  // and hence identification stay fixed
  auto j = random_joint(41, 2, 1, 2, 3, 2);
  auto j2 = j;
  for (int u = 0; u < 2; ++u)
    for (int a = 0; a < 2; ++a)
      for (int z = 0; z < 2; ++z)
        for (int w = 0; w < 3; ++w) {
          const double mass = j.at(u, 0, a, z, w, 0) + j.at(u, 0, a, z, w, 1);
          j2.at(u, 0, a, z, w, 0) = mass * (0.2 + 0.35 * u);
          j2.at(u, 0, a, z, w, 1) = mass * (0.8 - 0.35 * u);
        }
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd phi(3);
    for (int i = 0; i < 3; ++i) phi(i) = rng.normal();
    CHECK(oracle::functional_identified(j, 1, phi, BridgeKind::outcome) ==
          oracle::functional_identified(j2, 1, phi, BridgeKind::outcome));
  }
}

TEST_CASE("set membership gives zero directed distance") {
  const auto spec = sim::nonunique_preset();
  const auto set = oracle::bridge_solution_set(spec.joint, 1, BridgeKind::outcome);
  Rng rng(9);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd member =
        set.particular + (rng.uniform() * 6 - 3) * set.null_basis.col(0);
    CHECK(oracle::directed_distance(member, set, oracle::SetMetric::weighted).value <
          1e-9);
    CHECK(oracle::directed_distance(member, set, oracle::SetMetric::sup).value < 1e-9);
  }
}

TEST_CASE("singleton set distance is the plain norm") {
  const auto j = random_joint(19, 2, 1, 2, 2, 2);
  const auto set = oracle::bridge_solution_set(j, 1, BridgeKind::outcome);
  REQUIRE(set.dim == 0);
  Eigen::VectorXd point = set.particular;
  point(0) += 0.3;
  point(1) -= 0.1;
  const Eigen::VectorXd r = point - set.particular;
  CHECK(oracle::directed_distance(point, set, oracle::SetMetric::sup).value ==
        doctest::Approx(r.cwiseAbs().maxCoeff()).epsilon(1e-12));
  const double expected_w = std::sqrt(r.dot(set.weight() * r));
  CHECK(oracle::directed_distance(point, set, oracle::SetMetric::weighted).value ==
        doctest::Approx(expected_w).epsilon(1e-10));
}

TEST_CASE("null directions have zero weighted length") {
  const auto spec = sim::nonunique_preset();
  const auto set = oracle::bridge_solution_set(spec.joint, 0, BridgeKind::outcome);
  const Eigen::VectorXd point = set.particular + 2.0 * set.null_basis.col(0);
  CHECK(oracle::directed_distance(point, set, oracle::SetMetric::weighted).value < 1e-10);
}

TEST_CASE("sup distance matches a dense one-dimensional scan") {
  const auto spec = sim::nonunique_preset();
  const auto set = oracle::bridge_solution_set(spec.joint, 1, BridgeKind::outcome);
  REQUIRE(set.dim == 1);
  Eigen::VectorXd point = set.particular;
  point(0) += 0.7;
  point(2) -= 0.4;
  double best = 1e300;
  const Eigen::VectorXd r = point - set.particular;
  for (int i = 0; i <= 400000; ++i) {
    const double t = -4.0 + 8.0 * i / 400000.0;
    best = std::min(best, (r - t * set.null_basis.col(0)).cwiseAbs().maxCoeff());
  }
  const double got = oracle::directed_distance(point, set, oracle::SetMetric::sup).value;
  CHECK(got == doctest::Approx(best).epsilon(1e-3));
}

TEST_CASE("plug-in functional is invariant over the outcome solution set") {
  const auto spec = sim::nonunique_preset();
  for (int arm = 0; arm < 2; ++arm) {
    const double mu = oracle::true_counterfactual_mean(spec.joint, arm);
    const auto set = oracle::bridge_solution_set(spec.joint, arm, BridgeKind::outcome);
    Rng rng(100 + arm);
    for (int t = 0; t < 120; ++t) {
      Eigen::VectorXd member = set.particular;
      for (int c = 0; c < set.dim; ++c)
        member += (rng.uniform() * 8 - 4) * set.null_basis.col(c);
      CHECK(oracle::outcome_plugin_functional(spec.joint, member) ==
            doctest::Approx(mu).epsilon(1e-8));
    }
  }
}

TEST_CASE("treatment functional is invariant over the treatment solution set") {
  // swapped cardinalities so the treatment-side kernel is nontrivial
  oracle::DiscreteJoint j;
  j.card_u = 2; j.card_x = 1; j.card_z = 3; j.card_w = 2; j.card_y = 2;
  j.prob.assign(j.cell_count(), 0.0);
  const double pz_u[2][3] = {{0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}};
  for (int u = 0; u < 2; ++u)
    for (int a = 0; a < 2; ++a)
      for (int z = 0; z < 3; ++z)
        for (int w = 0; w < 2; ++w)
          for (int y = 0; y < 2; ++y) {
            const double pw = w == 1 ? 0.25 + 0.5 * u : 0.75 - 0.5 * u;
            const double pa = a == 1 ? 0.35 + 0.3 * u : 0.65 - 0.3 * u;
            const double py1 = 0.2 + 0.3 * a + 0.3 * u;
            j.at(u, 0, a, z, w, y) =
                0.5 * pz_u[u][z] * pw * pa * (y == 1 ? py1 : 1.0 - py1);
          }
  for (int arm = 0; arm < 2; ++arm) {
    const double mu = oracle::true_counterfactual_mean(j, arm);
    const auto set = oracle::bridge_solution_set(j, arm, BridgeKind::treatment);
    REQUIRE(set.dim >= 1);
    Rng rng(7 + arm);
    for (int t = 0; t < 120; ++t) {
      Eigen::VectorXd member = set.particular;
      for (int c = 0; c < set.dim; ++c)
        member += (rng.uniform() * 8 - 4) * set.null_basis.col(c);
      CHECK(oracle::treatment_bridge_functional(j, arm, member) ==
            doctest::Approx(mu).epsilon(1e-8));
    }
  }
}

TEST_CASE("min weighted-norm element beats random members") {
  const auto spec = sim::nonunique_preset();
  const auto set = oracle::bridge_solution_set(spec.joint, 1, BridgeKind::outcome);
  const Eigen::VectorXd h0 = oracle::min_weighted_norm_element(set, set.col_weight);
  CHECK((set.system * h0 - set.rhs).cwiseAbs().maxCoeff() < 1e-9);
  const auto norm_sq = [&](const Eigen::VectorXd& v) {
    return v.cwiseProduct(set.col_weight).dot(v);
  };
  Rng rng(15);
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd member =
        set.particular + (rng.uniform() * 6 - 3) * set.null_basis.col(0);
    CHECK(norm_sq(h0) <= norm_sq(member) + 1e-12);
  }
}

TEST_CASE("JSON round trip preserves the joint") {
  const auto spec = sim::nonunique_preset();
  const std::string text = spec.joint.to_json();
  const auto back = oracle::DiscreteJoint::from_json(text);
  CHECK(back.card_w == spec.joint.card_w);
  CHECK(back.card_z == spec.joint.card_z);
  REQUIRE(back.prob.size() == spec.joint.prob.size());
  for (std::size_t i = 0; i < back.prob.size(); ++i)
    CHECK(back.prob[i] == spec.joint.prob[i]);

  CHECK_THROWS_AS(oracle::DiscreteJoint::from_json("{not json"), data_error);
  CHECK_THROWS_AS(oracle::DiscreteJoint::from_json("{\"dims\":{}}"), data_error);
}

TEST_CASE("tensor validation rejects bad distributions") {
  auto j = random_joint(2, 2, 1, 2, 2, 2);
  j.prob[0] += 0.5;  // breaks the sum
  CHECK_THROWS_AS(j.validate(), data_error);
  auto k = random_joint(2, 2, 1, 2, 2, 2);
  k.prob[3] = -k.prob[3];
  CHECK_THROWS_AS(k.validate(), data_error);
}

TEST_SUITE_END();
