#include "proxbridge/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "proxbridge/errors.hpp"
#include "proxbridge/inference.hpp"
#include "proxbridge/rng.hpp"
#include "proxbridge/sieve_fit.hpp"

namespace proxbridge::sim {

namespace {

double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

}  // namespace

void LinearGaussianSpec::validate() const {
  if (x_dim < 0) throw config_error("x_dim must be nonnegative");
  if (static_cast<int>(ax.size()) != x_dim || static_cast<int>(yx.size()) != x_dim)
    throw config_error("ax/yx coefficient lists must have length x_dim");
  if (sigma_z < 0.0 || sigma_w < 0.0 || sigma_y < 0.0)
    throw config_error("noise scales must be nonnegative");
  if (std::abs(wu) <= 1e-12 && (yu != 0.0 || yau != 0.0))
    throw config_error(
        "no linear outcome bridge: wu = 0 while U enters the outcome equation");

  // positivity over u in [-3, 3] and the covariate-cube corners
  const long corners = x_dim > 0 ? (1L << x_dim) : 1;
  for (double u : {-3.0, 3.0}) {
    for (long mask = 0; mask < corners; ++mask) {
      double t = a0 + au * u;
      for (int j = 0; j < x_dim; ++j) t += ax[j] * ((mask >> j) & 1);
      const double pa = expit(t);
      if (pa <= 0.05 || pa >= 0.95)
        throw config_error("positivity violated over the 6-sigma latent range: "
                           "P(A=1|U,X) = " + std::to_string(pa));
    }
  }
}

double LinearGaussianSpec::true_mu(int arm) const {
  double mu = y0 + ya * arm;  // E[U] = 0, E[X_j] = 1/2
  for (double c : yx) mu += 0.5 * c;
  return mu;
}

double LinearGaussianSpec::bridge_beta(int arm) const {
  if (std::abs(wu) <= 1e-12) return 0.0;
  return (yu + yau * arm) / wu;
}

double LinearGaussianSpec::bridge_alpha(int arm) const {
  return y0 + ya * arm - bridge_beta(arm) * w0;
}

double DgpSpec::true_mu(int arm) const {
  return kind == Kind::discrete ? oracle::true_counterfactual_mean(joint, arm)
                                : lg.true_mu(arm);
}

void DgpSpec::validate() const {
  if (kind == Kind::discrete)
    joint.validate();
  else
    lg.validate();
}

DgpSpec nonunique_preset() {
  oracle::DiscreteJoint j;
  j.card_u = 2;
  j.card_x = 1;
  j.card_a = 2;
  j.card_z = 2;
  j.card_w = 3;
  j.card_y = 2;
  j.prob.assign(j.cell_count(), 0.0);

  const double p_u[2] = {0.5, 0.5};
  const double p_z1_u[2] = {0.3, 0.8};
  const double p_a1_u[2] = {0.3, 0.7};
  const double p_w_u[2][3] = {{0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}};
  const double p_y1_au[2][2] = {{0.2, 0.5}, {0.4, 0.8}};  // [a][u]

  for (int u = 0; u < 2; ++u)
    for (int a = 0; a < 2; ++a)
      for (int z = 0; z < 2; ++z)
        for (int w = 0; w < 3; ++w)
          for (int y = 0; y < 2; ++y) {
            const double pz = z == 1 ? p_z1_u[u] : 1.0 - p_z1_u[u];
            const double pa = a == 1 ? p_a1_u[u] : 1.0 - p_a1_u[u];
            const double py = y == 1 ? p_y1_au[a][u] : 1.0 - p_y1_au[a][u];
            j.at(u, 0, a, z, w, y) = p_u[u] * pz * pa * p_w_u[u][w] * py;
          }

  DgpSpec spec;
  spec.kind = DgpSpec::Kind::discrete;
  spec.joint = std::move(j);
  return spec;
}

DgpSpec no_confounding_preset() {
  DgpSpec spec;
  spec.kind = DgpSpec::Kind::linear_gaussian;
  spec.lg.z0 = 0.0; spec.lg.zu = 0.8; spec.lg.sigma_z = 0.6;
  spec.lg.w0 = 0.0; spec.lg.wu = 0.8; spec.lg.sigma_w = 0.6;
  spec.lg.a0 = -0.2; spec.lg.au = 0.0;
  spec.lg.y0 = 0.3; spec.lg.ya = 0.5; spec.lg.yu = 0.0; spec.lg.yau = 0.0;
  spec.lg.sigma_y = 0.5;
  spec.lg.x_dim = 0;
  return spec;
}

DgpSpec linear_gaussian_preset() {
  DgpSpec spec;
  spec.kind = DgpSpec::Kind::linear_gaussian;
  spec.lg.z0 = 0.0; spec.lg.zu = 0.9; spec.lg.sigma_z = 0.5;
  spec.lg.w0 = 0.2; spec.lg.wu = 0.8; spec.lg.sigma_w = 0.5;
  spec.lg.a0 = -0.1; spec.lg.au = 0.6;
  spec.lg.y0 = 0.3; spec.lg.ya = 0.5; spec.lg.yu = 0.7; spec.lg.yau = 0.0;
  spec.lg.sigma_y = 0.5;
  spec.lg.x_dim = 0;
  return spec;
}

Dataset sample_discrete(const oracle::DiscreteJoint& joint, long n, std::uint64_t seed) {
  joint.validate();
  std::vector<double> cumulative(joint.cell_count());
  double acc = 0.0;
  for (std::size_t i = 0; i < joint.prob.size(); ++i) {
    acc += joint.prob[i];
    cumulative[i] = acc;
  }
  cumulative.back() = 1.0;

  Dataset data;
  data.y.resize(n);
  data.a.resize(n);
  data.z.resize(n);
  data.w.resize(n);
  const bool has_x = joint.card_x > 1;
  data.x.resize(n, has_x ? 1 : 0);

  Rng rng(seed);
  for (long i = 0; i < n; ++i) {
    std::size_t cell = rng.categorical(cumulative);
    const int y = static_cast<int>(cell % joint.card_y); cell /= joint.card_y;
    const int w = static_cast<int>(cell % joint.card_w); cell /= joint.card_w;
    const int z = static_cast<int>(cell % joint.card_z); cell /= joint.card_z;
    const int a = static_cast<int>(cell % joint.card_a); cell /= joint.card_a;
    const int x = static_cast<int>(cell % joint.card_x);
    // u = cell / card_x is the latent confounder; dropped
    data.y(i) = y;
    data.a(i) = a;
    data.z(i) = z;
    data.w(i) = w;
    if (has_x) data.x(i, 0) = x;
  }
  return data;
}

Dataset sample_linear_gaussian(const LinearGaussianSpec& spec, long n, std::uint64_t seed,
                               double* reject_fraction) {
  spec.validate();
  const double z_sd = std::sqrt(spec.zu * spec.zu + spec.sigma_z * spec.sigma_z);
  const double w_sd = std::sqrt(spec.wu * spec.wu + spec.sigma_w * spec.sigma_w);
  double y_center = spec.y0 + spec.ya / 2.0;
  double y_half = std::abs(spec.ya) / 2.0;
  for (double c : spec.yx) {
    y_center += 0.5 * c;
    y_half += 0.5 * std::abs(c);
  }
  const double y_sd_max =
      std::sqrt(std::max((spec.yu) * (spec.yu), (spec.yu + spec.yau) * (spec.yu + spec.yau)) +
                spec.sigma_y * spec.sigma_y);

  Dataset data;
  data.y.resize(n);
  data.a.resize(n);
  data.z.resize(n);
  data.w.resize(n);
  data.x.resize(n, spec.x_dim);

  Rng rng(seed);
  long rejected = 0;
  const long max_attempts = 50 * std::max(n, 1L) + 100;
  long attempts = 0;
  for (long i = 0; i < n;) {
    if (++attempts > max_attempts)
      throw numeric_error("linear-Gaussian sampler exceeded the attempt budget");
    const double u = rng.normal();
    std::vector<double> x(spec.x_dim);
    for (int j = 0; j < spec.x_dim; ++j) x[j] = rng.uniform();
    const double z = spec.z0 + spec.zu * u + spec.sigma_z * rng.normal();
    const double w = spec.w0 + spec.wu * u + spec.sigma_w * rng.normal();
    double t = spec.a0 + spec.au * u;
    for (int j = 0; j < spec.x_dim; ++j) t += spec.ax[j] * x[j];
    const int a = rng.bernoulli(expit(t));
    double y = spec.y0 + spec.ya * a + (spec.yu + spec.yau * a) * u +
               spec.sigma_y * rng.normal();
    for (int j = 0; j < spec.x_dim; ++j) y += spec.yx[j] * x[j];

    // fixed 4-sigma truncation boxes keep supports compact
    if (std::abs(z - spec.z0) > 4.0 * z_sd || std::abs(w - spec.w0) > 4.0 * w_sd ||
        std::abs(y - y_center) > y_half + 4.0 * y_sd_max) {
      ++rejected;
      continue;
    }
    data.y(i) = y;
    data.a(i) = a;
    data.z(i) = z;
    data.w(i) = w;
    for (int j = 0; j < spec.x_dim; ++j) data.x(i, j) = x[j];
    ++i;
  }
  const double fraction =
      attempts > 0 ? static_cast<double>(rejected) / static_cast<double>(attempts) : 0.0;
  if (reject_fraction) *reject_fraction = fraction;
  if (fraction > 0.05)
    throw config_error("truncation fraction " + std::to_string(fraction) +
                       " exceeds 5%; the spec is too wild for the compact regime");
  return data;
}

void McConfig::validate() const {
  dgp.validate();
  if (replications < 2) throw config_error("replications must be >= 2");
  if (n_ladder.empty()) throw config_error("n_ladder must be nonempty");
  for (std::size_t i = 0; i + 1 < n_ladder.size(); ++i)
    if (n_ladder[i] >= n_ladder[i + 1])
      throw config_error("n_ladder must be strictly increasing");
  if (n_ladder.front() < 2) throw config_error("sample sizes must be >= 2");
  if (jobs < 1) throw config_error("jobs must be >= 1");
}

namespace {

struct OracleSide {
  oracle::AffineSolutionSet set;
  Eigen::VectorXd min_m_element;
  double mu = 0.0;
};

// Arm block of the sieve coefficients mapped onto the oracle (w, x) grid;
// requires the saturated indicator levels to match the joint's cardinalities.
Eigen::VectorXd arm_block_on_grid(const Eigen::VectorXd& beta, const SieveContext& ctx,
                                  int arm, const oracle::DiscreteJoint& joint) {
  const auto& vars = ctx.psi_basis.vars;
  if (!ctx.psi_basis.saturated() || !ctx.psi_basis.per_arm)
    throw data_error("oracle set distance needs a saturated per-arm bridge basis");
  if (vars[0].count != joint.card_w ||
      (joint.card_x > 1 && (vars.size() < 2 || vars[1].count != joint.card_x)))
    throw data_error("sample is missing discrete levels; cannot map onto the oracle grid");
  for (int j = 0; j < vars[0].count; ++j)
    if (std::abs(vars[0].levels[j] - j) > 1e-9)
      throw data_error("bridge levels do not match the oracle grid");
  return beta.segment(ctx.psi_basis.arm_offset(arm), ctx.psi_basis.tensor_count);
}

}  // namespace

McResult run_monte_carlo(const McConfig& config) {
  config.validate();

  const bool discrete = config.dgp.kind == DgpSpec::Kind::discrete;
  double mu_true[2] = {config.dgp.true_mu(0), config.dgp.true_mu(1)};
  std::vector<OracleSide> oracle_sides;
  if (discrete) {
    for (int arm = 0; arm < 2; ++arm) {
      OracleSide side;
      side.set = oracle::bridge_solution_set(config.dgp.joint, arm,
                                             oracle::BridgeKind::outcome);
      side.min_m_element = oracle::min_weighted_norm_element(side.set, side.set.col_weight);
      side.mu = mu_true[arm];
      oracle_sides.push_back(std::move(side));
    }
  }

  const std::size_t ladder = config.n_ladder.size();
  const auto reps = static_cast<std::size_t>(config.replications);
  McResult result;
  result.rows.resize(ladder * reps * 2);

  auto run_one = [&](std::size_t ni, std::size_t r) {
    const long n = config.n_ladder[ni];
    const std::uint64_t rep_seed =
        derive_seed(config.seed, static_cast<std::uint64_t>(n), r);
    ReplicateRow base;
    base.n = n;
    base.rep = static_cast<int>(r);
    try {
      Dataset data = discrete
                         ? sample_discrete(config.dgp.joint, n, rep_seed)
                         : sample_linear_gaussian(config.dgp.lg, n, rep_seed);
      const basis::BasisSpec spec =
          config.auto_basis ? basis::default_spec(data) : config.basis;
      const SieveContext ctx = make_context(std::move(data), spec);
      for (int arm = 0; arm < 2; ++arm) {
        ReplicateRow row = base;
        row.arm = arm;
        const auto est = inference::estimate_arm(ctx, arm, config.kappa, config.level);
        row.mu_true = mu_true[arm];
        row.mu_plugin = est.report.mu_plugin;
        row.mu_db = est.report.mu_debiased;
        row.sigma2 = est.report.sigma2;
        row.ci_low = est.report.ci_low;
        row.ci_high = est.report.ci_high;
        row.covered = row.ci_low <= row.mu_true && row.mu_true <= row.ci_high;
        row.c_n = est.report.c_n;
        const auto flags = est.report.flag_list();
        for (std::size_t f = 0; f < flags.size(); ++f)
          row.flags += (f == 0 ? "" : "|") + flags[f];
        if (discrete) {
          const Eigen::VectorXd grid =
              arm_block_on_grid(est.h_beta, ctx, arm, config.dgp.joint);
          row.set_dist = oracle::directed_distance(grid, oracle_sides[arm].set,
                                                   oracle::SetMetric::weighted)
                             .value;
          row.sup_dist_min_norm =
              (grid - oracle_sides[arm].min_m_element).cwiseAbs().maxCoeff();
          row.has_oracle_dist = true;
        }
        result.rows[(ni * reps + r) * 2 + arm] = std::move(row);
      }
    } catch (const std::exception& e) {
      for (int arm = 0; arm < 2; ++arm) {
        ReplicateRow row = base;
        row.arm = arm;
        row.failed = true;
        row.error = e.what();
        result.rows[(ni * reps + r) * 2 + arm] = std::move(row);
      }
    }
  };

  const std::size_t total = ladder * reps;
  if (config.jobs <= 1) {
    for (std::size_t t = 0; t < total; ++t) run_one(t / reps, t % reps);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t t = next.fetch_add(1);
        if (t >= total) return;
        run_one(t / reps, t % reps);
      }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < config.jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // deterministic reduction in (n, arm) order
  for (std::size_t ni = 0; ni < ladder; ++ni)
    for (int arm = 0; arm < 2; ++arm) {
      McAggregate agg;
      agg.n = config.n_ladder[ni];
      agg.arm = arm;
      std::vector<double> err_plugin, err_db, set_dists, sup_dists;
      double cover_sum = 0.0, c_n_sum = 0.0, set_sum = 0.0;
      int with_dist = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const ReplicateRow& row = result.rows[(ni * reps + r) * 2 + arm];
        if (row.failed) {
          ++agg.failures;
          continue;
        }
        ++agg.used;
        err_plugin.push_back(row.mu_plugin - row.mu_true);
        err_db.push_back(row.mu_db - row.mu_true);
        cover_sum += row.covered ? 1.0 : 0.0;
        c_n_sum += row.c_n;
        if (row.has_oracle_dist) {
          ++with_dist;
          set_sum += row.set_dist;
          set_dists.push_back(row.set_dist);
          sup_dists.push_back(row.sup_dist_min_norm);
        }
      }
      auto moments = [](const std::vector<double>& e, double& bias, double& sd,
                        double& rmse) {
        if (e.empty()) {
          bias = sd = rmse = std::numeric_limits<double>::quiet_NaN();
          return;
        }
        double m = 0.0, sq = 0.0;
        for (double v : e) m += v;
        m /= static_cast<double>(e.size());
        for (double v : e) sq += (v - m) * (v - m);
        sq /= static_cast<double>(e.size());
        bias = m;
        sd = std::sqrt(sq);
        rmse = std::sqrt(m * m + sq);
      };
      moments(err_plugin, agg.bias_plugin, agg.sd_plugin, agg.rmse_plugin);
      moments(err_db, agg.bias_debiased, agg.sd_debiased, agg.rmse_debiased);
      agg.coverage = agg.used > 0 ? cover_sum / agg.used : 0.0;
      agg.mean_c_n = agg.used > 0 ? c_n_sum / agg.used
                                  : std::numeric_limits<double>::quiet_NaN();
      agg.mean_set_dist = with_dist > 0 ? set_sum / with_dist
                                        : std::numeric_limits<double>::quiet_NaN();
      agg.median_set_dist = median_of(set_dists);
      agg.median_sup_dist = median_of(sup_dists);
      result.aggregates.push_back(agg);
    }
  return result;
}

}  // namespace proxbridge::sim
