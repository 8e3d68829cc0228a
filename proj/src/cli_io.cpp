#include "proxbridge/cli_io.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "proxbridge/errors.hpp"
#include "proxbridge/inference.hpp"
#include "proxbridge/rng.hpp"
#include "proxbridge/sieve_fit.hpp"
#include "proxbridge/text.hpp"

namespace proxbridge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "seed", "out_dir", "level", "kappa", "jobs",
      "basis.auto", "basis.family", "basis.per_arm", "basis.saturate_discrete",
      "basis.max_discrete_levels", "basis.bridge_degrees", "basis.instrument_degrees",
      "dataset.path",
      "dgp.preset", "dgp.joint_json", "dgp.kind",
      "dgp.lg.z0", "dgp.lg.zu", "dgp.lg.sigma_z",
      "dgp.lg.w0", "dgp.lg.wu", "dgp.lg.sigma_w",
      "dgp.lg.a0", "dgp.lg.au", "dgp.lg.ax",
      "dgp.lg.y0", "dgp.lg.ya", "dgp.lg.yu", "dgp.lg.yau", "dgp.lg.yx",
      "dgp.lg.sigma_y", "dgp.lg.x_dim",
      "simulate.n",
      "mc.n_ladder", "mc.replications",
      "oracle.members",
  };
  return keys;
}

void set_checked(RunConfig& config, const std::string& key, const std::string& value,
                 const std::string& origin) {
  if (known_keys().count(key) == 0)
    throw config_error("unknown configuration key '" + key + "' (" + origin + ")");
  config.values[key] = trim(value);
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw data_error("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) {
  auto it = values.find(key);
  if (it == values.end()) {
    values[key] = fallback;
    return fallback;
  }
  return it->second;
}

double RunConfig::get_double(const std::string& key, double fallback, double lo,
                             double hi) {
  auto it = values.find(key);
  if (it == values.end()) {
    values[key] = format_double(fallback);
    return fallback;
  }
  const auto parsed = parse_double(it->second);
  if (!parsed) throw config_error("key '" + key + "' is not numeric: " + it->second);
  if (*parsed < lo || *parsed > hi)
    throw config_error("key '" + key + "' = " + it->second + " outside [" +
                       format_double(lo) + ", " + format_double(hi) + "]");
  return *parsed;
}

long RunConfig::get_long(const std::string& key, long fallback, long lo, long hi) {
  auto it = values.find(key);
  if (it == values.end()) {
    values[key] = std::to_string(fallback);
    return fallback;
  }
  const auto parsed = parse_long(it->second);
  if (!parsed) throw config_error("key '" + key + "' is not an integer: " + it->second);
  if (*parsed < lo || *parsed > hi)
    throw config_error("key '" + key + "' = " + it->second + " outside [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return *parsed;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) {
  auto it = values.find(key);
  if (it == values.end()) {
    values[key] = fallback ? "true" : "false";
    return fallback;
  }
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw config_error("key '" + key + "' must be true/false: " + it->second);
}

std::vector<long> RunConfig::get_long_list(const std::string& key,
                                           const std::string& fallback) {
  const std::string raw = get_string(key, fallback);
  std::vector<long> out;
  for (const auto& tok : split(raw, ',')) {
    const auto parsed = parse_long(tok);
    if (!parsed)
      throw config_error("key '" + key + "' must be a comma list of integers: " + raw);
    out.push_back(*parsed);
  }
  return out;
}

std::vector<int> RunConfig::get_int_list(const std::string& key,
                                         const std::string& fallback) {
  std::vector<int> out;
  for (long v : get_long_list(key, fallback)) out.push_back(static_cast<int>(v));
  return out;
}

RunConfig parse_config(const std::string& command, const std::string& config_path,
                       const std::vector<std::string>& overrides) {
  RunConfig config;
  config.command = command;

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw config_error("config file '" + config_path + "' does not exist");
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw config_error("malformed line " + std::to_string(line_no) + " in '" +
                           config_path + "': expected key = value");
      set_checked(config, trim(t.substr(0, eq)), t.substr(eq + 1),
                  config_path + ":" + std::to_string(line_no));
    }
  }

  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw config_error("override '" + item + "' must have the form key=value");
    set_checked(config, trim(item.substr(0, eq)), item.substr(eq + 1), "command line");
  }

  if (config.values.find("seed") == config.values.end()) {
    if (const char* env = std::getenv("PROXBRIDGE_SEED")) config.values["seed"] = env;
  }
  return config;
}

Dataset load_dataset(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw data_error("dataset file '" + path + "' does not exist");

  std::string line;
  std::vector<std::string> header;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    for (auto& tok : split(t, ',')) header.push_back(trim(tok));
    break;
  }
  if (header.empty()) throw data_error("dataset '" + path + "' has no header row");

  int col_y = -1, col_a = -1, col_z = -1, col_w = -1;
  std::vector<std::pair<int, int>> x_cols;  // (x index, column position)
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "y") col_y = static_cast<int>(c);
    else if (name == "a") col_a = static_cast<int>(c);
    else if (name == "z") col_z = static_cast<int>(c);
    else if (name == "w") col_w = static_cast<int>(c);
    else if (name.size() >= 2 && name[0] == 'x') {
      const auto idx = parse_long(name.substr(1));
      if (idx && *idx >= 1)
        x_cols.push_back({static_cast<int>(*idx), static_cast<int>(c)});
      else if (warnings)
        warnings->push_back("ignoring column '" + name + "'");
    } else if (warnings) {
      warnings->push_back("ignoring column '" + name + "'");
    }
  }
  if (col_y < 0 || col_a < 0 || col_z < 0 || col_w < 0)
    throw data_error("dataset '" + path + "' must have columns y, a, z, w");
  std::sort(x_cols.begin(), x_cols.end());
  for (std::size_t i = 0; i < x_cols.size(); ++i)
    if (x_cols[i].first != static_cast<int>(i) + 1)
      throw data_error("covariate columns must be named x1..xd without gaps");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto toks = split(t, ',');
    if (toks.size() != header.size())
      throw data_error("row " + std::to_string(line_no) + " has " +
                       std::to_string(toks.size()) + " fields, header has " +
                       std::to_string(header.size()));
    std::vector<double> vals(toks.size());
    for (std::size_t c = 0; c < toks.size(); ++c) {
      const auto parsed = parse_double(toks[c]);
      if (!parsed)
        throw data_error("non-numeric cell at row " + std::to_string(line_no) +
                         ", column '" + header[c] + "': " + trim(toks[c]));
      vals[c] = *parsed;
    }
    rows.push_back(std::move(vals));
  }

  const long n = static_cast<long>(rows.size());
  Dataset data;
  data.y.resize(n);
  data.a.resize(n);
  data.z.resize(n);
  data.w.resize(n);
  data.x.resize(n, static_cast<long>(x_cols.size()));
  for (long i = 0; i < n; ++i) {
    data.y(i) = rows[i][col_y];
    const double a_raw = rows[i][col_a];
    if (a_raw != 0.0 && a_raw != 1.0)
      throw data_error("treatment must be 0 or 1; found " + format_double(a_raw) +
                       " at data row " + std::to_string(i + 1));
    data.a(i) = static_cast<int>(a_raw);
    data.z(i) = rows[i][col_z];
    data.w(i) = rows[i][col_w];
    for (std::size_t j = 0; j < x_cols.size(); ++j)
      data.x(i, static_cast<long>(j)) = rows[i][x_cols[j].second];
  }
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::map<std::string, std::string>& config_echo) {
  std::ostringstream out;
  for (const auto& [k, v] : config_echo) out << "# " << k << " = " << v << "\n";
  out << "y,a,z,w";
  for (Eigen::Index j = 0; j < data.x_dim(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << format_double(data.y(i)) << "," << data.a(i) << "," << format_double(data.z(i))
        << "," << format_double(data.w(i));
    for (Eigen::Index j = 0; j < data.x_dim(); ++j)
      out << "," << format_double(data.x(i, j));
    out << "\n";
  }
  write_text_file(path, out.str());
}

basis::BasisSpec basis_spec_from_config(RunConfig& config, const Dataset& data) {
  const bool auto_basis = config.get_bool("basis.auto", true);
  basis::BasisSpec spec = basis::default_spec(data);
  if (!auto_basis) {
    const int n_vars = 1 + static_cast<int>(data.x_dim());
    std::string fallback;
    for (int v = 0; v < n_vars; ++v) fallback += (v ? "," : "") + std::to_string(2);
    spec.bridge_degrees = config.get_int_list("basis.bridge_degrees", fallback);
    spec.instrument_degrees = config.get_int_list("basis.instrument_degrees", fallback);
  } else {
    std::string bd, id;
    for (std::size_t v = 0; v < spec.bridge_degrees.size(); ++v)
      bd += (v ? "," : "") + std::to_string(spec.bridge_degrees[v]);
    for (std::size_t v = 0; v < spec.instrument_degrees.size(); ++v)
      id += (v ? "," : "") + std::to_string(spec.instrument_degrees[v]);
    config.values["basis.bridge_degrees"] = bd;
    config.values["basis.instrument_degrees"] = id;
  }
  const std::string family = config.get_string("basis.family", "polynomial");
  if (family == "polynomial") spec.family = basis::BasisFamily::polynomial;
  else if (family == "bspline") spec.family = basis::BasisFamily::bspline;
  else throw config_error("basis.family must be polynomial or bspline");
  spec.per_arm = config.get_bool("basis.per_arm", true);
  spec.saturate_discrete = config.get_bool("basis.saturate_discrete", true);
  spec.max_discrete_levels = static_cast<int>(
      config.get_long("basis.max_discrete_levels", 12, 2, 1000));
  return spec;
}

sim::DgpSpec dgp_from_config(RunConfig& config) {
  sim::DgpSpec spec;
  if (config.has("dgp.joint_json")) {
    spec.kind = sim::DgpSpec::Kind::discrete;
    spec.joint = oracle::DiscreteJoint::from_json(
        read_text_file(config.values.at("dgp.joint_json")));
    config.values["dgp.kind"] = "discrete";
    return spec;
  }

  const std::string preset = config.get_string("dgp.preset", "");
  if (preset == "nonunique") {
    spec = sim::nonunique_preset();
  } else if (preset == "no_confounding") {
    spec = sim::no_confounding_preset();
  } else if (preset == "linear_gaussian") {
    spec = sim::linear_gaussian_preset();
  } else if (!preset.empty()) {
    throw config_error("unknown dgp.preset '" + preset +
                       "' (expected nonunique, no_confounding, or linear_gaussian)");
  } else {
    const std::string kind = config.get_string("dgp.kind", "");
    if (kind == "linear_gaussian") spec.kind = sim::DgpSpec::Kind::linear_gaussian;
    else if (kind == "discrete")
      throw config_error("discrete dgp needs dgp.preset or dgp.joint_json");
    else
      throw config_error("dgp.preset, dgp.joint_json, or dgp.kind is required");
  }

  if (spec.kind == sim::DgpSpec::Kind::linear_gaussian) {
    sim::LinearGaussianSpec& lg = spec.lg;
    lg.x_dim = static_cast<int>(config.get_long("dgp.lg.x_dim", lg.x_dim, 0, 16));
    auto d = [&](const char* key, double& slot, double lo, double hi) {
      slot = config.get_double(key, slot, lo, hi);
    };
    d("dgp.lg.z0", lg.z0, -1e6, 1e6);
    d("dgp.lg.zu", lg.zu, -1e6, 1e6);
    d("dgp.lg.sigma_z", lg.sigma_z, 0.0, 1e6);
    d("dgp.lg.w0", lg.w0, -1e6, 1e6);
    d("dgp.lg.wu", lg.wu, -1e6, 1e6);
    d("dgp.lg.sigma_w", lg.sigma_w, 0.0, 1e6);
    d("dgp.lg.a0", lg.a0, -1e6, 1e6);
    d("dgp.lg.au", lg.au, -1e6, 1e6);
    d("dgp.lg.y0", lg.y0, -1e6, 1e6);
    d("dgp.lg.ya", lg.ya, -1e6, 1e6);
    d("dgp.lg.yu", lg.yu, -1e6, 1e6);
    d("dgp.lg.yau", lg.yau, -1e6, 1e6);
    d("dgp.lg.sigma_y", lg.sigma_y, 0.0, 1e6);
    auto dlist = [&](const char* key, std::vector<double>& slot) {
      std::string fallback;
      slot.resize(lg.x_dim, 0.0);
      for (int j = 0; j < lg.x_dim; ++j)
        fallback += (j ? "," : "") + format_double(slot[j]);
      const std::string raw = config.get_string(key, fallback);
      if (lg.x_dim == 0) { slot.clear(); return; }
      const auto toks = split(raw, ',');
      if (static_cast<int>(toks.size()) != lg.x_dim)
        throw config_error(std::string("key '") + key + "' needs " +
                           std::to_string(lg.x_dim) + " comma-separated values");
      for (int j = 0; j < lg.x_dim; ++j) {
        const auto parsed = parse_double(toks[j]);
        if (!parsed) throw config_error(std::string("key '") + key + "' is not numeric");
        slot[j] = *parsed;
      }
    };
    dlist("dgp.lg.ax", lg.ax);
    dlist("dgp.lg.yx", lg.yx);
  }
  spec.validate();
  return spec;
}

namespace {

json config_echo_json(const RunConfig& config) {
  json j = json::object();
  for (const auto& [k, v] : config.values) j[k] = v;
  return j;
}

json report_json(const inference::EstimateReport& r) {
  json j;
  j["arm"] = r.arm;
  j["mu_plugin"] = r.mu_plugin;
  j["r_hat_n"] = r.r_hat_n;
  j["mu_debiased"] = r.mu_debiased;
  j["sigma2"] = r.sigma2;
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  j["level"] = r.level;
  j["n"] = r.n;
  j["diagnostics"] = {{"c_min", r.c_min},
                      {"c_n", r.c_n},
                      {"m_value", r.m_value},
                      {"lagrange_multiplier", r.lagrange_multiplier},
                      {"projection_ridge", r.projection_ridge},
                      {"min_gram_eigenvalue", r.min_gram_eigenvalue},
                      {"representer_degenerate", r.representer_degenerate},
                      {"sigma_degenerate", r.sigma_degenerate},
                      {"basis_clamped", r.basis_clamped},
                      {"threshold_degenerate", r.threshold_degenerate},
                      {"small_sample", r.small_sample},
                      {"flags", r.flag_list()}};
  return j;
}

json ate_json(const inference::AteReport& r) {
  return {{"estimate", r.ate}, {"sigma2", r.sigma2}, {"ci_low", r.ci_low},
          {"ci_high", r.ci_high}, {"level", r.level}, {"n", r.n}};
}

std::uint64_t seed_from(RunConfig& config) {
  return static_cast<std::uint64_t>(
      config.get_long("seed", 1, 0, std::numeric_limits<long>::max()));
}

fs::path prepare_out_dir(RunConfig& config) {
  const fs::path dir = config.get_string("out_dir", "proxbridge_out");
  fs::create_directories(dir);
  return dir;
}

int run_estimate(RunConfig& config) {
  seed_from(config);  // echoed for auditability; estimation itself is deterministic
  const std::string path = config.get_string("dataset.path", "");
  if (path.empty()) throw config_error("estimate requires dataset.path");
  std::vector<std::string> warnings;
  Dataset data = load_dataset(path, &warnings);
  for (const auto& wmsg : warnings) std::cerr << "warning: " << wmsg << "\n";

  const double kappa = config.get_double("kappa", 1.0, 0.0, 1e6);
  const double level = config.get_double("level", 0.95, 1e-6, 1.0 - 1e-6);
  const basis::BasisSpec spec = basis_spec_from_config(config, data);
  const fs::path out_dir = prepare_out_dir(config);

  const SieveContext ctx = make_context(std::move(data), spec);
  const auto arm0 = inference::estimate_arm(ctx, 0, kappa, level);
  const auto arm1 = inference::estimate_arm(ctx, 1, kappa, level);
  const auto contrast = inference::ate(arm1, arm0);

  json j;
  j["command"] = "estimate";
  j["config"] = config_echo_json(config);
  j["n"] = ctx.n();
  j["warnings"] = warnings;
  j["arms"] = {report_json(arm0.report), report_json(arm1.report)};
  j["ate"] = ate_json(contrast);
  write_text_file(out_dir / "estimate_report.json", j.dump(2) + "\n");
  std::cout << (out_dir / "estimate_report.json").string() << "\n";
  return 0;
}

int run_simulate(RunConfig& config) {
  const std::uint64_t seed = seed_from(config);
  sim::DgpSpec dgp = dgp_from_config(config);
  const long n = config.get_long("simulate.n", 1000, 0, 100000000);
  const fs::path out_dir = prepare_out_dir(config);

  double reject_fraction = 0.0;
  Dataset data = dgp.kind == sim::DgpSpec::Kind::discrete
                     ? sim::sample_discrete(dgp.joint, n, seed)
                     : sim::sample_linear_gaussian(dgp.lg, n, seed, &reject_fraction);

  write_dataset_csv((out_dir / "dataset.csv").string(), data, config.values);

  json meta;
  meta["command"] = "simulate";
  meta["config"] = config_echo_json(config);
  meta["n"] = n;
  meta["truth"] = {{"mu_0", dgp.true_mu(0)},
                   {"mu_1", dgp.true_mu(1)},
                   {"ate", dgp.true_mu(1) - dgp.true_mu(0)}};
  meta["truncation_fraction"] = reject_fraction;
  write_text_file(out_dir / "simulate_meta.json", meta.dump(2) + "\n");
  std::cout << (out_dir / "dataset.csv").string() << "\n";
  return 0;
}

std::string csv_comment_block(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& [k, v] : config.values) out << "# " << k << " = " << v << "\n";
  return out.str();
}

int run_mc(RunConfig& config) {
  sim::McConfig mc;
  mc.dgp = dgp_from_config(config);
  mc.seed = seed_from(config);
  mc.n_ladder = config.get_long_list("mc.n_ladder", "500,2000,8000");
  mc.replications =
      static_cast<int>(config.get_long("mc.replications", 100, 2, 1000000));
  mc.kappa = config.get_double("kappa", 1.0, 0.0, 1e6);
  mc.level = config.get_double("level", 0.95, 1e-6, 1.0 - 1e-6);
  mc.jobs = static_cast<int>(config.get_long("jobs", 1, 1, 256));
  mc.auto_basis = config.get_bool("basis.auto", true);
  if (!mc.auto_basis) {
    Dataset probe = mc.dgp.kind == sim::DgpSpec::Kind::discrete
                        ? sim::sample_discrete(mc.dgp.joint, 64, mc.seed)
                        : sim::sample_linear_gaussian(mc.dgp.lg, 64, mc.seed);
    mc.basis = basis_spec_from_config(config, probe);
  }
  const fs::path out_dir = prepare_out_dir(config);

  const sim::McResult result = sim::run_monte_carlo(mc);

  std::ostringstream rows;
  rows << csv_comment_block(config);
  rows << "n,r,arm,mu_true,mu_plugin,mu_db,sigma2,ci_low,ci_high,covered,set_dist,c_n,"
          "flags\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : result.rows) {
    if (row.failed) {
      rows << row.n << "," << row.rep << "," << row.arm << ","
           << format_double(nan) << "," << format_double(nan) << ","
           << format_double(nan) << "," << format_double(nan) << ","
           << format_double(nan) << "," << format_double(nan) << ",0,"
           << format_double(nan) << "," << format_double(nan) << ",failed\n";
      continue;
    }
    rows << row.n << "," << row.rep << "," << row.arm << ","
         << format_double(row.mu_true) << "," << format_double(row.mu_plugin) << ","
         << format_double(row.mu_db) << "," << format_double(row.sigma2) << ","
         << format_double(row.ci_low) << "," << format_double(row.ci_high) << ","
         << (row.covered ? 1 : 0) << ","
         << format_double(row.has_oracle_dist ? row.set_dist : nan) << ","
         << format_double(row.c_n) << "," << row.flags << "\n";
  }
  write_text_file(out_dir / "mc_replicates.csv", rows.str());

  std::ostringstream bias;
  bias << csv_comment_block(config);
  bias << "n,arm,bias_plugin,bias_debiased,sd_plugin,sd_debiased,rmse_plugin,"
          "rmse_debiased\n";
  std::ostringstream coverage;
  coverage << csv_comment_block(config);
  coverage << "n,arm,coverage,level\n";
  std::ostringstream dist;
  dist << csv_comment_block(config);
  dist << "n,arm,mean_set_dist,median_set_dist,median_sup_dist\n";
  for (const auto& agg : result.aggregates) {
    bias << agg.n << "," << agg.arm << "," << format_double(agg.bias_plugin) << ","
         << format_double(agg.bias_debiased) << "," << format_double(agg.sd_plugin)
         << "," << format_double(agg.sd_debiased) << ","
         << format_double(agg.rmse_plugin) << "," << format_double(agg.rmse_debiased)
         << "\n";
    coverage << agg.n << "," << agg.arm << "," << format_double(agg.coverage) << ","
             << format_double(mc.level) << "\n";
    dist << agg.n << "," << agg.arm << "," << format_double(agg.mean_set_dist) << ","
         << format_double(agg.median_set_dist) << ","
         << format_double(agg.median_sup_dist) << "\n";
  }
  write_text_file(out_dir / "plot_bias_vs_n.csv", bias.str());
  write_text_file(out_dir / "plot_coverage_vs_n.csv", coverage.str());
  write_text_file(out_dir / "plot_set_distance_vs_n.csv", dist.str());

  json summary;
  summary["command"] = "mc";
  summary["config"] = config_echo_json(config);
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  summary["generated_at_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(now).count();
  json aggs = json::array();
  for (const auto& agg : result.aggregates) {
    aggs.push_back({{"n", agg.n},
                    {"arm", agg.arm},
                    {"used", agg.used},
                    {"failures", agg.failures},
                    {"bias_plugin", agg.bias_plugin},
                    {"bias_debiased", agg.bias_debiased},
                    {"sd_plugin", agg.sd_plugin},
                    {"sd_debiased", agg.sd_debiased},
                    {"rmse_plugin", agg.rmse_plugin},
                    {"rmse_debiased", agg.rmse_debiased},
                    {"coverage", agg.coverage},
                    {"mean_set_dist", agg.mean_set_dist},
                    {"median_set_dist", agg.median_set_dist},
                    {"median_sup_dist", agg.median_sup_dist},
                    {"mean_c_n", agg.mean_c_n}});
  }
  summary["aggregates"] = aggs;
  json failures = json::array();
  for (const auto& row : result.rows)
    if (row.failed && row.arm == 0)
      failures.push_back({{"n", row.n}, {"r", row.rep}, {"error", row.error}});
  summary["failures"] = failures;
  write_text_file(out_dir / "mc_summary.json", summary.dump(2) + "\n");
  std::cout << (out_dir / "mc_summary.json").string() << "\n";
  return 0;
}

json bridge_set_json(const oracle::DiscreteJoint& joint, int arm, oracle::BridgeKind kind,
                     std::uint64_t seed, long members, double mu_true) {
  json j;
  try {
    const auto set = oracle::bridge_solution_set(joint, arm, kind);
    j["exists"] = true;
    j["null_dim"] = set.dim;
    j["particular"] =
        std::vector<double>(set.particular.data(), set.particular.data() + set.particular.size());
    const auto min_m = oracle::min_weighted_norm_element(set, set.col_weight);
    j["min_m_element"] = std::vector<double>(min_m.data(), min_m.data() + min_m.size());

    // functional invariance over random solution-set members
    Rng rng(splitmix64(seed ^ (kind == oracle::BridgeKind::outcome ? 0x6f : 0x74)) + arm);
    double worst = 0.0;
    for (long i = 0; i < members; ++i) {
      Eigen::VectorXd member = set.particular;
      for (int c = 0; c < set.dim; ++c)
        member += (rng.uniform() * 8.0 - 4.0) * set.null_basis.col(c);
      const double value = kind == oracle::BridgeKind::outcome
                               ? oracle::outcome_plugin_functional(joint, member)
                               : oracle::treatment_bridge_functional(joint, arm, member);
      worst = std::max(worst, std::abs(value - mu_true));
    }
    j["set_invariance"] = {{"members", members}, {"max_abs_deviation", worst}};
  } catch (const no_bridge_error& e) {
    j["exists"] = false;
    j["message"] = e.what();
  }
  return j;
}

int run_oracle(RunConfig& config) {
  const std::uint64_t seed = seed_from(config);
  sim::DgpSpec dgp = dgp_from_config(config);
  if (dgp.kind != sim::DgpSpec::Kind::discrete)
    throw config_error("oracle requires a discrete dgp (preset or joint JSON)");
  const oracle::DiscreteJoint& joint = dgp.joint;
  const long members = config.get_long("oracle.members", 120, 1, 1000000);
  const fs::path out_dir = prepare_out_dir(config);

  json j;
  j["command"] = "oracle";
  j["config"] = config_echo_json(config);
  j["dims"] = {{"u", joint.card_u}, {"x", joint.card_x}, {"a", joint.card_a},
               {"z", joint.card_z}, {"w", joint.card_w}, {"y", joint.card_y}};
  json arms = json::array();
  for (int arm = 0; arm < 2; ++arm) {
    json aj;
    aj["arm"] = arm;
    const double mu = oracle::true_counterfactual_mean(joint, arm);
    aj["mu_true"] = mu;
    aj["outcome_bridge"] =
        bridge_set_json(joint, arm, oracle::BridgeKind::outcome, seed, members, mu);
    aj["treatment_bridge"] =
        bridge_set_json(joint, arm, oracle::BridgeKind::treatment, seed, members, mu);

    // identification of the counterfactual-mean functionals
    json idj = json::object();
    if (aj["outcome_bridge"]["exists"].get<bool>()) {
      Eigen::VectorXd phi(joint.card_x * joint.card_w);
      bool ok = true;
      for (int x = 0; x < joint.card_x && ok; ++x)
        for (int w = 0; w < joint.card_w && ok; ++w) {
          const double pw = joint.p_wx(w, x);
          const double pwa = joint.p_wax(w, arm, x);
          if (pwa <= 0.0) { ok = false; break; }
          phi(x * joint.card_w + w) = pw / pwa;  // 1 / P(A=arm | w, x)
        }
      if (ok) {
        const auto rep =
            oracle::root_n_range_member(joint, arm, phi, oracle::BridgeKind::outcome);
        idj["outcome_functional"] = {
            {"functional_identified", rep.functional_identified},
            {"root_n_range_member", rep.root_n_range_member},
            {"null_dim", rep.null_dim},
            {"orthogonality_residual", rep.orthogonality_residual},
            {"range_residual", rep.range_residual}};
      }
    }
    if (aj["treatment_bridge"]["exists"].get<bool>()) {
      Eigen::VectorXd phi(joint.card_x * joint.card_z);
      bool ok = true;
      for (int x = 0; x < joint.card_x && ok; ++x)
        for (int z = 0; z < joint.card_z && ok; ++z) {
          if (joint.p_zax(z, arm, x) <= 0.0) { ok = false; break; }
          phi(x * joint.card_z + z) = joint.e_y_given_zax(z, arm, x);
        }
      if (ok) {
        const auto rep =
            oracle::root_n_range_member(joint, arm, phi, oracle::BridgeKind::treatment);
        idj["treatment_functional"] = {
            {"functional_identified", rep.functional_identified},
            {"root_n_range_member", rep.root_n_range_member},
            {"null_dim", rep.null_dim},
            {"orthogonality_residual", rep.orthogonality_residual},
            {"range_residual", rep.range_residual}};
      }
    }
    aj["identification"] = idj;
    arms.push_back(aj);
  }
  j["arms"] = arms;
  j["ate_true"] = oracle::true_counterfactual_mean(joint, 1) -
                  oracle::true_counterfactual_mean(joint, 0);
  write_text_file(out_dir / "oracle_report.json", j.dump(2) + "\n");
  std::cout << (out_dir / "oracle_report.json").string() << "\n";
  return 0;
}

}  // namespace

int run(const std::string& command, RunConfig& config) {
  if (command == "estimate") return run_estimate(config);
  if (command == "simulate") return run_simulate(config);
  if (command == "mc") return run_mc(config);
  if (command == "oracle") return run_oracle(config);
  throw config_error("unknown command '" + command + "'");
}

int main_entry(int argc, char** argv) {
  CLI::App app{"counterfactual means via proximal inference with non-unique bridges"};
  app.require_subcommand(1);

  struct Common {
    std::string config_path;
    std::vector<std::string> sets;
    std::vector<std::string> named;  // key=value from dedicated flags
  };
  std::map<std::string, Common> per_command;

  for (const std::string name : {"estimate", "simulate", "mc", "oracle"}) {
    auto* sub = app.add_subcommand(name);
    auto& slot = per_command[name];
    sub->add_option("--config", slot.config_path, "flat key = value config file");
    sub->add_option("--set", slot.sets, "override, key=value (repeatable)");
    auto forward = [&slot](const std::string& key) {
      return [&slot, key](const std::string& v) { slot.named.push_back(key + "=" + v); };
    };
    sub->add_option_function<std::string>("--seed", forward("seed"), "RNG seed");
    sub->add_option_function<std::string>("--out", forward("out_dir"), "output directory");
    sub->add_option_function<std::string>("--level", forward("level"),
                                          "confidence level");
    sub->add_option_function<std::string>("--kappa", forward("kappa"),
                                          "threshold slack multiplier");
    sub->add_option_function<std::string>("--jobs", forward("jobs"),
                                          "concurrent replicates (mc)");
    sub->add_option_function<std::string>("--preset", forward("dgp.preset"),
                                          "named data-generating process");
    if (name == "estimate")
      sub->add_option_function<std::string>("--input", forward("dataset.path"),
                                            "dataset CSV path");
    if (name == "simulate")
      sub->add_option_function<std::string>("--n", forward("simulate.n"), "sample size");
    if (name == "mc")
      sub->add_option_function<std::string>("--reps", forward("mc.replications"),
                                            "Monte Carlo replications");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      nlohmann::json err = {{"error", {{"type", "usage"}, {"message", e.what()}}}};
      std::cerr << err.dump() << "\n";
    }
    return app.exit(e);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const Common& slot = per_command[command];
  try {
    std::vector<std::string> overrides = slot.sets;
    overrides.insert(overrides.end(), slot.named.begin(), slot.named.end());
    RunConfig config = parse_config(command, slot.config_path, overrides);
    return run(command, config);
  } catch (const error& e) {
    nlohmann::json err = {{"error", {{"type", e.type()}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", {{"type", "internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 3;
  }
}

}  // namespace proxbridge::cli
