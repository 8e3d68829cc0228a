#include "proxbridge/sieve_basis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "proxbridge/errors.hpp"

namespace proxbridge::basis {

namespace {

constexpr double kLevelTol = 1e-9;

std::vector<double> distinct_values(const Eigen::VectorXd& col) {
  std::vector<double> v(col.data(), col.data() + col.size());
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double val : v)
    if (out.empty() || val - out.back() > kLevelTol) out.push_back(val);
  return out;
}

RescaleMap::Affine fit_affine(const Eigen::VectorXd& col, const std::string& name) {
  RescaleMap::Affine m;
  m.lo = col.minCoeff();
  m.range = col.maxCoeff() - m.lo;
  if (m.range <= 0.0)
    throw data_error("variable '" + name + "' is constant; cannot rescale to [0,1]");
  return m;
}

// shifted Legendre P_j(2u - 1) by the three-term recurrence
void eval_legendre(double u, int count, double* out) {
  const double t = 2.0 * u - 1.0;
  if (count > 0) out[0] = 1.0;
  if (count > 1) out[1] = t;
  for (int j = 2; j < count; ++j)
    out[j] = ((2.0 * j - 1.0) * t * out[j - 1] - (j - 1.0) * out[j - 2]) / j;
}

// cubic B-splines on a clamped knot vector, Cox-de Boor
void eval_bspline(double u, const std::vector<double>& knots, int count, double* out) {
  constexpr int degree = 3;
  std::fill(out, out + count, 0.0);
  // find knot span; clamp u into [0, 1]
  u = std::clamp(u, 0.0, 1.0);
  int span = degree;  // first valid span index
  const int last_span = count - 1;
  while (span < last_span && u >= knots[span + 1]) ++span;

  double left[degree + 1], right[degree + 1], nvals[degree + 1];
  nvals[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = u - knots[span + 1 - j];
    right[j] = knots[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom > 0.0 ? nvals[r] / denom : 0.0;
      nvals[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    nvals[j] = saved;
  }
  for (int j = 0; j <= degree; ++j) out[span - degree + j] = nvals[j];
}

std::vector<double> clamped_uniform_knots(int count) {
  constexpr int degree = 3;
  const int interior = count - degree - 1;
  std::vector<double> knots;
  for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
  for (int i = 1; i <= interior; ++i)
    knots.push_back(static_cast<double>(i) / (interior + 1));
  for (int i = 0; i <= degree; ++i) knots.push_back(1.0);
  return knots;
}

struct VarColumn {
  std::string name;
  const Eigen::VectorXd* values;
  const RescaleMap::Affine* map;
  int degree;
};

VariableBasis make_variable_basis(const BasisSpec& spec, const VarColumn& var) {
  if (var.degree < 1)
    throw config_error("basis degree for '" + var.name + "' must be >= 1");

  VariableBasis vb;
  const std::vector<double> levels = distinct_values(*var.values);
  if (spec.saturate_discrete && levels.size() >= 2 &&
      levels.size() <= static_cast<std::size_t>(spec.max_discrete_levels)) {
    vb.kind = VariableBasis::Kind::indicator;
    vb.levels = levels;
    vb.count = static_cast<int>(levels.size());
    return vb;
  }
  if (levels.size() <= static_cast<std::size_t>(var.degree))
    throw config_error("requested count exceeds tensor-grid capacity on '" + var.name +
                       "': degree " + std::to_string(var.degree) + " with only " +
                       std::to_string(levels.size()) + " distinct values");
  if (spec.family == BasisFamily::polynomial) {
    vb.kind = VariableBasis::Kind::legendre;
    vb.count = var.degree + 1;
  } else {
    if (var.degree < 3)
      throw config_error("bspline basis needs degree >= 3 on '" + var.name + "'");
    vb.kind = VariableBasis::Kind::bspline;
    vb.count = var.degree + 1;
    vb.knots = clamped_uniform_knots(vb.count);
  }
  return vb;
}

std::string var_label(const VariableBasis& vb, const std::string& name, int j) {
  switch (vb.kind) {
    case VariableBasis::Kind::indicator:
      return "I(" + name + "=" + std::to_string(vb.levels[j]) + ")";
    case VariableBasis::Kind::bspline:
      return "B" + std::to_string(j) + "(" + name + ")";
    default:
      return "L" + std::to_string(j) + "(" + name + ")";
  }
}

}  // namespace

void VariableBasis::eval(double v, double* out) const {
  switch (kind) {
    case Kind::legendre:
      eval_legendre(v, count, out);
      return;
    case Kind::bspline:
      eval_bspline(v, knots, count, out);
      return;
    case Kind::indicator:
      for (int j = 0; j < count; ++j) out[j] = std::abs(v - levels[j]) <= kLevelTol ? 1.0 : 0.0;
      return;
  }
}

BasisSpec default_spec(const Dataset& data) {
  const auto n = static_cast<double>(data.n());
  const int target_m =
      std::min(30, 3 * static_cast<int>(std::ceil(std::pow(std::max(n, 2.0), 0.2))));
  const int n_vars = 1 + static_cast<int>(data.x_dim());
  const int per_var_m = std::max(
      2, static_cast<int>(std::round(std::pow(target_m, 1.0 / n_vars))));
  const int per_var_k = std::max(
      per_var_m + 1,
      static_cast<int>(std::round(std::pow(2.0 * target_m, 1.0 / n_vars))));

  BasisSpec spec;
  spec.bridge_degrees.assign(n_vars, per_var_m - 1);
  spec.instrument_degrees.assign(n_vars, per_var_k - 1);
  return spec;
}

RescaleMap fit_rescale(const Dataset& data) {
  if (data.n() < 2) throw data_error("need at least 2 observations to fit a rescale map");
  RescaleMap map;
  map.w = fit_affine(data.w, "w");
  map.z = fit_affine(data.z, "z");
  // y is never a basis variable; a constant outcome is legal
  map.y.lo = data.y.minCoeff();
  map.y.range = data.y.maxCoeff() - map.y.lo;
  if (map.y.range <= 0.0) map.y.range = 1.0;
  for (Eigen::Index j = 0; j < data.x_dim(); ++j)
    map.x.push_back(fit_affine(data.x.col(j), "x" + std::to_string(j + 1)));
  return map;
}

bool BasisSet::saturated() const {
  for (const auto& vb : vars)
    if (vb.kind != VariableBasis::Kind::indicator) return false;
  return !vars.empty();
}

BasisSet build_basis(const BasisSpec& spec, BasisRole role, const Dataset& train,
                     const RescaleMap& rescale) {
  const auto& degrees =
      role == BasisRole::bridge ? spec.bridge_degrees : spec.instrument_degrees;
  const int n_vars = 1 + static_cast<int>(train.x_dim());
  if (static_cast<int>(degrees.size()) != n_vars)
    throw config_error("basis degree list has length " + std::to_string(degrees.size()) +
                       ", expected " + std::to_string(n_vars));

  std::vector<VarColumn> cols;
  if (role == BasisRole::bridge)
    cols.push_back({"w", &train.w, &rescale.w, degrees[0]});
  else
    cols.push_back({"z", &train.z, &rescale.z, degrees[0]});
  std::vector<Eigen::VectorXd> x_cols(train.x_dim());
  for (Eigen::Index j = 0; j < train.x_dim(); ++j) {
    x_cols[j] = train.x.col(j);
    cols.push_back({"x" + std::to_string(j + 1), &x_cols[j], &rescale.x[j],
                    degrees[static_cast<std::size_t>(j) + 1]});
  }

  BasisSet set;
  set.role = role;
  set.per_arm = spec.per_arm;
  set.rescale = rescale;
  set.tensor_count = 1;
  for (const auto& c : cols) {
    set.vars.push_back(make_variable_basis(spec, c));
    set.tensor_count *= set.vars.back().count;
  }

  // labels in odometer order, first variable fastest
  std::vector<std::string> tensor_labels(set.tensor_count);
  for (int idx = 0; idx < set.tensor_count; ++idx) {
    int rem = idx;
    std::string label;
    for (std::size_t v = 0; v < set.vars.size(); ++v) {
      const int j = rem % set.vars[v].count;
      rem /= set.vars[v].count;
      if (!label.empty()) label += "*";
      label += var_label(set.vars[v], cols[v].name, j);
    }
    tensor_labels[idx] = label;
  }
  if (spec.per_arm) {
    for (int arm = 0; arm < 2; ++arm)
      for (const auto& l : tensor_labels)
        set.labels.push_back("a" + std::to_string(arm) + "*" + l);
  } else {
    set.labels = tensor_labels;
  }
  return set;
}

DesignMatrix evaluate(const BasisSet& set, const Dataset& data, ArmOverride override_arm) {
  const Eigen::Index n = data.n();
  const int p = set.size();
  DesignMatrix out;
  out.values = Eigen::MatrixXd::Zero(n, p);
  out.column_labels = set.labels;

  const std::size_t n_vars = set.vars.size();
  std::vector<std::vector<double>> buf(n_vars);
  for (std::size_t v = 0; v < n_vars; ++v) buf[v].resize(set.vars[v].count);

  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t v = 0; v < n_vars; ++v) {
      const bool primary = v == 0;
      const double raw =
          primary ? (set.role == BasisRole::bridge ? data.w(i) : data.z(i))
                  : data.x(i, static_cast<Eigen::Index>(v) - 1);
      const VariableBasis& vb = set.vars[v];
      if (vb.kind == VariableBasis::Kind::indicator) {
        vb.eval(raw, buf[v].data());
        bool matched = false;
        for (double b : buf[v]) matched = matched || b > 0.0;
        if (!matched) out.clamped = true;
      } else {
        const RescaleMap::Affine& m =
            primary ? (set.role == BasisRole::bridge ? set.rescale.w : set.rescale.z)
                    : set.rescale.x[v - 1];
        double u = m.to_unit(raw);
        if (u < 0.0 || u > 1.0) {
          out.clamped = true;
          u = std::clamp(u, 0.0, 1.0);
        }
        vb.eval(u, buf[v].data());
      }
    }
    const int arm = override_arm == ArmOverride::none ? data.a(i)
                                                      : static_cast<int>(override_arm);
    const int offset = set.arm_offset(arm);
    // tensor products in odometer order, first variable fastest
    std::vector<int> idx(n_vars, 0);
    for (int col = 0; col < set.tensor_count; ++col) {
      double prod = 1.0;
      for (std::size_t v = 0; v < n_vars; ++v) prod *= buf[v][idx[v]];
      out.values(i, offset + col) = prod;
      std::size_t v = 0;
      while (v < n_vars && ++idx[v] == set.vars[v].count) idx[v++] = 0;
    }
  }
  return out;
}

double min_gram_eigenvalue(const DesignMatrix& design) {
  const Eigen::Index n = design.values.rows();
  if (n == 0) return 0.0;
  const Eigen::MatrixXd gram =
      design.values.transpose() * design.values / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  return es.eigenvalues().minCoeff();
}

}  // namespace proxbridge::basis
