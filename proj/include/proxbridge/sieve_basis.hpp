#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "proxbridge/dataset.hpp"

namespace proxbridge::basis {

enum class BasisFamily { polynomial, bspline };

// Describes both approximating families: the bridge-side functions of
// (W, X) and the instrument-side functions of (Z, X). "degree" is the
// per-variable polynomial degree (degree d gives d+1 functions); for
// bsplines degree d gives d+1 cubic B-splines (d >= 3, i.e. d-3 interior
// knots). With per_arm the family is duplicated and multiplied by the two
// treatment indicators.
struct BasisSpec {
  BasisFamily family = BasisFamily::polynomial;
  std::vector<int> bridge_degrees;      // per variable of (W, X1..Xd)
  std::vector<int> instrument_degrees;  // per variable of (Z, X1..Xd)
  bool per_arm = true;
  bool saturate_discrete = true;  // discrete variables get saturated indicators
  int max_discrete_levels = 12;
};

// Sizes chosen so the bridge tensor count is about 3 * ceil(n^(1/5)),
// capped at 30, with the instrument side twice as large.
BasisSpec default_spec(const Dataset& data);

// Per-variable affine maps sending observed supports into [0, 1].
struct RescaleMap {
  struct Affine {
    double lo = 0.0;
    double range = 1.0;
    double to_unit(double v) const { return (v - lo) / range; }
  };
  Affine w, z, y;  // y fitted for diagnostics only
  std::vector<Affine> x;
};

RescaleMap fit_rescale(const Dataset& data);

enum class BasisRole { bridge, instrument };

struct VariableBasis {
  enum class Kind { legendre, bspline, indicator };
  Kind kind = Kind::legendre;
  int count = 0;
  std::vector<double> knots;   // bspline: clamped knot vector on [0, 1]
  std::vector<double> levels;  // indicator: sorted distinct raw values

  // writes `count` values; continuous kinds take the unit-scaled value,
  // indicators the raw one
  void eval(double v, double* out) const;
};

struct BasisSet {
  BasisRole role = BasisRole::bridge;
  bool per_arm = false;
  std::vector<VariableBasis> vars;  // (primary, x1..xd)
  RescaleMap rescale;
  int tensor_count = 0;
  std::vector<std::string> labels;

  int size() const { return tensor_count * (per_arm ? 2 : 1); }
  int arm_offset(int arm) const { return per_arm ? arm * tensor_count : 0; }
  bool saturated() const;  // every variable uses indicator columns
};

BasisSet build_basis(const BasisSpec& spec, BasisRole role, const Dataset& train,
                     const RescaleMap& rescale);

struct DesignMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> column_labels;
  bool clamped = false;  // some evaluation fell outside the training range
};

enum class ArmOverride { none = -1, arm0 = 0, arm1 = 1 };

DesignMatrix evaluate(const BasisSet& set, const Dataset& data,
                      ArmOverride override_arm = ArmOverride::none);

// Smallest eigenvalue of values' * values / n (Gram conditioning diagnostic).
double min_gram_eigenvalue(const DesignMatrix& design);

}  // namespace proxbridge::basis
