#include "proxbridge/sieve_fit.hpp"

#include <string>
#include <utility>

#include "proxbridge/errors.hpp"

namespace proxbridge {

SieveContext make_context(Dataset data, const basis::BasisSpec& spec) {
  data.validate();
  SieveContext ctx;
  ctx.data = std::move(data);

  const basis::RescaleMap rescale = basis::fit_rescale(ctx.data);
  ctx.psi_basis = basis::build_basis(spec, basis::BasisRole::bridge, ctx.data, rescale);
  ctx.phi_basis = basis::build_basis(spec, basis::BasisRole::instrument, ctx.data, rescale);

  // The instrument space must be at least as rich as the bridge space so the
  // projected criterion can detect infeasibility; a saturated instrument
  // basis is already exact, which is the one case where fewer columns are
  // still fully informative (discrete proxies with card_z < card_w).
  if (ctx.psi_basis.size() > ctx.phi_basis.size() && !ctx.phi_basis.saturated())
    throw config_error("bridge basis has " + std::to_string(ctx.psi_basis.size()) +
                       " functions but instrument basis only " +
                       std::to_string(ctx.phi_basis.size()) +
                       "; enlarge the instrument side");

  ctx.psi = basis::evaluate(ctx.psi_basis, ctx.data);
  ctx.phi = basis::evaluate(ctx.phi_basis, ctx.data);
  ctx.psi_arm[0] = basis::evaluate(ctx.psi_basis, ctx.data, basis::ArmOverride::arm0);
  ctx.psi_arm[1] = basis::evaluate(ctx.psi_basis, ctx.data, basis::ArmOverride::arm1);

  // one projection fit for [y, psi]
  Eigen::MatrixXd targets(ctx.data.n(), 1 + ctx.psi.values.cols());
  targets.col(0) = ctx.data.y;
  targets.rightCols(ctx.psi.values.cols()) = ctx.psi.values;
  ctx.proj = projection::fit(ctx.phi, targets);
  const Eigen::MatrixXd fitted = projection::predict(ctx.proj, ctx.phi.values);
  ctx.y_cond = fitted.col(0);
  ctx.psi_hat = fitted.rightCols(ctx.psi.values.cols());
  return ctx;
}

}  // namespace proxbridge
