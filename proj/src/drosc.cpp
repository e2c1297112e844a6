#include "drosc/drosc.hpp"

#include <cmath>
#include <string>

#include "drosc/errors.hpp"
#include "drosc/lpsolve.hpp"

namespace drosc {

double rho_rule(const PanelData& panel, const ScFit& sc, double lambda, double c, double a) {
  const std::size_t t0 = panel.t0;
  const std::size_t n = panel.n();
  double max_rms = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double ss = 0.0;
    for (std::size_t t = 0; t < t0; ++t) ss += panel.x_controls(t, j) * panel.x_controls(t, j);
    max_rms = std::max(max_rms, std::sqrt(ss / static_cast<double>(t0)));
  }
  const double logterm =
      std::pow(std::log(static_cast<double>(std::max(t0, n))), a);
  return c * (sc.sigma_hat_resid * max_rms + lambda) * logterm / std::sqrt(static_cast<double>(t0));
}

double clamp_to_zero(double lo, double hi) {
  if (lo > hi) throw NumericError("clamp_to_zero: lo > hi");
  if (lo > 0.0) return lo;
  if (hi < 0.0) return hi;
  return 0.0;
}

namespace {

struct RangeResult {
  double lo_mu, hi_mu;
  Vector argmin, argmax;
};

RangeResult mu_beta_range(const SymMatrix& sigma, const Vector& gamma, double slack,
                          const Vector& mu) {
  UncertaintyPolytope poly{sigma, gamma, slack};
  const LpResult lo = lp_optimize(poly, mu, LpSense::Min);
  if (lo.status != LpStatus::Optimal) throw InfeasibleError("uncertainty polytope is empty");
  const LpResult hi = lp_optimize(poly, mu, LpSense::Max);
  if (hi.status != LpStatus::Optimal) throw InfeasibleError("uncertainty polytope is empty");
  return {lo.value, hi.value, lo.point, hi.point};
}

struct ClampOut {
  double tau_hat;
  std::pair<double, double> interval;
  IntervalCase icase;
  Vector beta_hat;
};

ClampOut clamp_pipeline(const SymMatrix& sigma, const Vector& gamma, double slack, double mu_y,
                        const Vector& mu) {
  const RangeResult r = mu_beta_range(sigma, gamma, slack, mu);
  double t_lo = mu_y - r.hi_mu;
  double t_hi = mu_y - r.lo_mu;
  if (t_lo > t_hi) {
    // LP rounding can invert a collapsed (singleton) range by ~1e-12
    if (t_lo - t_hi > 1e-8 * std::max(1.0, std::fabs(t_lo)))
      throw NumericError("clamp_pipeline: inconsistent LP range");
    t_lo = t_hi = 0.5 * (t_lo + t_hi);
  }
  ClampOut out;
  out.interval = {t_lo, t_hi};
  out.tau_hat = clamp_to_zero(t_lo, t_hi);
  if (t_lo > 0.0) {
    out.icase = IntervalCase::PositiveInterval;
    out.beta_hat = r.argmax;  // tau attained at max of mu'beta
  } else if (t_hi < 0.0) {
    out.icase = IntervalCase::NegativeInterval;
    out.beta_hat = r.argmin;
  } else {
    out.icase = IntervalCase::ZeroInside;
    UncertaintyPolytope poly{sigma, gamma, slack};
    out.beta_hat = feasible_point_with_equality(poly, mu, mu_y);
    if (out.beta_hat.empty()) {
      // interval endpoints straddle zero within LP tolerance; fall back to the
      // endpoint closer to tau = 0
      out.beta_hat = (std::fabs(t_lo) < std::fabs(t_hi)) ? r.argmax : r.argmin;
    }
  }
  return out;
}

}  // namespace

DroscEstimate estimate(const PanelData& panel, const DroscConfig& cfg) {
  if (panel.t0 < 2) throw NumericError("estimate: t0 >= 2 required");
  const MomentSet m = compute_moments(panel);
  const ScFit sc = fit_sc(panel);
  const double s_min = min_imbalance(m.sigma_hat, m.gamma_hat);
  double c = cfg.rho_constant_init;
  int esc = 0;
  while (cfg.lambda + rho_rule(panel, sc, cfg.lambda, c, cfg.log_exponent_a) < s_min) {
    if (++esc > cfg.max_escalations)
      throw InfeasibleError(
          "estimate: uncertainty polytope empty after " + std::to_string(cfg.max_escalations) +
          " rho escalations (min imbalance " + std::to_string(s_min) + ")");
    c *= cfg.rho_growth;
  }
  const double rho = rho_rule(panel, sc, cfg.lambda, c, cfg.log_exponent_a);
  const ClampOut co =
      clamp_pipeline(m.sigma_hat, m.gamma_hat, cfg.lambda + rho, m.mu_y_hat, m.mu_hat);
  DroscEstimate est;
  est.tau_hat = co.tau_hat;
  est.beta_hat = co.beta_hat;
  est.tau_interval = co.interval;
  est.rho_final = rho;
  est.escalations = esc;
  est.icase = co.icase;
  return est;
}

PopulationTarget tau_star_population(const SymMatrix& sigma, const Vector& gamma, double mu_y,
                                     const Vector& mu, double lambda) {
  if (lambda < 0.0) throw NumericError("tau_star_population: lambda >= 0 required");
  const ClampOut co = clamp_pipeline(sigma, gamma, lambda, mu_y, mu);
  return {co.tau_hat, co.interval};
}

}  // namespace drosc
