#include "drosc/infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "drosc/errors.hpp"
#include "drosc/lpsolve.hpp"
#include "drosc/parallel.hpp"

namespace drosc {

namespace {

struct SamplingFactors {
  Matrix l_sigma;  // chol of v_sigma (vecl dimension)
  Matrix l_gamma;
  Matrix l_mu;
  double sd_y = 0.0;
};

SamplingFactors factors_of(const CovSet& cov) {
  SamplingFactors f;
  f.l_sigma = cholesky_psd(cov.v_sigma);
  f.l_gamma = cholesky_psd(cov.v_gamma);
  f.l_mu = cholesky_psd(cov.v_mu);
  f.sd_y = std::sqrt(std::max(0.0, cov.v_y));
  return f;
}

SymMatrix sym_from_vecl(const Vector& v, std::size_t n) {
  SymMatrix m(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j; i < n; ++i) m.set(i, j, v[vecl_index(i, j, n)]);
  return m;
}

double whitened_sup(const PerturbationDraw& d, const MomentSet& m, const SamplingFactors& f) {
  const std::size_t n = m.gamma_hat.size();
  double sup = 0.0;
  // stacked order: mu_y, mu, vecl(sigma), gamma
  if (f.sd_y > 0.0) sup = std::max(sup, std::fabs((d.mu_y_m - m.mu_y_hat) / f.sd_y));
  Vector u(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = d.mu_m[j] - m.mu_hat[j];
  for (double z : solve_lower(f.l_mu, u)) sup = std::max(sup, std::fabs(z));
  const Vector vs = vecl(d.sigma_m);
  const Vector vh = vecl(m.sigma_hat);
  Vector us(vs.size());
  for (std::size_t k = 0; k < vs.size(); ++k) us[k] = vs[k] - vh[k];
  for (double z : solve_lower(f.l_sigma, us)) sup = std::max(sup, std::fabs(z));
  for (std::size_t j = 0; j < n; ++j) u[j] = d.gamma_m[j] - m.gamma_hat[j];
  for (double z : solve_lower(f.l_gamma, u)) sup = std::max(sup, std::fabs(z));
  return sup;
}

}  // namespace

std::vector<PerturbationDraw> draw_perturbations(const MomentSet& moments, const CovSet& cov,
                                                 int m_draws, RngStream base, int threads) {
  const std::size_t n = moments.gamma_hat.size();
  const SamplingFactors f = factors_of(cov);
  const Vector vecl_hat = vecl(moments.sigma_hat);
  std::vector<PerturbationDraw> draws(m_draws);
  parallel_for(static_cast<std::size_t>(m_draws), threads, [&](std::size_t m) {
    RngStream rng = base.substream(m);
    PerturbationDraw d;
    const Vector vs = sample_mvn(vecl_hat, f.l_sigma, rng);
    d.sigma_m = sym_from_vecl(vs, n);
    d.gamma_m = sample_mvn(moments.gamma_hat, f.l_gamma, rng);
    d.mu_y_m = moments.mu_y_hat + f.sd_y * rng.normal();
    d.mu_m = sample_mvn(moments.mu_hat, f.l_mu, rng);
    d.t_stat_inf = whitened_sup(d, moments, f);
    d.min_eig = min_eigenvalue(d.sigma_m);
    try {
      d.min_imb = min_imbalance(d.sigma_m, d.gamma_m);
    } catch (const std::exception&) {
      // LP breakdown on a wild draw: keep it out of every index set
      d.min_imb = std::numeric_limits<double>::infinity();
      d.t_stat_inf = std::numeric_limits<double>::infinity();
    }
    draws[m] = std::move(d);
  });
  return draws;
}

std::pair<double, double> filter_stats(const PerturbationDraw& draw, const MomentSet& moments,
                                       const CovSet& cov) {
  const SamplingFactors f = factors_of(cov);
  return {whitened_sup(draw, moments, f), min_eigenvalue(draw.sigma_m)};
}

double select_rho_m(const std::vector<PerturbationDraw>& draws, double lambda,
                    const InferConfig& cfg, std::size_t t0, std::size_t t1,
                    int* escalations_out) {
  if (draws.empty()) throw InferenceError("select_rho_m: no draws");
  const std::size_t n = draws.front().gamma_m.size();
  const double p = static_cast<double>(total_dimension(n));
  const double base = std::pow(std::log(static_cast<double>(std::min(t0, t1))) /
                                   static_cast<double>(draws.size()),
                               1.0 / p) /
                      std::sqrt(static_cast<double>(t0));
  double c1 = cfg.rho_m_constant_init;
  int esc = 0;
  const double need = cfg.feasible_prop * static_cast<double>(draws.size());
  for (;;) {
    std::size_t feas = 0;
    for (const auto& d : draws)
      if (d.min_imb <= lambda + c1 * base) ++feas;
    if (static_cast<double>(feas) >= need - 1e-12) break;
    if (++esc > cfg.max_escalations)
      throw InferenceError("select_rho_m: escalation cap hit; increase draws (M) or lambda");
    c1 *= cfg.rho_m_growth;
  }
  if (escalations_out) *escalations_out = esc;
  return c1 * base;
}

bool perturbed_tau(PerturbationDraw& draw, const MomentSet& moments, double lambda, double rho_m) {
  if (draw.min_imb > lambda + rho_m) {
    draw.feasible = false;
    return false;
  }
  UncertaintyPolytope poly{draw.sigma_m, draw.gamma_m, lambda + rho_m};
  const LpResult lo = lp_optimize(poly, draw.mu_m, LpSense::Min);
  const LpResult hi = lp_optimize(poly, draw.mu_m, LpSense::Max);
  if (lo.status != LpStatus::Optimal || hi.status != LpStatus::Optimal) {
    draw.feasible = false;
    return false;
  }
  // minimizer of [mu_y_m - (mu_m)'beta]^2 over the polytope: clamp mu_y_m into
  // the attainable range of (mu_m)'beta
  draw.inner_m = std::clamp(draw.mu_y_m, lo.value, hi.value);
  draw.tau_m = moments.mu_y_hat - draw.inner_m;  // unperturbed mu_y in the difference
  draw.feasible = true;
  return true;
}

CiResult build_ci(std::vector<PerturbationDraw>& draws, const MomentSet& moments,
                  const CovSet& cov, const InferConfig& cfg, double rho_m,
                  int rho_m_escalations) {
  const std::size_t n = moments.gamma_hat.size();
  const double p = static_cast<double>(total_dimension(n));
  const double zcut = cfg.filter_slack_factor * normal_quantile(cfg.alpha0 / (2.0 * p));
  std::vector<std::size_t> kept;
  for (std::size_t m = 0; m < draws.size(); ++m) {
    auto& d = draws[m];
    const double tol = cfg.psd_tol_rel * std::max(1.0, d.sigma_m.max_abs());
    d.kept = (d.min_eig >= -tol) && (d.t_stat_inf <= zcut);
    if (d.kept) kept.push_back(m);
  }
  std::vector<std::size_t> refined;
  for (std::size_t m : kept)
    if (draws[m].min_imb <= rho_m) refined.push_back(m);

  const bool use_refined = cfg.refined && !refined.empty();
  const std::vector<std::size_t>& active = use_refined ? refined : kept;

  std::vector<char> ok(draws.size(), 0);
  parallel_for(active.size(), cfg.threads, [&](std::size_t k) {
    try {
      ok[active[k]] = perturbed_tau(draws[active[k]], moments, cfg.lambda, rho_m) ? 1 : 0;
    } catch (const std::exception&) {
      ok[active[k]] = 0;  // LP breakdown: contributes the empty interval
    }
  });

  CiResult ci;
  ci.kept_count = static_cast<int>(kept.size());
  ci.refined_count = static_cast<int>(refined.size());
  ci.rho_m_final = rho_m;
  ci.rho_m_escalations = rho_m_escalations;
  ci.used_refined = use_refined;
  ci.half_width = normal_quantile((cfg.alpha - cfg.alpha0) / 2.0) * std::sqrt(std::max(0.0, cov.v_y));

  std::vector<std::pair<double, double>> ints;
  for (std::size_t m : active) {
    if (!ok[m]) continue;
    ints.emplace_back(draws[m].tau_m - ci.half_width, draws[m].tau_m + ci.half_width);
  }
  ci.feasible_count = static_cast<int>(ints.size());
  if (ints.empty())
    throw InferenceError(
        "build_ci: all perturbations filtered out or infeasible; increase draws (M) or lambda");
  std::sort(ints.begin(), ints.end());
  for (const auto& iv : ints) {
    if (!ci.components.empty() && iv.first <= ci.components.back().second) {
      ci.components.back().second = std::max(ci.components.back().second, iv.second);
    } else {
      ci.components.push_back(iv);
    }
  }
  for (const auto& cmp : ci.components) ci.total_measure += cmp.second - cmp.first;
  ci.hull = {ci.components.front().first, ci.components.back().second};
  return ci;
}

CiResult run_inference(const PanelData& panel, const InferConfig& cfg) {
  if (!(cfg.alpha > cfg.alpha0))
    throw NumericError("run_inference: alpha must exceed alpha0");
  const MomentSet m = compute_moments(panel);
  const CovSet cov_raw = (cfg.cov_mode == CovMode::Iid)
                             ? covariances_iid(panel)
                             : covariances_hac(panel, cfg.hac_bandwidth);
  const CovSet cov = inflate(cov_raw);
  RngStream base(cfg.seed, 0x0D05C0ull);
  auto draws = draw_perturbations(m, cov, cfg.m_draws, base, cfg.threads);
  int esc = 0;
  const double rho_m = select_rho_m(draws, cfg.lambda, cfg, panel.t0, panel.t1(), &esc);
  CiResult ci = build_ci(draws, m, cov, cfg, rho_m, esc);
  DroscConfig dcfg;
  dcfg.lambda = cfg.lambda;
  ci.point_estimate = estimate(panel, dcfg).tau_hat;
  ci.seed = cfg.seed;
  return ci;
}

bool ci_contains(const CiResult& ci, double x) {
  for (const auto& c : ci.components)
    if (x >= c.first && x <= c.second) return true;
  return false;
}

}  // namespace drosc
