#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "drosc/drosc.hpp"
#include "drosc/moments.hpp"
#include "drosc/numerics.hpp"
#include "drosc/panel.hpp"

namespace drosc {

enum class CovMode { Iid, Hac };

// Total dimensionality p of (mu_y, mu, vecl(Sigma), gamma).
inline std::size_t total_dimension(std::size_t n) { return 1 + n * (n + 5) / 2; }

struct InferConfig {
  int m_draws = 500;
  double alpha = 0.05;
  double alpha0 = 0.01;           // tail-filter constant, in (0, 0.01]
  double lambda = 0.0;
  double feasible_prop = 0.10;    // target fraction of feasible perturbed problems
  double rho_m_constant_init = 0.01;
  double rho_m_growth = 1.25;
  double filter_slack_factor = 1.1;
  CovMode cov_mode = CovMode::Iid;
  int hac_bandwidth = -1;         // auto
  std::uint64_t seed = 0;
  bool refined = true;            // restrict the union to the refined index set
  // PSD filter tolerance, relative to max(1, ||Sigma_m||_max). The exact >= 0
  // test is ill-posed when Sigma_hat is rank deficient (T0 <= N); see README.
  double psd_tol_rel = 1e-4;
  int max_escalations = 60;
  int threads = 0;                // 0 = library default; 1 = serial reference
};

struct PerturbationDraw {
  SymMatrix sigma_m;    // symmetrized perturbed Sigma
  Vector gamma_m;
  double mu_y_m = 0.0;
  Vector mu_m;
  double t_stat_inf = 0.0;   // max |whitened coordinate| over all p coordinates
  double min_eig = 0.0;      // min eigenvalue of sigma_m
  double min_imb = 0.0;      // min over the simplex of ||gamma_m - sigma_m b||_inf
  double tau_m = 0.0;        // perturbed treatment effect (valid iff feasible)
  double inner_m = 0.0;      // clamped (mu_m)' beta_m value (valid iff feasible)
  bool feasible = false;
  bool kept = false;
};

struct CiResult {
  std::vector<std::pair<double, double>> components;  // merged, disjoint, sorted
  std::pair<double, double> hull = {0.0, 0.0};
  double total_measure = 0.0;
  int kept_count = 0;      // |M| after eigenvalue + tail filters
  int refined_count = 0;   // members of the refined index set
  int feasible_count = 0;  // active draws with a non-empty perturbed polytope
  double rho_m_final = 0.0;
  int rho_m_escalations = 0;
  bool used_refined = false;  // false when the refined set was empty (fallback)
  double point_estimate = 0.0;
  double half_width = 0.0;    // z_{(alpha-alpha0)/2} sqrt(v_y)
  std::uint64_t seed = 0;
};

// M independent draws, each from its own derived RNG substream. cov must be
// the inflated CovSet; sigma_m is symmetrized by construction from vecl.
std::vector<PerturbationDraw> draw_perturbations(const MomentSet& moments, const CovSet& cov,
                                                 int m_draws, RngStream base, int threads = 0);

// Whitened sup-statistic and min eigenvalue of a draw, recomputed from the
// same Cholesky factors used for sampling.
std::pair<double, double> filter_stats(const PerturbationDraw& draw, const MomentSet& moments,
                                       const CovSet& cov);

// Escalates C1 by rho_m_growth until at least feasible_prop of the draws have a
// non-empty lambda-polytope at slack lambda + rho_m.
double select_rho_m(const std::vector<PerturbationDraw>& draws, double lambda,
                    const InferConfig& cfg, std::size_t t0, std::size_t t1,
                    int* escalations_out = nullptr);

// Fills draw.tau_m / draw.inner_m; returns false when the perturbed polytope is
// empty (Int^[m] = empty set).
bool perturbed_tau(PerturbationDraw& draw, const MomentSet& moments, double lambda, double rho_m);

// Filters, per-draw intervals, union aggregation. Throws InferenceError when
// every draw is filtered out or infeasible.
CiResult build_ci(std::vector<PerturbationDraw>& draws, const MomentSet& moments,
                  const CovSet& cov, const InferConfig& cfg, double rho_m, int rho_m_escalations);

// Orchestrates moments -> covariances -> draws -> rho_M -> build_ci and attaches
// the point estimate from the estimation pipeline.
CiResult run_inference(const PanelData& panel, const InferConfig& cfg);

// True when x lies in one of the (closed) components.
bool ci_contains(const CiResult& ci, double x);

}  // namespace drosc
