#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drosc/infer.hpp"
#include "drosc/numerics.hpp"
#include "drosc/panel.hpp"

namespace drosc {

// Data-generating process: controls follow a stationary vector AR(1) with
// matched marginal moments (pre: mean mu0, covariance Sigma0 equicorrelated;
// post: mean mu, identity covariance, restarted from its stationary law); the
// treated unit follows the linear outcome model with weights beta0 / beta1 and
// a constant effect tau_bar plus noise v_t after treatment.
struct DgpConfig {
  int t0 = 25;
  int t1 = 25;
  int n = 10;
  double phi = 0.0;
  Vector mu0;
  Vector mu;
  double rho0 = 0.25;
  Vector beta0;
  Vector beta1;
  double tau_bar = 0.0;
  double sd_u0 = 1.0;
  double sd_u1 = 1.0;
  double sd_v = 0.25;
};

PanelData gen_panel(const DgpConfig& dgp, RngStream rng);

// Named experiment settings S1 | S2 | S3.
DgpConfig setting(const std::string& name, int n, double tau_bar);

// lambda = ||Sigma (beta1 - beta0)||_inf with Sigma = Sigma0 + mu0 mu0'.
double lambda_oracle(const DgpConfig& dgp);

struct PopulationMoments {
  SymMatrix sigma;
  Vector gamma;
  double mu_y = 0.0;
  Vector mu;
};
PopulationMoments population_moments(const DgpConfig& dgp);

// Benchmark intervals built from the replicate distribution of tau_hat.
std::pair<double, double> normality_ci(const Vector& tau_hats, double tau_hat_r, double alpha);
std::pair<double, double> oba_ci(const Vector& tau_hats, double tau_hat_r, double tau_star,
                                 double alpha);

struct McRow {
  std::string setting;
  double tau_bar = 0.0;
  double tau_star = 0.0;
  double coverage = 0.0;          // proposed union CI
  double normality_coverage = 0.0;
  double oba_coverage = 0.0;
  double mean_union_length = 0.0;
  double mean_normality_length = 0.0;
  double mean_bias = 0.0;         // mean(tau_hat) - tau_star
  double group_min_coverage = 0.0;   // min over rows sharing the same tau_star
  double group_max_length = 0.0;     // max mean union length within the group
  int replicates = 0;
  int degenerate = 0;             // replicates whose CI was degenerate (errored)
  double seconds = 0.0;
};

struct McReport {
  std::vector<McRow> rows;
  void to_csv(const std::string& path) const;
  void to_json(const std::string& path) const;
};

struct McOptions {
  int replicates = 500;
  int t0 = 25;
  int t1 = 25;
  double phi = 0.0;
  bool lambda_from_oracle = true;  // S1 uses lambda = 0 regardless
  int threads = 0;
  std::uint64_t seed = 0;
  // noise overrides for degenerate runs
  double sd_u0 = 1.0;
  double sd_u1 = 1.0;
  double sd_v = 0.25;
};

// R panels per tau_bar; per panel the estimation + inference pipeline; rows
// grouped by identical tau_star (1e-9) for min-coverage / max-length reporting.
McReport run_monte_carlo(const std::string& setting_name, const Vector& tau_bars,
                         const McOptions& opts, const InferConfig& icfg);

// Per-unit SC selection frequencies after adding noise with sd = c x per-series
// pre-period sd; selection threshold 1e-3 on the fitted weight.
Matrix stability_experiment(const PanelData& panel, const Vector& noise_cs, int replicates,
                            std::uint64_t seed, int threads = 0);

struct WeightShiftRow {
  double kappa = 0.0;
  double mean_tau_sc = 0.0;
  double sd_tau_sc = 0.0;
  double bias = 0.0;  // mean_tau_sc - tau_bar
};

// Semi-real weight-shift experiment: kappa-fraction of the fitted Baleares /
// Rioja weights moves to Cataluna / Asturias in the post period.
std::vector<WeightShiftRow> weight_shift_experiment(const PanelData& panel, const Vector& kappas,
                                                    int replicates, double tau_bar, double noise_c,
                                                    std::uint64_t seed, int threads = 0);

}  // namespace drosc
