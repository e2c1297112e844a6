#include "drosc/simlab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "drosc/errors.hpp"
#include "drosc/parallel.hpp"
#include "drosc/lpsolve.hpp"
#include "drosc/sc.hpp"

namespace drosc {

namespace {

// Cholesky factor of the equicorrelation matrix (1-rho) I + rho 11'.
Matrix equicorr_chol(int n, double rho) {
  SymMatrix s(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) s.set(i, j, (i == j) ? 1.0 : rho);
  return cholesky_psd(s);
}

}  // namespace

PanelData gen_panel(const DgpConfig& dgp, RngStream rng) {
  const int n = dgp.n;
  const int t = dgp.t0 + dgp.t1;
  const double phi = dgp.phi;
  const double acoef = std::sqrt(1.0 - phi * phi);
  const Matrix l0 = equicorr_chol(n, dgp.rho0);
  Matrix x(t, n);
  Vector a(n, 0.0);
  // pre period: stationary AR(1) around mu0 with marginal covariance Sigma0
  a = sample_mvn(Vector(n, 0.0), l0, rng);
  for (int s = 0; s < dgp.t0; ++s) {
    for (int j = 0; j < n; ++j) x(s, j) = dgp.mu0[j] + a[j];
    const Vector innov = sample_mvn(Vector(n, 0.0), l0, rng);
    for (int j = 0; j < n; ++j) a[j] = phi * a[j] + acoef * innov[j];
  }
  // post period: restart from the stationary law, marginal covariance I
  for (int j = 0; j < n; ++j) a[j] = rng.normal();
  for (int s = dgp.t0; s < t; ++s) {
    for (int j = 0; j < n; ++j) x(s, j) = dgp.mu[j] + a[j];
    for (int j = 0; j < n; ++j) a[j] = phi * a[j] + acoef * rng.normal();
  }
  Vector y(t, 0.0);
  for (int s = 0; s < dgp.t0; ++s) {
    double v = dgp.sd_u0 * rng.normal();
    for (int j = 0; j < n; ++j) v += x(s, j) * dgp.beta0[j];
    y[s] = v;
  }
  for (int s = dgp.t0; s < t; ++s) {
    double v = dgp.sd_u1 * rng.normal() + dgp.tau_bar + dgp.sd_v * rng.normal();
    for (int j = 0; j < n; ++j) v += x(s, j) * dgp.beta1[j];
    y[s] = v;
  }
  return make_panel(std::move(y), std::move(x), static_cast<std::size_t>(dgp.t0));
}

DgpConfig setting(const std::string& name, int n, double tau_bar) {
  if (name == "S3" && n < 6) throw std::invalid_argument("setting S3 requires n >= 6");
  if (n < 3) throw std::invalid_argument("settings require n >= 3");
  DgpConfig d;
  d.n = n;
  d.tau_bar = tau_bar;
  d.beta0.assign(n, 0.0);
  d.beta0[0] = d.beta0[1] = d.beta0[2] = 1.0 / 3.0;
  d.beta1 = d.beta0;
  if (name == "S1") {
    d.mu0.resize(n);
    for (int j = 0; j < n; ++j) d.mu0[j] = (j % 2 == 0) ? 0.8 : 1.2;
    d.mu = d.mu0;
    d.rho0 = 0.25;
  } else if (name == "S2") {
    d.mu0.resize(n);
    for (int j = 0; j < n; ++j) d.mu0[j] = (j % 2 == 0) ? 0.8 : 1.2;
    d.mu = d.mu0;
    d.mu[0] += 0.6;
    d.mu[1] += 0.4;
    d.mu[2] += 0.2;
    d.rho0 = 0.95;
    d.beta1[0] -= 0.05;
    d.beta1[n - 1] += 0.05;
  } else if (name == "S3") {
    d.mu0.resize(n);
    for (int j = 0; j < n; ++j) d.mu0[j] = 1.0 + static_cast<double>(j + 1) / n;
    d.mu = d.mu0;
    d.rho0 = 0.25;
    for (int j = 0; j < 3; ++j) d.beta1[j] -= 0.2;
    for (int j = n - 3; j < n; ++j) d.beta1[j] += 0.2;
  } else {
    throw std::invalid_argument("unknown setting '" + name + "' (expected S1|S2|S3)");
  }
  return d;
}

PopulationMoments population_moments(const DgpConfig& dgp) {
  const int n = dgp.n;
  PopulationMoments p;
  p.sigma = SymMatrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double s0 = (i == j) ? 1.0 : dgp.rho0;
      p.sigma.set(i, j, s0 + dgp.mu0[i] * dgp.mu0[j]);
    }
  p.gamma = p.sigma.mul(dgp.beta0);
  p.mu = dgp.mu;
  p.mu_y = dgp.tau_bar;
  for (int j = 0; j < n; ++j) p.mu_y += dgp.mu[j] * dgp.beta1[j];
  return p;
}

double lambda_oracle(const DgpConfig& dgp) {
  const PopulationMoments p = population_moments(dgp);
  Vector diff(dgp.n);
  for (int j = 0; j < dgp.n; ++j) diff[j] = dgp.beta1[j] - dgp.beta0[j];
  double mx = 0.0;
  for (double v : p.sigma.mul(diff)) mx = std::max(mx, std::fabs(v));
  return mx;
}

namespace {

double empirical_se(const Vector& xs) {
  const std::size_t r = xs.size();
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= static_cast<double>(r);
  double ss = 0.0;
  for (double v : xs) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(r - 1));
}

}  // namespace

std::pair<double, double> normality_ci(const Vector& tau_hats, double tau_hat_r, double alpha) {
  if (tau_hats.size() < 2) throw std::invalid_argument("normality_ci: >= 2 replicates");
  const double hw = normal_quantile(alpha / 2.0) * empirical_se(tau_hats);
  return {tau_hat_r - hw, tau_hat_r + hw};
}

std::pair<double, double> oba_ci(const Vector& tau_hats, double tau_hat_r, double tau_star,
                                 double alpha) {
  const double se = empirical_se(tau_hats);
  if (!(se > 0.0)) throw std::invalid_argument("oba_ci: SE > 0 required");
  double mean = 0.0;
  for (double v : tau_hats) mean += v;
  mean /= static_cast<double>(tau_hats.size());
  const double b2 = (mean - tau_star) * (mean - tau_star) / (se * se);
  const double hw = se * std::sqrt(noncentral_chisq1_quantile(1.0 - alpha, b2));
  return {tau_hat_r - hw, tau_hat_r + hw};
}

McReport run_monte_carlo(const std::string& setting_name, const Vector& tau_bars,
                         const McOptions& opts, const InferConfig& icfg) {
  if (opts.replicates < 2) throw std::invalid_argument("run_monte_carlo: R >= 2");
  McReport report;
  for (std::size_t ti = 0; ti < tau_bars.size(); ++ti) {
    const auto t_start = std::chrono::steady_clock::now();
    DgpConfig dgp = setting(setting_name, 10, tau_bars[ti]);
    dgp.t0 = opts.t0;
    dgp.t1 = opts.t1;
    dgp.phi = opts.phi;
    dgp.sd_u0 = opts.sd_u0;
    dgp.sd_u1 = opts.sd_u1;
    dgp.sd_v = opts.sd_v;
    const double lam =
        (setting_name == "S1" || !opts.lambda_from_oracle) ? 0.0 : lambda_oracle(dgp);
    const PopulationMoments pop = population_moments(dgp);
    const PopulationTarget target = tau_star_population(pop.sigma, pop.gamma, pop.mu_y, pop.mu, lam);

    const int r = opts.replicates;
    Vector tau_hats(r, 0.0);
    std::vector<char> covered(r, 0), degenerate(r, 0);
    Vector lengths(r, 0.0);
    RngStream base(opts.seed, RngStream::mix64(0x51ABu, ti));
    parallel_for(static_cast<std::size_t>(r), opts.threads, [&](std::size_t rep) {
      try {
        RngStream rng = base.substream(rep);
        const PanelData panel = gen_panel(dgp, rng);
        DroscConfig dcfg;
        dcfg.lambda = lam;
        const DroscEstimate est = estimate(panel, dcfg);
        tau_hats[rep] = est.tau_hat;
        InferConfig cfg = icfg;
        cfg.lambda = lam;
        cfg.seed = RngStream::mix64(opts.seed, rep * 1000003ull + ti);
        cfg.threads = 1;  // parallelism lives at the replicate level here
        const CiResult ci = run_inference(panel, cfg);
        covered[rep] = ci_contains(ci, target.tau_star) ? 1 : 0;
        lengths[rep] = ci.total_measure;
      } catch (const std::exception&) {
        degenerate[rep] = 1;  // counted and reported, never covered
      }
    });

    McRow row;
    row.setting = setting_name;
    row.tau_bar = tau_bars[ti];
    row.tau_star = target.tau_star;
    row.replicates = r;
    int cov = 0, ncov = 0, ocov = 0, degen = 0;
    double msum = 0.0, bias = 0.0, nlen = 0.0;
    for (int i = 0; i < r; ++i) {
      cov += covered[i];
      degen += degenerate[i];
      msum += lengths[i];
      bias += tau_hats[i] - target.tau_star;
      const auto nci = normality_ci(tau_hats, tau_hats[i], icfg.alpha);
      nlen += nci.second - nci.first;
      if (target.tau_star >= nci.first && target.tau_star <= nci.second) ++ncov;
      const auto oci = oba_ci(tau_hats, tau_hats[i], target.tau_star, icfg.alpha);
      if (target.tau_star >= oci.first && target.tau_star <= oci.second) ++ocov;
    }
    row.coverage = static_cast<double>(cov) / r;
    row.normality_coverage = static_cast<double>(ncov) / r;
    row.oba_coverage = static_cast<double>(ocov) / r;
    row.mean_union_length = msum / r;
    row.mean_normality_length = nlen / r;
    row.mean_bias = bias / r;
    row.degenerate = degen;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    report.rows.push_back(std::move(row));
  }
  // group rows by identical tau_star: minimum coverage and maximum length
  for (auto& row : report.rows) {
    double min_cov = row.coverage;
    double max_len = row.mean_union_length;
    for (const auto& other : report.rows) {
      if (std::fabs(other.tau_star - row.tau_star) <= 1e-9) {
        min_cov = std::min(min_cov, other.coverage);
        max_len = std::max(max_len, other.mean_union_length);
      }
    }
    row.group_min_coverage = min_cov;
    row.group_max_length = max_len;
  }
  return report;
}

void McReport::to_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << "setting,tau_bar,tau_star,coverage,normality_coverage,oba_coverage,"
         "mean_union_length,mean_normality_length,mean_bias,group_min_coverage,"
         "group_max_length,replicates,degenerate,seconds\n";
  for (const auto& r : rows) {
    out << r.setting << ',' << r.tau_bar << ',' << r.tau_star << ',' << r.coverage << ','
        << r.normality_coverage << ',' << r.oba_coverage << ',' << r.mean_union_length << ','
        << r.mean_normality_length << ',' << r.mean_bias << ',' << r.group_min_coverage << ','
        << r.group_max_length << ',' << r.replicates << ',' << r.degenerate << ',' << r.seconds
        << '\n';
  }
}

void McReport::to_json(const std::string& path) const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"setting", r.setting},
                 {"tau_bar", r.tau_bar},
                 {"tau_star", r.tau_star},
                 {"coverage", r.coverage},
                 {"normality_coverage", r.normality_coverage},
                 {"oba_coverage", r.oba_coverage},
                 {"mean_union_length", r.mean_union_length},
                 {"mean_normality_length", r.mean_normality_length},
                 {"mean_bias", r.mean_bias},
                 {"group_min_coverage", r.group_min_coverage},
                 {"group_max_length", r.group_max_length},
                 {"replicates", r.replicates},
                 {"degenerate", r.degenerate},
                 {"seconds", r.seconds}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << j.dump(2) << '\n';
}

Matrix stability_experiment(const PanelData& panel, const Vector& noise_cs, int replicates,
                            std::uint64_t seed, int threads) {
  const std::size_t t0 = panel.t0;
  const std::size_t n = panel.n();
  // per-series pre-period standard deviations
  Vector sd_x(n, 0.0);
  double sd_y = 0.0;
  {
    Vector mean_x(n, 0.0);
    double mean_y = 0.0;
    for (std::size_t t = 0; t < t0; ++t) {
      mean_y += panel.y_treated[t];
      for (std::size_t j = 0; j < n; ++j) mean_x[j] += panel.x_controls(t, j);
    }
    mean_y /= t0;
    for (auto& v : mean_x) v /= t0;
    for (std::size_t t = 0; t < t0; ++t) {
      sd_y += (panel.y_treated[t] - mean_y) * (panel.y_treated[t] - mean_y);
      for (std::size_t j = 0; j < n; ++j) {
        const double d = panel.x_controls(t, j) - mean_x[j];
        sd_x[j] += d * d;
      }
    }
    sd_y = std::sqrt(sd_y / (t0 - 1));
    for (auto& v : sd_x) v = std::sqrt(v / (t0 - 1));
  }
  Matrix freq(noise_cs.size(), n, 0.0);
  for (std::size_t ci = 0; ci < noise_cs.size(); ++ci) {
    const double c = noise_cs[ci];
    const int reps = (c == 0.0) ? 1 : replicates;
    std::vector<std::vector<char>> selected(reps, std::vector<char>(n, 0));
    std::vector<char> failed(reps, 0);
    RngStream base(seed, RngStream::mix64(0x57ABu, ci));
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t rep) {
      try {
        RngStream rng = base.substream(rep);
        Matrix xp(t0, n);
        Vector yp(t0);
        for (std::size_t t = 0; t < t0; ++t) {
          yp[t] = panel.y_treated[t] + c * sd_y * rng.normal();
          for (std::size_t j = 0; j < n; ++j)
            xp(t, j) = panel.x_controls(t, j) + c * sd_x[j] * rng.normal();
        }
        const Vector beta = simplex_cls(xp, yp);
        for (std::size_t j = 0; j < n; ++j) selected[rep][j] = beta[j] > 1e-3 ? 1 : 0;
      } catch (const std::exception&) {
        failed[rep] = 1;
      }
    });
    for (char f : failed)
      if (f) throw NumericError("stability_experiment: a replicate fit failed");
    for (int rep = 0; rep < reps; ++rep)
      for (std::size_t j = 0; j < n; ++j)
        freq(ci, j) += selected[rep][j] / static_cast<double>(reps);
  }
  return freq;
}

std::vector<WeightShiftRow> weight_shift_experiment(const PanelData& panel, const Vector& kappas,
                                                    int replicates, double tau_bar, double noise_c,
                                                    std::uint64_t seed, int threads) {
  const std::size_t t0 = panel.t0;
  const std::size_t t = panel.t();
  const std::size_t n = panel.n();
  auto unit_index = [&](const std::string& name) {
    for (std::size_t j = 0; j < n; ++j)
      if (panel.unit_names[j] == name) return j;
    throw IoError("weight_shift_experiment: unit '" + name + "' not found in panel");
  };
  const std::size_t j_bal = unit_index("Baleares");
  const std::size_t j_rio = unit_index("Rioja");
  const std::size_t j_cat = unit_index("Cataluna");
  const std::size_t j_ast = unit_index("Asturias");

  const ScFit base_fit = fit_sc(panel);
  const Vector beta0 = base_fit.beta_sc;

  // per-series pre sd for the noise injection
  Vector sd_x(n, 0.0);
  {
    Vector mean_x(n, 0.0);
    for (std::size_t s = 0; s < t0; ++s)
      for (std::size_t j = 0; j < n; ++j) mean_x[j] += panel.x_controls(s, j);
    for (auto& v : mean_x) v /= t0;
    for (std::size_t s = 0; s < t0; ++s)
      for (std::size_t j = 0; j < n; ++j) {
        const double d = panel.x_controls(s, j) - mean_x[j];
        sd_x[j] += d * d;
      }
    for (auto& v : sd_x) v = std::sqrt(v / (t0 - 1));
  }

  std::vector<WeightShiftRow> rows;
  for (std::size_t ki = 0; ki < kappas.size(); ++ki) {
    const double kappa = kappas[ki];
    Vector beta1 = beta0;
    beta1[j_cat] += kappa * beta0[j_bal];
    beta1[j_ast] += kappa * beta0[j_rio];
    beta1[j_bal] *= (1.0 - kappa);
    beta1[j_rio] *= (1.0 - kappa);

    Vector taus(replicates, 0.0);
    std::vector<char> failed(replicates, 0);
    RngStream base(seed, RngStream::mix64(0x3A11u, ki));
    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t rep) {
      try {
        RngStream rng = base.substream(rep);
        Matrix x(t, n);
        for (std::size_t s = 0; s < t; ++s)
          for (std::size_t j = 0; j < n; ++j)
            x(s, j) = panel.x_controls(s, j) + noise_c * sd_x[j] * rng.normal();
        Vector y(t, 0.0);
        const double sd_u = noise_c * base_fit.sigma_hat_resid;
        for (std::size_t s = 0; s < t; ++s) {
          const Vector& b = (s < t0) ? beta0 : beta1;
          double v = sd_u * rng.normal();
          for (std::size_t j = 0; j < n; ++j) v += x(s, j) * b[j];
          if (s >= t0) v += tau_bar;
          y[s] = v;
        }
        const PanelData sim = make_panel(std::move(y), std::move(x), t0, panel.treated_name,
                                         panel.unit_names, panel.time_labels);
        taus[rep] = fit_sc(sim).tau_sc;
      } catch (const std::exception&) {
        failed[rep] = 1;
      }
    });
    for (char f : failed)
      if (f) throw NumericError("weight_shift_experiment: a replicate fit failed");
    WeightShiftRow row;
    row.kappa = kappa;
    double mean = 0.0;
    for (double v : taus) mean += v;
    mean /= replicates;
    double ss = 0.0;
    for (double v : taus) ss += (v - mean) * (v - mean);
    row.mean_tau_sc = mean;
    row.sd_tau_sc = std::sqrt(ss / std::max(1, replicates - 1));
    row.bias = mean - tau_bar;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace drosc
