#include "drosc/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "drosc/drosc.hpp"
#include "drosc/errors.hpp"
#include "drosc/infer.hpp"
#include "drosc/panel.hpp"
#include "drosc/sc.hpp"
#include "drosc/simlab.hpp"

namespace drosc {

namespace {

using nlohmann::json;

Vector parse_grid(const std::string& spec) {
  // "lo:hi:step"
  double lo, hi, step;
  char c1, c2;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':')
    throw CLI::ValidationError("--lambda-grid", "expected lo:hi:step, got '" + spec + "'");
  if (step <= 0.0 || hi < lo)
    throw CLI::ValidationError("--lambda-grid", "grid must be non-empty and increasing");
  Vector grid;
  for (double v = lo; v <= hi + step * 1e-9; v += step) grid.push_back(v);
  return grid;
}

std::uint64_t seed_from_env_or(std::uint64_t cli_seed, bool seed_given) {
  if (seed_given) return cli_seed;
  if (const char* env = std::getenv("DROSC_SEED")) return std::strtoull(env, nullptr, 10);
  return cli_seed;
}

json beta_json(const Vector& beta, const std::vector<std::string>& names) {
  json arr = json::array();
  for (std::size_t j = 0; j < beta.size(); ++j)
    arr.push_back({{"unit", names[j]}, {"weight", beta[j]}});
  return arr;
}

const char* case_name(IntervalCase c) {
  switch (c) {
    case IntervalCase::PositiveInterval: return "positive-interval";
    case IntervalCase::NegativeInterval: return "negative-interval";
    default: return "zero-inside";
  }
}

json estimate_record(const PanelData& panel, const DroscEstimate& est, const ScFit& sc,
                     double lambda) {
  return json{{"lambda", lambda},
              {"tau_hat", est.tau_hat},
              {"beta_hat", beta_json(est.beta_hat, panel.unit_names)},
              {"tau_interval", {est.tau_interval.first, est.tau_interval.second}},
              {"rho_final", est.rho_final},
              {"escalations", est.escalations},
              {"case", case_name(est.icase)},
              {"sc", {{"tau_sc", sc.tau_sc},
                      {"beta_sc", beta_json(sc.beta_sc, panel.unit_names)},
                      {"sigma_hat", sc.sigma_hat_resid},
                      {"pre_rmse", sc.pre_rmse}}}};
}

json infer_record(const CiResult& ci, const InferConfig& cfg) {
  json comps = json::array();
  for (const auto& c : ci.components) comps.push_back({c.first, c.second});
  return json{{"lambda", cfg.lambda},
              {"alpha", cfg.alpha},
              {"alpha0", cfg.alpha0},
              {"draws", cfg.m_draws},
              {"seed", cfg.seed},
              {"cov", cfg.cov_mode == CovMode::Iid ? "iid" : "hac"},
              {"tau_hat", ci.point_estimate},
              {"ci", {{"components", comps},
                      {"hull", {ci.hull.first, ci.hull.second}},
                      {"total_measure", ci.total_measure},
                      {"half_width", ci.half_width}}},
              {"counts", {{"kept", ci.kept_count},
                          {"refined", ci.refined_count},
                          {"feasible", ci.feasible_count}}},
              {"rho_m", ci.rho_m_final},
              {"rho_m_escalations", ci.rho_m_escalations},
              {"used_refined", ci.used_refined}};
}

void write_text(const std::string& out_path, const std::string& text, std::ostream& stdout_) {
  if (out_path.empty()) {
    stdout_ << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw IoError("cannot write output file: " + out_path);
  f << text;
}

struct CommonOpts {
  std::string panel_path;
  std::size_t t0 = 0;
  double lambda = 0.0;
  std::string lambda_grid;
  double alpha = 0.05;
  double alpha0 = 0.01;
  int draws = 500;
  double feasible_prop = 0.10;
  std::string cov = "iid";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::string out_path;
  std::string format = "json";
};

InferConfig make_infer_cfg(const CommonOpts& o, double lambda) {
  InferConfig cfg;
  cfg.m_draws = o.draws;
  cfg.alpha = o.alpha;
  cfg.alpha0 = o.alpha0;
  cfg.lambda = lambda;
  cfg.feasible_prop = o.feasible_prop;
  cfg.cov_mode = (o.cov == "hac") ? CovMode::Hac : CovMode::Iid;
  cfg.seed = seed_from_env_or(o.seed, o.seed_given);
  cfg.threads = o.threads;
  return cfg;
}

// Flat key,value rendering of a JSON record for --format csv.
void flatten_record(const json& j, const std::string& prefix, std::ostringstream& csv) {
  for (const auto& [key, val] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (val.is_object())
      flatten_record(val, name, csv);
    else
      csv << name << ',' << val.dump() << '\n';
  }
}

void emit_record(const json& j, const CommonOpts& o, std::ostream& out) {
  if (o.format == "csv") {
    std::ostringstream csv;
    csv << "field,value\n";
    flatten_record(j, "", csv);
    write_text(o.out_path, csv.str(), out);
  } else {
    write_text(o.out_path, j.dump(2) + "\n", out);
  }
}

int cmd_estimate(const CommonOpts& o, std::ostream& out) {
  const PanelData panel = load_panel(o.panel_path, o.t0);
  DroscConfig dcfg;
  dcfg.lambda = o.lambda;
  const DroscEstimate est = estimate(panel, dcfg);
  const ScFit sc = fit_sc(panel);
  emit_record(estimate_record(panel, est, sc, o.lambda), o, out);
  return 0;
}

int cmd_infer(const CommonOpts& o, std::ostream& out) {
  const PanelData panel = load_panel(o.panel_path, o.t0);
  const InferConfig cfg = make_infer_cfg(o, o.lambda);
  const CiResult ci = run_inference(panel, cfg);
  emit_record(infer_record(ci, cfg), o, out);
  return 0;
}

int cmd_sweep(const CommonOpts& o, std::ostream& out) {
  const PanelData panel = load_panel(o.panel_path, o.t0);
  const Vector grid = parse_grid(o.lambda_grid);
  std::ostringstream csv;
  csv << "lambda,tau_hat,ci_lo_hull,ci_hi_hull,union_measure,status\n";
  csv << std::setprecision(12);
  for (double lam : grid) {
    csv << lam << ',';
    DroscConfig dcfg;
    dcfg.lambda = lam;
    double tau = 0.0;
    bool est_ok = true;
    try {
      tau = estimate(panel, dcfg).tau_hat;
    } catch (const std::exception&) {
      est_ok = false;
    }
    if (!est_ok) {
      csv << ",,,,estimate_failed\n";
      continue;
    }
    csv << tau << ',';
    try {
      const CiResult ci = run_inference(panel, make_infer_cfg(o, lam));
      csv << ci.hull.first << ',' << ci.hull.second << ',' << ci.total_measure << ",ok\n";
    } catch (const std::exception&) {
      csv << ",,,inference_failed\n";
    }
  }
  write_text(o.out_path, csv.str(), out);
  return 0;
}

struct SimulateOpts {
  std::string setting = "S1";
  std::string tau_bars = "-1.5:1.5:0.5";
  int t0 = 25, t1 = 25;
  double phi = 0.0;
  int replicates = 500;
  std::string out_prefix = "mcreport";
  bool oracle_lambda = true;
};

int cmd_simulate(const CommonOpts& o, const SimulateOpts& s, std::ostream& out) {
  McOptions opts;
  opts.replicates = s.replicates;
  opts.t0 = s.t0;
  opts.t1 = s.t1;
  opts.phi = s.phi;
  opts.lambda_from_oracle = s.oracle_lambda;
  opts.threads = o.threads;
  opts.seed = seed_from_env_or(o.seed, o.seed_given);
  const InferConfig icfg = make_infer_cfg(o, 0.0);
  const McReport report = run_monte_carlo(s.setting, parse_grid(s.tau_bars), opts, icfg);
  report.to_csv(s.out_prefix + ".csv");
  report.to_json(s.out_prefix + ".json");
  out << "setting  tau_bar  tau_star  coverage  norm_cov  mean_len  bias\n";
  for (const auto& r : report.rows) {
    out << r.setting << "  " << std::setw(7) << r.tau_bar << "  " << std::setw(8) << r.tau_star
        << "  " << std::setw(8) << r.coverage << "  " << std::setw(8) << r.normality_coverage
        << "  " << std::setw(8) << r.mean_union_length << "  " << r.mean_bias << "\n";
  }
  out << "wrote " << s.out_prefix << ".csv and " << s.out_prefix << ".json\n";
  return 0;
}

struct ExperimentOpts {
  std::string type = "stability";
  std::string noise_cs = "0:0.15:0.05";
  std::string kappas = "0.05,0.1,0.2,0.3,0.4";
  int replicates = 200;
  double tau_bar = 0.0;
  double noise_c = 0.05;
};

Vector parse_list(const std::string& s) {
  Vector out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

int cmd_experiment(const CommonOpts& o, const ExperimentOpts& e, std::ostream& out) {
  const PanelData panel = load_panel(o.panel_path, o.t0);
  std::ostringstream csv;
  csv << std::setprecision(10);
  if (e.type == "stability") {
    const Vector cs = e.noise_cs.find(':') != std::string::npos ? parse_grid(e.noise_cs)
                                                                : parse_list(e.noise_cs);
    const Matrix freq = stability_experiment(panel, cs, e.replicates,
                                             seed_from_env_or(o.seed, o.seed_given), o.threads);
    csv << "unit,c,frequency\n";
    for (std::size_t ci = 0; ci < cs.size(); ++ci)
      for (std::size_t j = 0; j < panel.n(); ++j)
        csv << panel.unit_names[j] << ',' << cs[ci] << ',' << freq(ci, j) << '\n';
  } else if (e.type == "weight-shift") {
    const Vector ks = e.kappas.find(':') != std::string::npos ? parse_grid(e.kappas)
                                                              : parse_list(e.kappas);
    const auto rows = weight_shift_experiment(panel, ks, e.replicates, e.tau_bar, e.noise_c,
                                              seed_from_env_or(o.seed, o.seed_given), o.threads);
    csv << "kappa,mean_tau_sc,sd_tau_sc,bias\n";
    for (const auto& r : rows)
      csv << r.kappa << ',' << r.mean_tau_sc << ',' << r.sd_tau_sc << ',' << r.bias << '\n';
  } else {
    throw CLI::ValidationError("--type", "expected stability|weight-shift");
  }
  write_text(o.out_path, csv.str(), out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributionally robust synthetic control estimation and inference"};
  app.require_subcommand(1);

  CommonOpts o;
  SimulateOpts s;
  ExperimentOpts e;

  auto add_common = [&](CLI::App* cmd, bool needs_panel) {
    if (needs_panel) {
      cmd->add_option("--panel", o.panel_path, "wide CSV panel file")->required();
      cmd->add_option("--t0", o.t0, "pre-treatment length")->required();
    }
    cmd->add_option("--alpha", o.alpha, "confidence level alpha");
    cmd->add_option("--alpha0", o.alpha0, "tail-filter constant alpha0");
    cmd->add_option("--draws", o.draws, "perturbation draws M");
    cmd->add_option("--feasible-prop", o.feasible_prop, "target feasible proportion");
    cmd->add_option("--cov", o.cov, "covariance mode")->check(CLI::IsMember({"iid", "hac"}));
    cmd->add_option("--seed", o.seed, "RNG seed (env DROSC_SEED as fallback)")
        ->each([&](const std::string&) { o.seed_given = true; });
    cmd->add_option("--threads", o.threads, "worker thread cap (1 = serial)");
    cmd->add_option("--out", o.out_path, "output path (default stdout)");
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  };

  auto* c_est = app.add_subcommand("estimate", "point estimation at a single lambda");
  add_common(c_est, true);
  c_est->add_option("--lambda", o.lambda, "weight-shift parameter");

  auto* c_inf = app.add_subcommand("infer", "perturbation confidence set at a single lambda");
  add_common(c_inf, true);
  c_inf->add_option("--lambda", o.lambda, "weight-shift parameter");

  auto* c_swp = app.add_subcommand("sweep", "lambda sweep with estimates and confidence hulls");
  add_common(c_swp, true);
  c_swp->add_option("--lambda-grid", o.lambda_grid, "grid lo:hi:step")->required();

  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo experiment suite");
  add_common(c_sim, false);
  c_sim->add_option("--setting", s.setting, "S1|S2|S3")
      ->required()
      ->check(CLI::IsMember({"S1", "S2", "S3"}));
  c_sim->add_option("--tau-grid", s.tau_bars, "tau_bar grid lo:hi:step");
  c_sim->add_option("--sim-t0", s.t0, "pre-period length");
  c_sim->add_option("--sim-t1", s.t1, "post-period length");
  c_sim->add_option("--phi", s.phi, "AR(1) coefficient");
  c_sim->add_option("--replicates", s.replicates, "Monte Carlo replicates");
  c_sim->add_option("--out-prefix", s.out_prefix, "report file prefix");
  c_sim->add_flag("!--no-oracle-lambda", s.oracle_lambda, "disable the oracle lambda rule");

  auto* c_exp = app.add_subcommand("experiment", "stability / weight-shift diagnostics");
  add_common(c_exp, true);
  c_exp->add_option("--type", e.type, "stability|weight-shift")
      ->check(CLI::IsMember({"stability", "weight-shift"}));
  c_exp->add_option("--noise-cs", e.noise_cs, "noise levels (grid lo:hi:step or list)");
  c_exp->add_option("--kappas", e.kappas, "weight-shift fractions (list or grid)");
  c_exp->add_option("--replicates", e.replicates, "replicates per level");
  c_exp->add_option("--tau-bar", e.tau_bar, "true effect used in generation");
  c_exp->add_option("--noise", e.noise_c, "noise level for weight-shift generation");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& pe) {
    return app.exit(pe, out, err);
  }

  try {
    if (c_est->parsed() || c_inf->parsed()) {
      if (!(o.alpha > o.alpha0))
        throw CLI::ValidationError("--alpha", "alpha must exceed alpha0");
    }
    if (c_est->parsed()) return cmd_estimate(o, out);
    if (c_inf->parsed()) return cmd_infer(o, out);
    if (c_swp->parsed()) return cmd_sweep(o, out);
    if (c_sim->parsed()) return cmd_simulate(o, s, out);
    if (c_exp->parsed()) return cmd_experiment(o, e, out);
  } catch (const CLI::Error& ce) {
    return app.exit(ce, out, err);
  } catch (const IoError& ex) {
    err << "error (io): " << ex.what() << "\n";
    return 1;
  } catch (const InfeasibleError& ex) {
    err << "error (infeasible): " << ex.what() << "\n";
    return 2;
  } catch (const InferenceError& ex) {
    err << "error (inference): " << ex.what() << "\n";
    return 3;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace drosc
