#pragma once

#include <utility>

#include "drosc/moments.hpp"
#include "drosc/numerics.hpp"
#include "drosc/panel.hpp"
#include "drosc/sc.hpp"

namespace drosc {

struct DroscConfig {
  double lambda = 0.0;
  double rho_constant_init = 0.01;
  double rho_growth = 1.25;
  double log_exponent_a = 0.5;
  int max_escalations = 60;
};

enum class IntervalCase { PositiveInterval, NegativeInterval, ZeroInside };

struct DroscEstimate {
  double tau_hat = 0.0;
  Vector beta_hat;                         // one attaining weight (not unique)
  std::pair<double, double> tau_interval;  // range of mu_y - mu'beta over the set
  double rho_final = 0.0;
  int escalations = 0;
  IntervalCase icase = IntervalCase::ZeroInside;
};

// rho = C [sigma_hat max_j rms_j(pre) + lambda] [log(max{T0,N})]^a / sqrt(T0)
double rho_rule(const PanelData& panel, const ScFit& sc, double lambda, double c, double a);

// lo if lo > 0; hi if hi < 0; 0 otherwise.
double clamp_to_zero(double lo, double hi);

// Full estimation: moments, data-driven rho with x1.25 escalation until the
// polytope is non-empty, tau range by two LPs, clamp to zero.
DroscEstimate estimate(const PanelData& panel, const DroscConfig& cfg);

struct PopulationTarget {
  double tau_star = 0.0;
  std::pair<double, double> interval;
};

// Same LP + clamp pipeline at population quantities with slack exactly lambda.
PopulationTarget tau_star_population(const SymMatrix& sigma, const Vector& gamma, double mu_y,
                                     const Vector& mu, double lambda);

}  // namespace drosc
