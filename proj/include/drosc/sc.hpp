#pragma once

#include "drosc/numerics.hpp"
#include "drosc/panel.hpp"

namespace drosc {

// Classical synthetic control fit on pre-treatment outcomes.
struct ScFit {
  Vector beta_sc;             // simplex weights
  double tau_sc = 0.0;        // mean post-period gap
  double sigma_hat_resid = 0.0;  // sqrt of (T0-1)^{-1} sum of squared pre residuals
  double pre_rmse = 0.0;
};

ScFit fit_sc(const PanelData& panel);

}  // namespace drosc
