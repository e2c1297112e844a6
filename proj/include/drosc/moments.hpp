#pragma once

#include <cstddef>
#include <utility>

#include "drosc/numerics.hpp"
#include "drosc/panel.hpp"

namespace drosc {

// Pre/post moment estimators: Sigma_hat = mean of X_t X_t', gamma_hat = mean of
// X_t Y_t over the pre period; mu_y_hat, mu_hat post-period means.
struct MomentSet {
  SymMatrix sigma_hat;
  Vector gamma_hat;
  double mu_y_hat = 0.0;
  Vector mu_hat;
  std::size_t t0 = 0;
  std::size_t t1 = 0;
};

// Covariance estimates of the four moment blocks. v_sigma lives on the vecl
// coordinates of the lower triangle (column-major), dimension N(N+1)/2.
struct CovSet {
  SymMatrix v_sigma;
  SymMatrix v_gamma;
  double v_y = 0.0;
  SymMatrix v_mu;
  bool inflated = false;
};

// Relative ridge used by inflate(): the enlargement keeping each block
// factorizable. See README (method notes) for why this is not the full
// max-entry magnitude.
inline constexpr double kInflateRel = 1e-8;

std::size_t vecl_dim(std::size_t n);
// vecl index of (i, j) with i >= j, column-major lower triangle.
std::size_t vecl_index(std::size_t i, std::size_t j, std::size_t n);
Vector vecl(const SymMatrix& a);

std::pair<SymMatrix, Vector> pre_moments(const PanelView& pre);
std::pair<double, Vector> post_moments(const PanelView& post);
MomentSet compute_moments(const PanelData& panel);

// i.i.d.-regime covariances with the 1/(T(T-1)) scaling.
CovSet covariances_iid(const PanelData& panel);

// Newey-West / Bartlett-kernel long-run covariances of the same blocks, scaled
// to the variance of the sample mean. bandwidth < 0 selects
// floor(4 (T/100)^{2/9}) per block length; bandwidth 0 reduces to the i.i.d.
// estimator exactly.
CovSet covariances_hac(const PanelData& panel, int bandwidth = -1);

// Adds kInflateRel * ||V||_max * I to the three matrix blocks; v_y untouched.
CovSet inflate(const CovSet& cov);

}  // namespace drosc
