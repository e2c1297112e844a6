#include "drosc/sc.hpp"

#include <cmath>

#include "drosc/errors.hpp"
#include "drosc/lpsolve.hpp"

namespace drosc {

ScFit fit_sc(const PanelData& panel) {
  if (panel.t0 < 2) throw NumericError("fit_sc: t0 >= 2 required");
  const auto [pre, post] = split(panel);
  const std::size_t t0 = pre.rows();
  const std::size_t n = panel.n();
  Matrix xp(t0, n);
  Vector yp(t0);
  for (std::size_t r = 0; r < t0; ++r) {
    yp[r] = pre.y(r);
    for (std::size_t j = 0; j < n; ++j) xp(r, j) = pre.x(r, j);
  }
  ScFit fit;
  fit.beta_sc = simplex_cls(xp, yp);
  double ss = 0.0;
  for (std::size_t r = 0; r < t0; ++r) {
    double pred = 0.0;
    for (std::size_t j = 0; j < n; ++j) pred += xp(r, j) * fit.beta_sc[j];
    const double e = yp[r] - pred;
    ss += e * e;
  }
  fit.sigma_hat_resid = std::sqrt(ss / static_cast<double>(t0 - 1));
  fit.pre_rmse = std::sqrt(ss / static_cast<double>(t0));
  double gap = 0.0;
  for (std::size_t r = 0; r < post.rows(); ++r) {
    double pred = 0.0;
    for (std::size_t j = 0; j < n; ++j) pred += post.x(r, j) * fit.beta_sc[j];
    gap += post.y(r) - pred;
  }
  fit.tau_sc = gap / static_cast<double>(post.rows());
  return fit;
}

}  // namespace drosc
