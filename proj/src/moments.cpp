#include "drosc/moments.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "drosc/errors.hpp"

namespace drosc {

std::size_t vecl_dim(std::size_t n) { return n * (n + 1) / 2; }

std::size_t vecl_index(std::size_t i, std::size_t j, std::size_t n) {
  // column j contributes n - j entries; (i, j) sits i - j below the diagonal
  return j * n - j * (j + 1) / 2 + i;
}

Vector vecl(const SymMatrix& a) {
  const std::size_t n = a.dim();
  Vector out(vecl_dim(n), 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j; i < n; ++i) out[vecl_index(i, j, n)] = a(i, j);
  return out;
}

std::pair<SymMatrix, Vector> pre_moments(const PanelView& pre) {
  const std::size_t t0 = pre.rows();
  const std::size_t n = pre.cols();
  if (t0 < 1) throw NumericError("pre_moments: t0 >= 1 required");
  SymMatrix sigma(n);
  Vector gamma(n, 0.0);
  for (std::size_t t = 0; t < t0; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = pre.x(t, i);
      gamma[i] += xi * pre.y(t);
      for (std::size_t j = 0; j <= i; ++j) sigma.add(i, j, xi * pre.x(t, j));
    }
  }
  const double inv = 1.0 / static_cast<double>(t0);
  for (std::size_t i = 0; i < n; ++i) {
    gamma[i] *= inv;
    for (std::size_t j = 0; j <= i; ++j) sigma.set(i, j, sigma(i, j) * inv);
  }
  return {sigma, gamma};
}

std::pair<double, Vector> post_moments(const PanelView& post) {
  const std::size_t t1 = post.rows();
  const std::size_t n = post.cols();
  if (t1 < 1) throw NumericError("post_moments: t1 >= 1 required");
  double mu_y = 0.0;
  Vector mu(n, 0.0);
  for (std::size_t t = 0; t < t1; ++t) {
    mu_y += post.y(t);
    for (std::size_t j = 0; j < n; ++j) mu[j] += post.x(t, j);
  }
  const double inv = 1.0 / static_cast<double>(t1);
  mu_y *= inv;
  for (auto& v : mu) v *= inv;
  return {mu_y, mu};
}

MomentSet compute_moments(const PanelData& panel) {
  const auto [pre, post] = split(panel);
  MomentSet m;
  auto pm = pre_moments(pre);
  m.sigma_hat = std::move(pm.first);
  m.gamma_hat = std::move(pm.second);
  auto qm = post_moments(post);
  m.mu_y_hat = qm.first;
  m.mu_hat = std::move(qm.second);
  m.t0 = panel.t0;
  m.t1 = panel.t1();
  return m;
}

namespace {

// Per-observation series of the four blocks.
struct BlockSeries {
  std::vector<Vector> z_sigma;  // vecl(X_t X_t'), pre
  std::vector<Vector> z_gamma;  // X_t Y_t, pre
  Vector z_y;                   // Y_t, post
  std::vector<Vector> z_mu;     // X_t, post
};

BlockSeries block_series(const PanelData& panel) {
  const auto [pre, post] = split(panel);
  const std::size_t n = panel.n();
  BlockSeries s;
  for (std::size_t t = 0; t < pre.rows(); ++t) {
    Vector zs(vecl_dim(n));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = j; i < n; ++i)
        zs[vecl_index(i, j, n)] = pre.x(t, i) * pre.x(t, j);
    s.z_sigma.push_back(std::move(zs));
    Vector zg(n);
    for (std::size_t j = 0; j < n; ++j) zg[j] = pre.x(t, j) * pre.y(t);
    s.z_gamma.push_back(std::move(zg));
  }
  for (std::size_t t = 0; t < post.rows(); ++t) {
    s.z_y.push_back(post.y(t));
    Vector zm(n);
    for (std::size_t j = 0; j < n; ++j) zm[j] = post.x(t, j);
    s.z_mu.push_back(std::move(zm));
  }
  return s;
}

// Bartlett long-run covariance with the 1/(T(T-1)) mean-variance scaling;
// bandwidth 0 is the plain i.i.d. estimator.
SymMatrix hac_block(const std::vector<Vector>& z, int bw) {
  const std::size_t t = z.size();
  const std::size_t d = z.front().size();
  Vector mean(d, 0.0);
  for (const auto& row : z)
    for (std::size_t k = 0; k < d; ++k) mean[k] += row[k];
  for (auto& v : mean) v /= static_cast<double>(t);
  std::vector<Vector> dev(t, Vector(d));
  for (std::size_t r = 0; r < t; ++r)
    for (std::size_t k = 0; k < d; ++k) dev[r][k] = z[r][k] - mean[k];
  SymMatrix full(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < t; ++r) acc += dev[r][i] * dev[r][j];
      for (int lag = 1; lag <= bw; ++lag) {
        const double w = 1.0 - static_cast<double>(lag) / (bw + 1.0);
        double g = 0.0;
        for (std::size_t r = static_cast<std::size_t>(lag); r < t; ++r)
          g += dev[r][i] * dev[r - lag][j] + dev[r][j] * dev[r - lag][i];
        acc += w * g;
      }
      full.set(i, j, acc / (static_cast<double>(t) * (t - 1.0)));
    }
  return full;
}

double hac_scalar(const Vector& z, int bw) {
  std::vector<Vector> wrapped(z.size(), Vector(1));
  for (std::size_t r = 0; r < z.size(); ++r) wrapped[r][0] = z[r];
  return hac_block(wrapped, bw)(0, 0);
}

int auto_bandwidth(std::size_t t) {
  return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(t) / 100.0, 2.0 / 9.0)));
}

}  // namespace

CovSet covariances_iid(const PanelData& panel) {
  if (panel.t0 < 2 || panel.t1() < 2)
    throw NumericError("covariances_iid: t0 >= 2 and t1 >= 2 required");
  const auto s = block_series(panel);
  CovSet c;
  c.v_sigma = hac_block(s.z_sigma, 0);
  c.v_gamma = hac_block(s.z_gamma, 0);
  c.v_y = hac_scalar(s.z_y, 0);
  c.v_mu = hac_block(s.z_mu, 0);
  return c;
}

CovSet covariances_hac(const PanelData& panel, int bandwidth) {
  if (panel.t0 < 4 || panel.t1() < 4)
    throw NumericError("covariances_hac: t0 >= 4 and t1 >= 4 required");
  const int bw_pre = bandwidth < 0 ? auto_bandwidth(panel.t0) : bandwidth;
  const int bw_post = bandwidth < 0 ? auto_bandwidth(panel.t1()) : bandwidth;
  if (bw_pre >= static_cast<int>(panel.t0) || bw_post >= static_cast<int>(panel.t1()))
    throw NumericError("covariances_hac: bandwidth >= series length");
  const auto s = block_series(panel);
  CovSet c;
  c.v_sigma = hac_block(s.z_sigma, bw_pre);
  c.v_gamma = hac_block(s.z_gamma, bw_pre);
  c.v_y = hac_scalar(s.z_y, bw_post);
  c.v_mu = hac_block(s.z_mu, bw_post);
  return c;
}

CovSet inflate(const CovSet& cov) {
  CovSet out = cov;
  auto bump = [](SymMatrix& m) {
    const double ridge = kInflateRel * m.max_abs();
    for (std::size_t i = 0; i < m.dim(); ++i) m.add(i, i, ridge);
  };
  bump(out.v_sigma);
  bump(out.v_gamma);
  bump(out.v_mu);
  out.inflated = true;
  return out;
}

}  // namespace drosc
