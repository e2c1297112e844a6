// Independent oracles used to freeze expected values: simplex grid enumeration,
// bisection inverses built on erf, and naive double-loop moment computations.
// These deliberately avoid the library's solver paths.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "drosc/numerics.hpp"

namespace oracles {

using drosc::Matrix;
using drosc::SymMatrix;
using drosc::Vector;

// Enumerates beta on a step-grid of the simplex (compositions of 1/step) and
// reports the best c'beta subject to ||gamma - sigma beta||_inf <= slack.
// feas_pad loosens the membership test to absorb grid quantization.
struct GridResult {
  bool found = false;
  double value = 0.0;
  Vector arg;
};

inline GridResult grid_optimize(const SymMatrix& sigma, const Vector& gamma, double slack,
                                const Vector& c, double step, bool minimize,
                                double feas_pad = 0.0) {
  const std::size_t n = gamma.size();
  const long long k = std::llround(1.0 / step);
  GridResult best;
  Vector beta(n, 0.0);
  std::function<void(std::size_t, long long)> rec = [&](std::size_t j, long long rem) {
    if (j + 1 == n) {
      beta[j] = static_cast<double>(rem) / k;
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) {
        double s = 0.0;
        for (std::size_t q = 0; q < n; ++q) s += sigma(i, q) * beta[q];
        if (std::fabs(gamma[i] - s) > slack + feas_pad) ok = false;
      }
      if (ok) {
        double v = 0.0;
        for (std::size_t q = 0; q < n; ++q) v += c[q] * beta[q];
        if (!best.found || (minimize ? v < best.value : v > best.value)) {
          best.found = true;
          best.value = v;
          best.arg = beta;
        }
      }
      return;
    }
    for (long long t = 0; t <= rem; ++t) {
      beta[j] = static_cast<double>(t) / k;
      rec(j + 1, rem - t);
    }
  };
  rec(0, k);
  return best;
}

// Grid version of the clamped estimand: minimize (mu_y - mu'beta)^2 over the
// polytope grid, reported as mu_y - mu'beta at the argmin.
inline GridResult grid_clamp_tau(const SymMatrix& sigma, const Vector& gamma, double slack,
                                 double mu_y, const Vector& mu, double step,
                                 double feas_pad = 0.0) {
  const std::size_t n = gamma.size();
  const long long k = std::llround(1.0 / step);
  GridResult best;
  Vector beta(n, 0.0);
  std::function<void(std::size_t, long long)> rec = [&](std::size_t j, long long rem) {
    if (j + 1 == n) {
      beta[j] = static_cast<double>(rem) / k;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t q = 0; q < n; ++q) s += sigma(i, q) * beta[q];
        if (std::fabs(gamma[i] - s) > slack + feas_pad) return;
      }
      double mb = 0.0;
      for (std::size_t q = 0; q < n; ++q) mb += mu[q] * beta[q];
      const double tau = mu_y - mb;
      if (!best.found || tau * tau < best.value * best.value) {
        best.found = true;
        best.value = tau;
        best.arg = beta;
      }
      return;
    }
    for (long long t = 0; t <= rem; ++t) {
      beta[j] = static_cast<double>(t) / k;
      rec(j + 1, rem - t);
    }
  };
  rec(0, k);
  return best;
}

// Grid least squares over the simplex: min (1/T)||y - X beta||^2.
inline double grid_cls_objective(const Matrix& x, const Vector& y, double step) {
  const std::size_t n = x.cols();
  const std::size_t t = x.rows();
  const long long k = std::llround(1.0 / step);
  double best = std::numeric_limits<double>::infinity();
  Vector beta(n, 0.0);
  std::function<void(std::size_t, long long)> rec = [&](std::size_t j, long long rem) {
    if (j + 1 == n) {
      beta[j] = static_cast<double>(rem) / k;
      double ss = 0.0;
      for (std::size_t r = 0; r < t; ++r) {
        double pred = 0.0;
        for (std::size_t q = 0; q < n; ++q) pred += x(r, q) * beta[q];
        const double d = y[r] - pred;
        ss += d * d;
      }
      best = std::min(best, ss / static_cast<double>(t));
      return;
    }
    for (long long tt = 0; tt <= rem; ++tt) {
      beta[j] = static_cast<double>(tt) / k;
      rec(j + 1, rem - tt);
    }
  };
  rec(0, k);
  return best;
}

// Mesh brute force: enumerate the first n-2 simplex coordinates on a delta
// grid; with those fixed, the last two coordinates reduce to one free t in
// [0, R] (b_{n-1} = t, b_n = R - t), every constraint row is affine in t, so
// the feasible set is an exactly-computed interval and the affine objective is
// optimized at its endpoints. No feasibility padding is needed.
struct MeshResult {
  bool found = false;
  double value = 0.0;
};

namespace detail {

template <typename CellFn>
void mesh_cells(const SymMatrix& sigma, const Vector& gamma, double slack, std::size_t n,
                double delta, CellFn&& cell) {
  Vector beta(n, 0.0);
  const long long k = (n > 2) ? std::llround(1.0 / delta) : 0;
  std::function<void(std::size_t, long long)> rec = [&](std::size_t j, long long rem) {
    if (j + 2 == n) {
      const double r = static_cast<double>(rem) / std::max<long long>(k, 1);
      // affine in t: row_i(t) = base_i + t * slope_i must lie in
      // [gamma_i - slack, gamma_i + slack]
      double t_lo = 0.0, t_hi = (n > 2) ? r : 1.0;
      if (t_hi < -1e-15) return;
      for (std::size_t i = 0; i < n && t_lo <= t_hi + 1e-15; ++i) {
        double base = 0.0;
        for (std::size_t q = 0; q + 2 < n; ++q) base += sigma(i, q) * beta[q];
        base += sigma(i, n - 1) * ((n > 2) ? r : 1.0);
        const double slope = sigma(i, n - 2) - sigma(i, n - 1);
        const double lo = gamma[i] - slack - base;
        const double hi = gamma[i] + slack - base;
        if (std::fabs(slope) < 1e-300) {
          if (0.0 < lo - 1e-12 || 0.0 > hi + 1e-12) return;
        } else if (slope > 0) {
          t_lo = std::max(t_lo, lo / slope);
          t_hi = std::min(t_hi, hi / slope);
        } else {
          t_lo = std::max(t_lo, hi / slope);
          t_hi = std::min(t_hi, lo / slope);
        }
      }
      if (t_lo <= t_hi + 1e-15) cell(beta, t_lo, std::max(t_lo, t_hi));
      return;
    }
    for (long long t = 0; t <= rem; ++t) {
      beta[j] = static_cast<double>(t) / k;
      rec(j + 1, rem - t);
    }
  };
  if (n == 2) {
    rec(0, 0);
  } else {
    rec(0, k);
  }
}

}  // namespace detail

inline MeshResult mesh_optimize(const SymMatrix& sigma, const Vector& gamma, double slack,
                                const Vector& c, double delta, bool minimize) {
  const std::size_t n = gamma.size();
  MeshResult best;
  detail::mesh_cells(sigma, gamma, slack, n, delta, [&](const Vector& beta, double t_lo,
                                                        double t_hi) {
    double base = 0.0;
    for (std::size_t q = 0; q + 2 < n; ++q) base += c[q] * beta[q];
    const double r = (n > 2) ? [&] {
      double s = 0.0;
      for (std::size_t q = 0; q + 2 < n; ++q) s += beta[q];
      return 1.0 - s;
    }() : 1.0;
    base += c[n - 1] * r;
    const double slope = c[n - 2] - c[n - 1];
    for (double t : {t_lo, t_hi}) {
      const double v = base + slope * t;
      if (!best.found || (minimize ? v < best.value : v > best.value)) {
        best.found = true;
        best.value = v;
      }
    }
  });
  return best;
}

inline MeshResult mesh_clamp_tau(const SymMatrix& sigma, const Vector& gamma, double slack,
                                 double mu_y, const Vector& mu, double delta) {
  const std::size_t n = gamma.size();
  MeshResult best;
  detail::mesh_cells(sigma, gamma, slack, n, delta, [&](const Vector& beta, double t_lo,
                                                        double t_hi) {
    double base = 0.0;
    for (std::size_t q = 0; q + 2 < n; ++q) base += mu[q] * beta[q];
    const double r = (n > 2) ? [&] {
      double s = 0.0;
      for (std::size_t q = 0; q + 2 < n; ++q) s += beta[q];
      return 1.0 - s;
    }() : 1.0;
    base += mu[n - 1] * r;
    const double slope = mu[n - 2] - mu[n - 1];
    auto consider = [&](double t) {
      const double tau = mu_y - (base + slope * t);
      if (!best.found || tau * tau < best.value * best.value) {
        best.found = true;
        best.value = tau;
      }
    };
    consider(t_lo);
    consider(t_hi);
    if (std::fabs(slope) > 1e-300) {
      const double t0 = (mu_y - base) / slope;  // tau(t0) = 0
      if (t0 > t_lo && t0 < t_hi) consider(t0);
    }
  });
  return best;
}

inline double phi_erf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Bisection inverse of the erf-based normal CDF: upper-q quantile to 1e-10.
inline double bisect_normal_quantile(double q) {
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi_erf(-mid) > q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Central chi-square(1) CDF via erf and its bisection quantile.
inline double chisq1_cdf(double x) { return x <= 0 ? 0.0 : std::erf(std::sqrt(x / 2.0)); }

inline double bisect_chisq1_quantile(double level) {
  double lo = 0.0, hi = 100.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chisq1_cdf(mid) < level)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Determinant of a - shift*I by LU with partial pivoting.
inline double det(const SymMatrix& a, double shift) {
  const std::size_t n = a.dim();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = a(i, j) - (i == j ? shift : 0.0);
  double d = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(m(i, k)) > std::fabs(m(p, k))) p = i;
    if (std::fabs(m(p, k)) < 1e-300) return 0.0;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      d = -d;
    }
    d *= m(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return d;
}

// Smallest eigenvalue: scan det(A - xI) upward for the first sign change from
// the all-positive region, then bisect the bracket.
inline double bisect_min_eigenvalue(const SymMatrix& a) {
  double scale = 1.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) scale = std::max(scale, std::fabs(a(i, j)));
  const double lo0 = -2.0 * scale * a.dim();
  const double hi0 = 2.0 * scale * a.dim();
  const int steps = 200000;
  double prev_x = lo0;
  double prev_d = det(a, prev_x);
  for (int s = 1; s <= steps; ++s) {
    const double x = lo0 + (hi0 - lo0) * s / steps;
    const double dx = det(a, x);
    if ((prev_d > 0) != (dx > 0) || dx == 0.0) {
      double lo = prev_x, hi = x;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((det(a, mid) > 0) == (prev_d > 0))
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev_x = x;
    prev_d = dx;
  }
  return prev_x;
}

}  // namespace oracles
