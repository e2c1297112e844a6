#include "drosc/lpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>

#include "drosc/errors.hpp"

namespace drosc {

namespace {

constexpr double kPivTol = 1e-9;
constexpr double kCostTol = 1e-9;

// Dense tableau simplex for min c'x s.t. Ax = b, x >= 0 (b flipped nonnegative
// by the caller). Artificial variables occupy columns [n, n+m).
class Tableau {
 public:
  Tableau(const Matrix& a, const Vector& b) : m_(a.rows()), n_(a.cols()) {
    t_ = Matrix(m_, n_ + m_ + 1, 0.0);
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const double flip = (b[i] < 0.0) ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) t_(i, j) = flip * a(i, j);
      t_(i, n_ + i) = 1.0;
      t_(i, n_ + m_) = flip * b[i];
      basis_[i] = n_ + i;
    }
  }

  // Minimizes cost (size n_ + m_) with Bland's rule. Returns objective value.
  double run(const Vector& cost, bool allow_artificial, int iter_cap) {
    for (int it = 0; it < iter_cap; ++it) {
      // reduced costs r_j = cost_j - sum_i cost_{basis_i} t_(i,j)
      std::size_t enter = n_ + m_;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (!allow_artificial && j >= n_ && !in_basis(j)) continue;
        double r = cost[j];
        for (std::size_t i = 0; i < m_; ++i) {
          const double cb = cost[basis_[i]];
          if (cb != 0.0) r -= cb * t_(i, j);
        }
        if (r < -kCostTol && !in_basis(j)) {
          enter = j;  // Bland: first improving index
          break;
        }
      }
      if (enter == n_ + m_) return objective(cost);
      // ratio test; Bland tie-break on the smallest basis variable index
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        if (t_(i, enter) > kPivTol) {
          const double ratio = t_(i, n_ + m_) / t_(i, enter);
          if (ratio < best - 1e-12 ||
              (ratio < best + 1e-12 && (leave == m_ || basis_[i] < basis_[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave == m_) throw NumericError("simplex: unbounded direction");
      pivot(leave, enter);
    }
    throw NumericError("simplex: iteration cap hit (pivot breakdown)");
  }

  bool in_basis(std::size_t j) const {
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] == j) return true;
    return false;
  }

  double objective(const Vector& cost) const {
    double v = 0.0;
    for (std::size_t i = 0; i < m_; ++i) v += cost[basis_[i]] * t_(i, n_ + m_);
    return v;
  }

  // Pivot artificial basics out where a structural column is available.
  void purge_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::fabs(t_(i, j)) > kPivTol && !in_basis(j)) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  Vector solution() const {
    Vector x(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = t_(i, n_ + m_);
    return x;
  }

  const std::vector<std::size_t>& basis() const { return basis_; }
  std::size_t rows() const { return m_; }

 private:
  void pivot(std::size_t row, std::size_t col) {
    const double p = t_(row, col);
    for (std::size_t j = 0; j <= n_ + m_; ++j) t_(row, j) /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_ + m_; ++j) t_(i, j) -= f * t_(row, j);
    }
    basis_[row] = col;
  }

  std::size_t m_, n_;
  Matrix t_;
  std::vector<std::size_t> basis_;
};

struct StdResult {
  bool feasible = false;
  Vector x;
  double value = 0.0;
  double dual_value = 0.0;
};

StdResult solve_standard(const Matrix& a, const Vector& b, const Vector& c, int iter_cap) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Tableau tab(a, b);
  Vector phase1(n + m, 0.0);
  for (std::size_t j = n; j < n + m; ++j) phase1[j] = 1.0;
  const double infeas = tab.run(phase1, true, iter_cap);
  StdResult res;
  double bmax = 1.0;
  for (double v : b) bmax = std::max(bmax, std::fabs(v));
  if (infeas > 1e-9 * bmax) return res;
  tab.purge_artificials();
  Vector phase2(n + m, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  const double value = tab.run(phase2, false, iter_cap);
  res.feasible = true;
  res.x = tab.solution();
  res.value = value;
  // Dual certificate: solve B' y = c_B on the basis columns of the flipped
  // system; artificial basics (redundant rows) carry zero cost.
  Matrix bt(m, m, 0.0);
  Vector cb(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t col = tab.basis()[i];
    for (std::size_t r = 0; r < m; ++r) {
      double v;
      if (col < n)
        v = (b[r] < 0.0 ? -1.0 : 1.0) * a(r, col);
      else
        v = (col - n == r) ? 1.0 : 0.0;
      bt(i, r) = v;  // transposed
    }
    cb[i] = (col < n) ? c[col] : 0.0;
  }
  Vector y;
  if (solve_linear(bt, cb, y)) {
    // rows were sign-flipped, so the tableau rhs is |b|
    double dv = 0.0;
    for (std::size_t r = 0; r < m; ++r) dv += y[r] * std::fabs(b[r]);
    res.dual_value = dv;
  } else {
    res.dual_value = value;
  }
  return res;
}

// Rows of the polytope in standard form with slack/surplus columns:
//   sigma beta + u       = gamma + s
//   sigma beta       - v = gamma - s
//   1' beta              = 1
void polytope_rows(const UncertaintyPolytope& poly, Matrix& a, Vector& b,
                   std::size_t extra_cols) {
  const std::size_t n = poly.gamma.size();
  a = Matrix(2 * n + 1, n + 2 * n + extra_cols, 0.0);
  b.assign(2 * n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = poly.sigma(i, j);
      a(n + i, j) = poly.sigma(i, j);
    }
    a(i, n + i) = 1.0;
    a(n + i, 2 * n + i) = -1.0;
    b[i] = poly.gamma[i] + poly.slack;
    b[n + i] = poly.gamma[i] - poly.slack;
  }
  for (std::size_t j = 0; j < n; ++j) a(2 * n, j) = 1.0;
  b[2 * n] = 1.0;
}

int polytope_iter_cap(std::size_t n) { return 50 * static_cast<int>(n + 2 * n + 1) + 200; }

}  // namespace

LpResult lp_optimize(const UncertaintyPolytope& poly, const Vector& objective, LpSense sense) {
  const std::size_t n = poly.gamma.size();
  Matrix a;
  Vector b;
  polytope_rows(poly, a, b, 0);
  Vector c(n + 2 * n, 0.0);
  const double sgn = (sense == LpSense::Max) ? -1.0 : 1.0;
  for (std::size_t j = 0; j < n; ++j) c[j] = sgn * objective[j];
  const StdResult r = solve_standard(a, b, c, polytope_iter_cap(n));
  LpResult out;
  if (!r.feasible) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  out.status = LpStatus::Optimal;
  out.point.assign(r.x.begin(), r.x.begin() + n);
  out.value = sgn * r.value;
  out.dual_value = sgn * r.dual_value;
  out.dual_gap = std::fabs(r.value - r.dual_value);
  return out;
}

bool is_feasible(const UncertaintyPolytope& poly) {
  const std::size_t n = poly.gamma.size();
  Matrix a;
  Vector b;
  polytope_rows(poly, a, b, 0);
  Vector c(n + 2 * n, 0.0);
  const StdResult r = solve_standard(a, b, c, polytope_iter_cap(n));
  return r.feasible;
}

double min_imbalance(const SymMatrix& sigma, const Vector& gamma) {
  const std::size_t n = gamma.size();
  // vars: beta (n), t, u (n), v (n)
  Matrix a(2 * n + 1, n + 1 + 2 * n, 0.0);
  Vector b(2 * n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = sigma(i, j);
      a(n + i, j) = sigma(i, j);
    }
    a(i, n) = -1.0;       // sigma beta - t + u = gamma
    a(i, n + 1 + i) = 1.0;
    a(n + i, n) = 1.0;    // sigma beta + t - v = gamma
    a(n + i, n + 1 + n + i) = -1.0;
    b[i] = gamma[i];
    b[n + i] = gamma[i];
  }
  for (std::size_t j = 0; j < n; ++j) a(2 * n, j) = 1.0;
  b[2 * n] = 1.0;
  Vector c(n + 1 + 2 * n, 0.0);
  c[n] = 1.0;
  const StdResult r = solve_standard(a, b, c, polytope_iter_cap(n) + 100);
  if (!r.feasible) throw NumericError("min_imbalance: simplex row infeasible");
  return r.value;
}

Vector feasible_point_with_equality(const UncertaintyPolytope& poly, const Vector& eq_a,
                                    double eq_b) {
  const std::size_t n = poly.gamma.size();
  Matrix base;
  Vector b;
  polytope_rows(poly, base, b, 0);
  Matrix a(base.rows() + 1, base.cols(), 0.0);
  for (std::size_t i = 0; i < base.rows(); ++i)
    for (std::size_t j = 0; j < base.cols(); ++j) a(i, j) = base(i, j);
  for (std::size_t j = 0; j < n; ++j) a(base.rows(), j) = eq_a[j];
  b.push_back(eq_b);
  Vector c(base.cols(), 0.0);
  const StdResult r = solve_standard(a, b, c, polytope_iter_cap(n) + 100);
  if (!r.feasible) return {};
  return Vector(r.x.begin(), r.x.begin() + n);
}

namespace {

// Equality-constrained least squares on the support set: minimize
// ||y - X_S beta_S||^2 subject to 1'beta_S = 1 via the KKT system.
bool face_solve(const Matrix& x, const Vector& y, const std::vector<std::size_t>& support,
                Vector& out) {
  const std::size_t t = x.rows();
  const std::size_t k = support.size();
  Matrix kkt(k + 1, k + 1, 0.0);
  Vector rhs(k + 1, 0.0);
  double trace = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      double s = 0.0;
      for (std::size_t r = 0; r < t; ++r) s += x(r, support[a]) * x(r, support[b]);
      kkt(a, b) = s;
      kkt(b, a) = s;
    }
    trace += kkt(a, a);
    double s = 0.0;
    for (std::size_t r = 0; r < t; ++r) s += x(r, support[a]) * y[r];
    rhs[a] = s;
    kkt(a, k) = 1.0;
    kkt(k, a) = 1.0;
  }
  rhs[k] = 1.0;
  double ridge = 1e-12 * std::max(1.0, trace / std::max<std::size_t>(k, 1));
  for (int attempt = 0; attempt < 6; ++attempt) {
    Matrix reg = kkt;
    for (std::size_t a = 0; a < k; ++a) reg(a, a) += ridge;
    if (solve_linear(reg, rhs, out)) return true;
    ridge *= 100.0;
  }
  return false;
}

}  // namespace

Vector simplex_cls(const Matrix& x, const Vector& y) {
  const std::size_t t = x.rows();
  const std::size_t n = x.cols();
  for (double v : x.data())
    if (!std::isfinite(v)) throw NumericError("simplex_cls: non-finite input");
  for (double v : y)
    if (!std::isfinite(v)) throw NumericError("simplex_cls: non-finite input");
  if (n == 1) return Vector{1.0};

  // start at the best vertex
  std::size_t j0 = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t r = 0; r < t; ++r) {
      const double d = y[r] - x(r, j);
      s += d * d;
    }
    if (s < best) {
      best = s;
      j0 = j;
    }
  }
  Vector beta(n, 0.0);
  beta[j0] = 1.0;

  const int cap = 400 + 40 * static_cast<int>(n);
  for (int it = 0; it < cap; ++it) {
    // gradient g = (2/T) X'(X beta - y)
    Vector resid(t, 0.0);
    for (std::size_t r = 0; r < t; ++r) {
      double s = -y[r];
      for (std::size_t j = 0; j < n; ++j)
        if (beta[j] != 0.0) s += x(r, j) * beta[j];
      resid[r] = s;
    }
    Vector g(n, 0.0);
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t jmin = 0;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < t; ++r) s += x(r, j) * resid[r];
      g[j] = 2.0 * s / static_cast<double>(t);
      if (g[j] < gmin) {
        gmin = g[j];
        jmin = j;
      }
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (beta[j] > 1e-9) worst = std::max(worst, g[j]);
    if (worst - gmin <= 5e-8) return beta;

    std::set<std::size_t> supp;
    for (std::size_t j = 0; j < n; ++j)
      if (beta[j] > 1e-11) supp.insert(j);
    supp.insert(jmin);

    // inner NNLS loop on the expanded support
    for (int inner = 0; inner < 2 * static_cast<int>(n) + 4; ++inner) {
      std::vector<std::size_t> support(supp.begin(), supp.end());
      Vector sol;
      if (!face_solve(x, y, support, sol)) break;
      Vector cand(n, 0.0);
      bool nonneg = true;
      for (std::size_t a = 0; a < support.size(); ++a) {
        cand[support[a]] = sol[a];
        if (sol[a] < -1e-12) nonneg = false;
      }
      if (nonneg) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          cand[j] = std::max(cand[j], 0.0);
          sum += cand[j];
        }
        for (std::size_t j = 0; j < n; ++j) cand[j] /= sum;
        beta = cand;
        break;
      }
      // step toward the face optimum until the first coordinate hits zero
      double theta = 1.0;
      for (std::size_t j : support) {
        const double d = cand[j] - beta[j];
        if (d < -1e-15) theta = std::min(theta, -beta[j] / d);
      }
      for (std::size_t j : support) beta[j] += theta * (cand[j] - beta[j]);
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (beta[j] < 1e-12) beta[j] = 0.0;
        sum += beta[j];
      }
      for (std::size_t j = 0; j < n; ++j) beta[j] /= sum;
      supp.clear();
      for (std::size_t j = 0; j < n; ++j)
        if (beta[j] > 1e-11) supp.insert(j);
    }
  }
  throw NumericError("simplex_cls: active-set iteration cap hit");
}

}  // namespace drosc
