#pragma once

#include <utility>

#include "drosc/numerics.hpp"

namespace drosc {

// Feasible set {beta in simplex : ||gamma - sigma beta||_inf <= slack}.
struct UncertaintyPolytope {
  SymMatrix sigma;
  Vector gamma;
  double slack = 0.0;
};

enum class LpSense { Min, Max };
enum class LpStatus { Optimal, Infeasible };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Vector point;      // argpoint in the original beta coordinates
  double dual_value = 0.0;
  double dual_gap = 0.0;
};

// Optimum of c'beta over the polytope via a dense two-phase simplex method
// with Bland's anti-cycling rule. Throws NumericError on pivot breakdown.
LpResult lp_optimize(const UncertaintyPolytope& poly, const Vector& objective, LpSense sense);

// Phase-1 emptiness test.
bool is_feasible(const UncertaintyPolytope& poly);

// min over the simplex of ||gamma - sigma beta||_inf (Chebyshev LP). A polytope
// with slack s is non-empty iff min_imbalance(sigma, gamma) <= s.
double min_imbalance(const SymMatrix& sigma, const Vector& gamma);

// Any point of {beta in poly : a'beta = b}; empty vector when infeasible.
Vector feasible_point_with_equality(const UncertaintyPolytope& poly, const Vector& a, double b);

// argmin over the simplex of (1/T0)||y - X beta||^2, by active-set iterations
// on the simplex faces. KKT certificate at tolerance 1e-7 (see tests).
Vector simplex_cls(const Matrix& x_pre, const Vector& y_pre);

}  // namespace drosc
