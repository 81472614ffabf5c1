#pragma once

#include <vector>

#include "nfisac/sdp.hpp"  // SolveStatus / SolveReport
#include "nfisac/types.hpp"

namespace nfisac {

/// Monomial c * prod_j x_j^{a_j} with c > 0.
struct Monomial {
  double coef = 1.0;
  VecR expo;
};

/// Sum of monomials (all coefficients positive).
struct Posynomial {
  std::vector<Monomial> terms;
};

/// Geometric program in standard form over positive variables x:
///   minimize   objective(x)
///   subject to le_constraints[i](x) <= 1, eq_constraints[j](x) == 1.
struct GpProblem {
  int n = 0;
  Posynomial objective;
  std::vector<Posynomial> le_constraints;
  std::vector<Monomial> eq_constraints;

  void validate() const;
};

struct GpResult {
  SolveReport report;
  VecR x;  // primal point (positive)
};

double posy_eval(const Posynomial& p, const VecR& x);
double monomial_eval(const Monomial& m, const VecR& x);

/// Log-space objective value log(posy(x)) evaluated at y = log(x);
/// exposed for the transform-correctness checks.
double gp_log_objective(const GpProblem& p, const VecR& y);

/// Solves the log-variable convex transform with an equality-constrained
/// barrier Newton method. On OPTIMAL the reported objective is the
/// posynomial value, duality_gap the barrier gap, dual_residual the KKT
/// stationarity norm at the reported point.
GpResult solve_gp(const GpProblem& p, double tol = 1e-9, int max_iter = 400);

}  // namespace nfisac
