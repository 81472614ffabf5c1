#pragma once

#include <optional>

#include "nfisac/fim.hpp"
#include "nfisac/gp.hpp"
#include "nfisac/types.hpp"

namespace nfisac {

/// Coefficients of the closed-form FIM diagonal as polynomials in the squared
/// sensor interval dt = d_s^2 (at a fixed sensor count m_r):
///   J_theta = c11 * dt + c10,     J_range = c2 * dt^2 - c1 * dt + c0,
/// plus the matching positive B-coefficients of the sensor-count polynomial
/// split. The raw correlation factors and scenario constants are kept so the
/// same object can re-evaluate at any (d_s, m_r).
struct DeployCoeffs {
  double c11 = 0, c10 = 0, c0 = 0, c1 = 0, c2 = 0;
  double b0 = 0, b1 = 0, b2 = 0;  // b1 carries the sign of the c factor

  // context for re-evaluation
  CorrelationFactors factors;
  double sin2_theta = 0, r = 0, r_tilde = 0;
  double k_pref = 0;  // 2 |alpha_s|^2 pi^2 L / (sigma^2 lambda^2)
  double d_r = 0;
  int m_r = 0;        // the count the named coefficients were built at
  Mat2 t_tilde_diag = Mat2::Zero();  // diag entries ordered (r, theta)
  double px = 0, py = 0;
  double omega0 = 0, eps0 = 0;
  int m0 = 0;
};

struct DeploymentPlan {
  double d_s = 0.0;
  int m_r = 0;
  double cf_value = 0.0;
  double speb_value = 0.0;
  bool used_exhaustive_fallback = false;  // GP fell back to an integer scan
  bool used_closed_form = false;          // interval step used the shortcut
  int outer_iterations = 0;
};

DeployCoeffs deploy_coefficients(const MatC& rx, const StarsProfile& profile,
                                 const PolarPosition& st, const Scenario& scn,
                                 const SystemConfig& cfg);
DeployCoeffs deploy_coefficients(const MatC& rx, const StarsProfile& profile,
                                 const PolarPosition& st, const Scenario& scn,
                                 const SystemConfig& cfg, const MatC& h_br);

/// Named coefficients re-evaluated at another sensor count.
DeployCoeffs coeffs_at(const DeployCoeffs& base, int m_r);

/// Closed-form J diagonal at (dt = d_s^2, m_r); order (theta, range).
Vec2 deploy_j_diag(const DeployCoeffs& co, double dt, int m_r);

/// Closed-form SPEB at (d_s, m_r) from the coefficient context.
double deploy_speb(const DeployCoeffs& co, double d_s, int m_r);

/// Weighted cost omega0 * SPEB/eps0 + (1-omega0) * m_r/m0.
double deploy_cf(const DeployCoeffs& co, double d_s, int m_r);

/// Feasible squared-interval bounds [d_min^2, (M d_R / m_r)^2].
struct IntervalBounds {
  double lo, hi;
};
IntervalBounds interval_bounds(const DeployCoeffs& co, int m_r, const SystemConfig& cfg,
                               double d_min);

/// Closed-form optimal interval d_s = M d_R / m_r when both optimality
/// conditions hold; empty otherwise.
std::optional<double> prop2_closed_form(const DeployCoeffs& co, int m_r,
                                        const SystemConfig& cfg);

/// Both closed-form conditions evaluated separately (exposed for tests).
bool prop2_condition_i(const DeployCoeffs& co, int m_r);
bool prop2_condition_ii(const DeployCoeffs& co, int m_r, const SystemConfig& cfg);

/// Successive convex approximation on the squared interval: auxiliary
/// variable for the quadratic denominator, first-order lower bound tight at
/// the expansion point, monotone descent on the true objective. Returns the
/// interval d_s.
struct ScaResult {
  double d_s = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;  // true objective per iterate
};
ScaResult sca_interval(const DeployCoeffs& co, int m_r, double d_init,
                       const SystemConfig& cfg, double tol = 1e-5, int max_iter = 50);

/// Sensor-count solve: signomial split by the sign of the c factor,
/// AM-GM condensation to a standard GP, re-condensed to convergence, then
/// integer rounding by the true objective. Falls back to an exhaustive
/// integer scan when the GP is not well posed.
struct CountResult {
  int m_r = 0;
  double relaxed = 0.0;  // continuous optimum before rounding
  bool exhaustive_fallback = false;
};
CountResult gp_sensor_count(const DeployCoeffs& co, double d_s, const Scenario& scn,
                            const SystemConfig& cfg, double tol = 1e-5, int max_iter = 50);

/// Posynomial split f2+/f2- of the range-block polynomial (exposed for the
/// equivalence tests); evaluated at continuous m.
double deploy_f2_plus(const DeployCoeffs& co, double m);
double deploy_f2_minus(const DeployCoeffs& co, double m);
double deploy_f1(const DeployCoeffs& co, double m);

/// Algorithm 1: alternate the interval step (closed form when the conditions
/// hold, SCA otherwise) with the sensor-count step until the weighted cost
/// settles.
DeploymentPlan run_algorithm1(const MatC& rx, const StarsProfile& profile,
                              const PolarPosition& st, const Scenario& scn,
                              const SystemConfig& cfg, const DeploymentPlan& init,
                              double tol = 1e-5, int max_outer = 50);

/// Default physical floor for the sensor interval.
double default_d_min(const SystemConfig& cfg);

}  // namespace nfisac
