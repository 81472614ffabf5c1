#include "nfisac/deploy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nfisac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double weight_theta(const DeployCoeffs& co) {
  const double s = co.px + co.py;
  return (co.px * co.px * co.py * co.py) / (s * s) * co.t_tilde_diag(1, 1);
}

double weight_range(const DeployCoeffs& co) {
  const double s = co.px + co.py;
  return (co.px * co.px * co.py * co.py) / (s * s) * co.t_tilde_diag(0, 0);
}

int clip_even(double value, int lo, int hi) {
  int v = 2 * static_cast<int>(std::lround(value / 2.0));
  return std::clamp(v, lo, hi);
}

}  // namespace

double default_d_min(const SystemConfig& cfg) { return cfg.lambda_c / 2.0; }

DeployCoeffs deploy_coefficients(const MatC& rx, const StarsProfile& profile,
                                 const PolarPosition& st, const Scenario& scn,
                                 const SystemConfig& cfg, const MatC& h_br) {
  scn.validate();
  DeployCoeffs co;
  co.factors = correlation_factors(rx, profile, st, cfg, h_br);
  co.sin2_theta = std::sin(st.theta) * std::sin(st.theta);
  co.r = st.r;
  co.r_tilde = effective_sensor_range(st.r, cfg.h_a);
  co.k_pref = 2.0 * std::norm(scn.alpha_s) * kPi * kPi * scn.l_slots /
              (scn.sigma2 * cfg.lambda_c * cfg.lambda_c);
  co.d_r = cfg.d_r;
  co.m_r = cfg.m_sensor;
  const CartesianPosition pos = cartesian_from_polar(st);
  co.px = pos.p_x;
  co.py = pos.p_y;
  co.t_tilde_diag = t_tilde(pos, jacobian_T(st));
  co.omega0 = scn.omega0;
  co.eps0 = scn.eps0;
  co.m0 = scn.m0;

  const DeployCoeffs named = coeffs_at(co, cfg.m_sensor);
  co.c11 = named.c11;
  co.c10 = named.c10;
  co.c0 = named.c0;
  co.c1 = named.c1;
  co.c2 = named.c2;
  const double dt = cfg.d_s * cfg.d_s;
  co.b0 = 2.0 * std::pow(co.d_r, 4) * co.factors.b2 / std::pow(co.r, 4);
  co.b1 = dt * co.d_r * co.d_r * co.factors.c / (6.0 * co.r_tilde * co.r_tilde * co.r * co.r);
  co.b2 = dt * dt * co.factors.a / (120.0 * std::pow(co.r_tilde, 4));
  return co;
}

DeployCoeffs deploy_coefficients(const MatC& rx, const StarsProfile& profile,
                                 const PolarPosition& st, const Scenario& scn,
                                 const SystemConfig& cfg) {
  return deploy_coefficients(rx, profile, st, scn, cfg, bs_stars_channel(cfg));
}

DeployCoeffs coeffs_at(const DeployCoeffs& base, int m_r) {
  DeployCoeffs co = base;
  co.m_r = m_r;
  const double k = co.k_pref;
  const double n1 = norm_v1_sq(m_r);
  const double n2 = norm_v2_sq(m_r);
  const double dr2 = co.d_r * co.d_r;
  const double rt2 = co.r_tilde * co.r_tilde;
  const double r2 = co.r * co.r;
  co.c11 = 4.0 * k * co.sin2_theta * n1 * co.factors.a;
  co.c10 = 4.0 * k * co.sin2_theta * dr2 * m_r * co.factors.b1;
  co.c2 = k * n2 * co.factors.a / (rt2 * rt2);
  co.c1 = k * dr2 * n1 * co.factors.c / (rt2 * r2);
  co.c0 = k * dr2 * dr2 * m_r * co.factors.b2 / (r2 * r2);
  return co;
}

Vec2 deploy_j_diag(const DeployCoeffs& co, double dt, int m_r) {
  const DeployCoeffs c = coeffs_at(co, m_r);
  Vec2 j;
  j(0) = c.c11 * dt + c.c10;
  j(1) = c.c2 * dt * dt - c.c1 * dt + c.c0;
  return j;
}

double deploy_speb(const DeployCoeffs& co, double d_s, int m_r) {
  const Vec2 j = deploy_j_diag(co, d_s * d_s, m_r);
  if (!(j(0) > 0.0) || !(j(1) > 0.0)) return kInf;
  return weight_theta(co) / j(0) + weight_range(co) / j(1);
}

double deploy_cf(const DeployCoeffs& co, double d_s, int m_r) {
  return co.omega0 * deploy_speb(co, d_s, m_r) / co.eps0 +
         (1.0 - co.omega0) * double(m_r) / double(co.m0);
}

IntervalBounds interval_bounds(const DeployCoeffs& co, int m_r, const SystemConfig& cfg,
                               double d_min) {
  (void)co;
  const double hi = std::pow(cfg.m_star * cfg.d_r / double(m_r), 2);
  const double lo = d_min * d_min;
  if (lo > hi * (1.0 + 1e-12))
    throw std::invalid_argument("interval_bounds: infeasible (d_min exceeds the aperture cap)");
  return {lo, hi};
}

bool prop2_condition_i(const DeployCoeffs& co, int m_r) {
  const double m = m_r;
  const double lhs = (3.0 * m * m + 6.0 * m - 4.0) * co.factors.a * co.factors.b2 / 5.0;
  const double rhs = (m * m + 3.0 * m + 2.0) * co.factors.c * co.factors.c / 12.0;
  return lhs >= rhs;
}

bool prop2_condition_ii(const DeployCoeffs& co, int m_r, const SystemConfig& cfg) {
  const DeployCoeffs c = coeffs_at(co, m_r);
  if (!(c.c2 > 0.0)) return false;
  const double vertex = c.c1 / (2.0 * c.c2);
  const double q = std::pow(cfg.m_star * cfg.d_r, 2) / 4.0;
  const double u = std::pow(cfg.m_star * cfg.d_r / double(m_r), 2);
  return std::abs(vertex - q) < std::abs(vertex - u);
}

std::optional<double> prop2_closed_form(const DeployCoeffs& co, int m_r,
                                        const SystemConfig& cfg) {
  if (prop2_condition_i(co, m_r) && prop2_condition_ii(co, m_r, cfg))
    return cfg.m_star * cfg.d_r / double(m_r);
  return std::nullopt;
}

ScaResult sca_interval(const DeployCoeffs& base, int m_r, double d_init,
                       const SystemConfig& cfg, double tol, int max_iter) {
  const DeployCoeffs co = coeffs_at(base, m_r);
  const IntervalBounds bounds = interval_bounds(co, m_r, cfg, default_d_min(cfg));
  const double wt = weight_theta(co), wr = weight_range(co);

  auto true_obj = [&](double dt) {
    const double j1 = co.c11 * dt + co.c10;
    const double j2 = co.c2 * dt * dt - co.c1 * dt + co.c0;
    if (!(j1 > 0.0) || !(j2 > 0.0)) return kInf;
    return wt / j1 + wr / j2;
  };

  double dt = std::clamp(d_init * d_init, bounds.lo, bounds.hi);
  ScaResult res;
  res.objective_trace.push_back(true_obj(dt));

  for (int it = 0; it < max_iter; ++it) {
    const double dtn = dt;
    // surrogate denominator from the first-order bound Gamma(x) = 2 dtn x - dtn^2,
    // tight at dtn and never above J_range
    auto surrogate = [&](double x) {
      const double gamma = 2.0 * dtn * x - dtn * dtn;
      const double j2s = co.c2 * gamma - co.c1 * x + co.c0;
      const double j1 = co.c11 * x + co.c10;
      if (!(j1 > 0.0) || !(j2s > 0.0)) return kInf;
      return wt / j1 + wr / j2s;
    };
    double lo = bounds.lo, hi = bounds.hi;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = surrogate(x1), f2 = surrogate(x2);
    for (int k = 0; k < 90; ++k) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = surrogate(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = surrogate(x2);
      }
    }
    double cand = 0.5 * (lo + hi);
    for (double e : {bounds.lo, bounds.hi})
      if (surrogate(e) < surrogate(cand)) cand = e;
    if (!(surrogate(cand) < kInf)) break;

    dt = cand;
    const double f_now = true_obj(dt);
    res.objective_trace.push_back(f_now);
    res.iterations = it + 1;
    const double f_prev = res.objective_trace[res.objective_trace.size() - 2];
    if (std::abs(f_prev - f_now) <= tol * std::max(1e-300, std::abs(f_prev))) break;
  }
  res.d_s = std::sqrt(dt);
  return res;
}

double deploy_f2_plus(const DeployCoeffs& co, double m) {
  const double b0 = co.b0, b1 = co.b1, b2 = co.b2;
  if (b1 >= 0.0)
    return 3 * b2 * std::pow(m, 5) + 15 * b2 * std::pow(m, 4) + 20 * b2 * std::pow(m, 3) +
           b0 * m;
  const double bb1 = -b1;
  return 3 * b2 * std::pow(m, 5) + 15 * b2 * std::pow(m, 4) +
         (bb1 + 20 * b2) * std::pow(m, 3) + 3 * bb1 * m * m + (2 * bb1 + b0) * m;
}

double deploy_f2_minus(const DeployCoeffs& co, double m) {
  const double b1 = co.b1, b2 = co.b2;
  if (b1 >= 0.0) return b1 * std::pow(m, 3) + 3 * b1 * m * m + (8 * b2 + 2 * b1) * m;
  return 8 * b2 * m;
}

double deploy_f1(const DeployCoeffs& co, double m) {
  // f1 is defined at the interval the B coefficients were built at:
  // b2 = dt^2 a / (120 rt^4)  =>  dt = sqrt(120 rt^4 b2 / a)
  if (!(co.factors.a > 0.0)) return 0.0;
  const double dt = std::sqrt(co.b2 * 120.0 * std::pow(co.r_tilde, 4) / co.factors.a);
  const double a = co.factors.a;
  return a * dt * m * m * m + 3.0 * a * dt * m * m +
         (2.0 * a * dt + 12.0 * co.d_r * co.d_r * co.factors.b1) * m;
}

namespace {

// AM-GM condensation of sum_i c_i m^{p_i} (c_i >= 0) into the monomial lower
// bound tight at m_hat.
struct MonoFit {
  double coef = 0.0;
  double expo = 0.0;
  bool ok = false;
};

MonoFit condense(const std::vector<std::pair<double, double>>& terms, double m_hat) {
  double total = 0.0;
  for (const auto& [c, p] : terms) {
    if (c < 0.0) return {};
    total += c * std::pow(m_hat, p);
  }
  if (!(total > 0.0)) return {};
  MonoFit f;
  f.ok = true;
  f.coef = 1.0;
  for (const auto& [c, p] : terms) {
    if (c == 0.0) continue;
    const double lam = c * std::pow(m_hat, p) / total;
    f.coef *= std::pow(c / lam, lam);
    f.expo += lam * p;
  }
  return f;
}

int exhaustive_scan(const DeployCoeffs& co, double d_s, const SystemConfig& cfg) {
  const int hi = std::max(2, static_cast<int>(std::floor(cfg.m_star * cfg.d_r / d_s)));
  int best = 2;
  double best_of = kInf;
  for (int m = 2; m <= hi; m += 2) {
    const double of = deploy_cf(co, d_s, m);
    if (of < best_of) {
      best_of = of;
      best = m;
    }
  }
  return best;
}

}  // namespace

CountResult gp_sensor_count(const DeployCoeffs& base, double d_s, const Scenario& scn,
                            const SystemConfig& cfg, double tol, int max_iter) {
  scn.validate();
  CountResult out;
  DeployCoeffs co = base;
  const double dt = d_s * d_s;
  co.b0 = 2.0 * std::pow(co.d_r, 4) * co.factors.b2 / std::pow(co.r, 4);
  co.b1 = dt * co.d_r * co.d_r * co.factors.c / (6.0 * co.r_tilde * co.r_tilde * co.r * co.r);
  co.b2 = dt * dt * co.factors.a / (120.0 * std::pow(co.r_tilde, 4));

  const double m_hi = cfg.m_star * cfg.d_r / d_s;
  if (m_hi < 2.0) throw std::invalid_argument("gp_sensor_count: empty count range");

  const double a = co.factors.a;
  const double k = co.k_pref;
  const double wt = weight_theta(co), wr = weight_range(co);
  const double cost_scale = co.omega0 / co.eps0;

  auto fallback = [&] {
    out.m_r = exhaustive_scan(co, d_s, cfg);
    out.relaxed = out.m_r;
    out.exhaustive_fallback = true;
    return out;
  };
  if (!(a > 0.0) || !(co.sin2_theta > 0.0) || !(co.b2 > 0.0)) return fallback();

  const double u3 = 2.0 * a * dt + 12.0 * co.d_r * co.d_r * co.factors.b1;
  const std::vector<std::pair<double, double>> f1_terms = {
      {a * dt, 3.0}, {3.0 * a * dt, 2.0}, {u3, 1.0}};
  std::vector<std::pair<double, double>> f2p_terms, f2m_terms;
  if (co.b1 >= 0.0) {
    f2p_terms = {{3 * co.b2, 5.0}, {15 * co.b2, 4.0}, {20 * co.b2, 3.0}, {co.b0, 1.0}};
    f2m_terms = {{co.b1, 3.0}, {3 * co.b1, 2.0}, {8 * co.b2 + 2 * co.b1, 1.0}};
  } else {
    const double bb1 = -co.b1;
    f2p_terms = {{3 * co.b2, 5.0},
                 {15 * co.b2, 4.0},
                 {bb1 + 20 * co.b2, 3.0},
                 {3 * bb1, 2.0},
                 {2 * bb1 + co.b0, 1.0}};
    f2m_terms = {{8 * co.b2, 1.0}};
  }

  const double k1 = 3.0 * wt * cost_scale / (k * co.sin2_theta);
  const double k2 = 2.0 * wr * cost_scale / k;
  const double k3 = (1.0 - co.omega0) / double(co.m0);

  double m_hat = std::clamp(double(co.m_r), 2.0, m_hi);
  bool gp_ok = true;
  for (int it = 0; it < max_iter; ++it) {
    const MonoFit f1_hat = condense(f1_terms, m_hat);
    const MonoFit f2p_hat = condense(f2p_terms, m_hat);
    if (!f1_hat.ok || !f2p_hat.ok) {
      gp_ok = false;
      break;
    }

    GpProblem gp;
    gp.n = 2;  // (m, x2)
    auto mono2 = [](double c, double em, double ex) {
      Monomial mo;
      mo.coef = c;
      mo.expo = VecR(2);
      mo.expo << em, ex;
      return mo;
    };
    gp.objective.terms = {mono2(k1 / f1_hat.coef, -f1_hat.expo, 0.0),
                          mono2(k2, 0.0, -1.0), mono2(k3, 1.0, 0.0)};
    Posynomial con;  // (f2-(m) + x2) / f2p_hat(m) <= 1
    for (const auto& [c, p] : f2m_terms)
      if (c > 0.0) con.terms.push_back(mono2(c / f2p_hat.coef, p - f2p_hat.expo, 0.0));
    con.terms.push_back(mono2(1.0 / f2p_hat.coef, -f2p_hat.expo, 1.0));
    gp.le_constraints.push_back(con);
    gp.le_constraints.push_back({{mono2(2.0, -1.0, 0.0)}});
    gp.le_constraints.push_back({{mono2(1.0 / m_hi, 1.0, 0.0)}});

    const GpResult r = solve_gp(gp, 1e-9, 200);
    if (r.report.status != SolveStatus::OPTIMAL) {
      gp_ok = false;
      break;
    }
    const double m_next = std::clamp(r.x(0), 2.0, m_hi);
    const bool done = std::abs(m_next - m_hat) <= tol * std::max(1.0, m_hat);
    m_hat = m_next;
    if (done) break;
  }
  if (!gp_ok) return fallback();

  out.relaxed = m_hat;
  // integer recovery: even candidates around the relaxed optimum, keeping the
  // incumbent competitive; the objective is the closed-form cost, not the
  // GP surrogate
  const int hi = std::max(2, static_cast<int>(std::floor(m_hi)));
  const std::vector<int> cands = {clip_even(2.0 * std::floor(m_hat / 2.0), 2, hi),
                                  clip_even(2.0 * std::ceil(m_hat / 2.0), 2, hi),
                                  std::clamp(co.m_r - co.m_r % 2, 2, hi)};
  int best = -1;
  double best_of = kInf;
  for (int m : cands) {
    if (m % 2) continue;
    const double of = deploy_cf(co, d_s, m);
    if (of < best_of) {
      best_of = of;
      best = m;
    }
  }
  out.m_r = best;
  return out;
}

DeploymentPlan run_algorithm1(const MatC& rx, const StarsProfile& profile,
                              const PolarPosition& st, const Scenario& scn,
                              const SystemConfig& cfg, const DeploymentPlan& init,
                              double tol, int max_outer) {
  const DeployCoeffs co = deploy_coefficients(rx, profile, st, scn, cfg);

  DeploymentPlan plan = init;
  if (plan.m_r < 2 || plan.m_r % 2)
    throw std::invalid_argument("run_algorithm1: init m_r must be even >= 2");
  if (plan.m_r * plan.d_s > cfg.m_star * cfg.d_r * (1.0 + 1e-12))
    throw std::invalid_argument("run_algorithm1: init violates the aperture constraint");

  double cf_prev = deploy_cf(co, plan.d_s, plan.m_r);
  for (int outer = 0; outer < max_outer; ++outer) {
    plan.outer_iterations = outer + 1;

    // interval step at fixed count: closed form when it is provably no worse
    const auto closed = prop2_closed_form(co, plan.m_r, cfg);
    if (closed && deploy_cf(co, *closed, plan.m_r) <= cf_prev * (1.0 + 1e-12)) {
      plan.d_s = *closed;
      plan.used_closed_form = true;
    } else {
      plan.d_s = sca_interval(co, plan.m_r, plan.d_s, cfg, tol).d_s;
    }

    // count step at fixed interval
    const CountResult cr = gp_sensor_count(coeffs_at(co, plan.m_r), plan.d_s, scn, cfg, tol);
    plan.m_r = cr.m_r;
    plan.used_exhaustive_fallback |= cr.exhaustive_fallback;
    plan.d_s = std::min(plan.d_s, cfg.m_star * cfg.d_r / double(plan.m_r));

    const double cf_now = deploy_cf(co, plan.d_s, plan.m_r);
    const bool settled = std::abs(cf_prev - cf_now) <= tol * std::max(1.0, std::abs(cf_prev));
    cf_prev = std::min(cf_prev, cf_now);
    if (settled) break;
  }
  plan.cf_value = cf_prev;
  plan.speb_value = deploy_speb(co, plan.d_s, plan.m_r);
  return plan;
}

}  // namespace nfisac
