#include "nfisac/gp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace nfisac {

void GpProblem::validate() const {
  auto check_posy = [&](const Posynomial& p, const char* who) {
    if (p.terms.empty()) throw std::invalid_argument(std::string(who) + ": empty posynomial");
    for (const auto& t : p.terms) {
      if (!(t.coef > 0.0))
        throw std::invalid_argument(std::string(who) + ": coefficients must be positive");
      if (t.expo.size() != n)
        throw std::invalid_argument(std::string(who) + ": exponent dimension mismatch");
    }
  };
  if (n < 1) throw std::invalid_argument("GpProblem: need at least one variable");
  check_posy(objective, "objective");
  for (const auto& c : le_constraints) check_posy(c, "constraint");
  for (const auto& e : eq_constraints) {
    if (!(e.coef > 0.0)) throw std::invalid_argument("equality: coefficient must be positive");
    if (e.expo.size() != n) throw std::invalid_argument("equality: exponent dimension mismatch");
  }
}

double monomial_eval(const Monomial& m, const VecR& x) {
  double v = m.coef;
  for (int j = 0; j < x.size(); ++j) v *= std::pow(x(j), m.expo(j));
  return v;
}

double posy_eval(const Posynomial& p, const VecR& x) {
  double s = 0.0;
  for (const auto& t : p.terms) s += monomial_eval(t, x);
  return s;
}

namespace {

// log-sum-exp form of a posynomial at y = log x, with gradient and Hessian.
struct LseFun {
  MatR a;  // terms x n exponents
  VecR b;  // log coefficients

  static LseFun from(const Posynomial& p, int n) {
    LseFun f;
    const int t = static_cast<int>(p.terms.size());
    f.a.resize(t, n);
    f.b.resize(t);
    for (int i = 0; i < t; ++i) {
      f.a.row(i) = p.terms[i].expo.transpose();
      f.b(i) = std::log(p.terms[i].coef);
    }
    return f;
  }

  double value(const VecR& y) const {
    const VecR z = a * y + b;
    const double zmax = z.maxCoeff();
    return zmax + std::log((z.array() - zmax).exp().sum());
  }

  VecR weights(const VecR& y) const {
    const VecR z = a * y + b;
    const double zmax = z.maxCoeff();
    VecR w = (z.array() - zmax).exp();
    return w / w.sum();
  }

  VecR grad(const VecR& y) const { return a.transpose() * weights(y); }

  MatR hess(const VecR& y) const {
    const VecR w = weights(y);
    const MatR aw = a.transpose() * w.asDiagonal() * a;
    const VecR g = a.transpose() * w;
    return aw - g * g.transpose();
  }
};

// Problem in log variables, equalities eliminated through a null-space
// parameterization y = y0 + N u. Keeping the iterates on the equality
// manifold structurally avoids the ill-conditioned KKT solves of the
// primal-dual form at large barrier weight.
struct Transformed {
  LseFun f0;
  std::vector<LseFun> fi;  // <= 0
  MatR g;                  // equality: g y = h (kept for residual reports)
  VecR h;
  VecR y0;                 // particular solution of g y = h
  MatR nmat;               // null-space basis of g (n x (n - me))
  int n = 0;

  void build_nullspace() {
    const int me = static_cast<int>(h.size());
    if (me == 0) {
      y0 = VecR::Zero(n);
      nmat = MatR::Identity(n, n);
      return;
    }
    y0 = g.completeOrthogonalDecomposition().solve(h);
    const Eigen::HouseholderQR<MatR> qr(g.transpose());
    const MatR q = qr.householderQ();
    nmat = q.rightCols(n - me);
  }

  VecR lift(const VecR& u) const { return y0 + nmat * u; }
};

struct CenterResult {
  VecR u;
  bool ok = false;
  double newton_dec = 1e300;
};

// Equality-eliminated barrier Newton; early_stop (optional) ends the descent
// as soon as the predicate holds at an iterate.
CenterResult center(const Transformed& tp, double t, VecR u, double eps, int max_newton,
                    const std::function<bool(const VecR&)>& early_stop = {}) {
  CenterResult res;
  res.u = std::move(u);

  auto barrier_value = [&](const VecR& uu, bool& interior) {
    const VecR y = tp.lift(uu);
    double f = t * tp.f0.value(y);
    interior = true;
    for (const auto& fi : tp.fi) {
      const double v = fi.value(y);
      if (v >= 0.0) {
        interior = false;
        return 1e300;
      }
      f -= std::log(-v);
    }
    return f;
  };

  for (int it = 0; it < max_newton; ++it) {
    const VecR y = tp.lift(res.u);
    if (early_stop && early_stop(y)) {
      res.ok = true;
      return res;
    }
    VecR grad = t * tp.f0.grad(y);
    MatR hess = t * tp.f0.hess(y);
    for (const auto& fi : tp.fi) {
      const double v = fi.value(y);
      if (v >= 0.0) return res;  // lost the interior; caller restarts
      const VecR gi = fi.grad(y);
      grad += gi / (-v);
      hess += fi.hess(y) / (-v) + gi * gi.transpose() / (v * v);
    }
    VecR gu = tp.nmat.transpose() * grad;
    MatR hu = tp.nmat.transpose() * hess * tp.nmat;
    hu.diagonal().array() += 1e-14 * hu.diagonal().cwiseAbs().maxCoeff() + 1e-300;

    Eigen::LDLT<MatR> ldlt(hu);
    VecR du = ldlt.solve(-gu);
    double dec2 = -gu.dot(du);
    if (!(dec2 > 0.0)) {  // fall back to gradient descent scaling
      du = -gu;
      dec2 = gu.squaredNorm();
    }
    res.newton_dec = std::sqrt(std::max(dec2, 0.0));
    if (res.newton_dec < eps) {
      res.ok = true;
      return res;
    }

    bool interior = false;
    const double f_now = barrier_value(res.u, interior);
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 80; ++ls) {
      bool cand_interior = false;
      const double f_cand = barrier_value(res.u + alpha * du, cand_interior);
      if (cand_interior && f_cand <= f_now - 0.25 * alpha * dec2 + 1e-14 * std::abs(f_now)) {
        res.u += alpha * du;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      res.ok = res.newton_dec < std::sqrt(eps);
      return res;
    }
  }
  res.ok = res.newton_dec < std::sqrt(eps);
  return res;
}

}  // namespace

double gp_log_objective(const GpProblem& p, const VecR& y) {
  return LseFun::from(p.objective, p.n).value(y);
}

GpResult solve_gp(const GpProblem& p, double tol, int max_iter) {
  p.validate();
  const int n = p.n;

  Transformed tp;
  tp.n = n;
  tp.f0 = LseFun::from(p.objective, n);
  for (const auto& c : p.le_constraints) tp.fi.push_back(LseFun::from(c, n));
  const int me = static_cast<int>(p.eq_constraints.size());
  tp.g.resize(me, n);
  tp.h.resize(me);
  for (int i = 0; i < me; ++i) {
    tp.g.row(i) = p.eq_constraints[i].expo.transpose();
    tp.h(i) = -std::log(p.eq_constraints[i].coef);
  }
  tp.build_nullspace();

  GpResult out;
  out.report.status = SolveStatus::MAX_ITER;

  auto max_violation = [&](const VecR& y) {
    double s = -std::numeric_limits<double>::infinity();
    for (const auto& fi : tp.fi) s = std::max(s, fi.value(y));
    return tp.fi.empty() ? -1.0 : s;
  };

  VecR u = VecR::Zero(tp.nmat.cols());

  // Phase 1: drive s = max_i f_i below 1 in the augmented problem
  // min s s.t. f_i(x)/s <= 1, stopping as soon as the original problem is
  // strictly feasible.
  if (max_violation(tp.lift(u)) >= 0.0) {
    Transformed ph;
    ph.n = n + 1;
    Posynomial obj_s;
    Monomial ms;
    ms.coef = 1.0;
    ms.expo = VecR::Zero(n + 1);
    ms.expo(n) = 1.0;
    obj_s.terms.push_back(ms);
    ph.f0 = LseFun::from(obj_s, n + 1);
    for (auto fi : tp.fi) {
      MatR a2(fi.a.rows(), n + 1);
      a2.leftCols(n) = fi.a;
      a2.col(n).setConstant(-1.0);
      fi.a = a2;
      ph.fi.push_back(fi);
    }
    ph.g.resize(me, n + 1);
    ph.h = tp.h;
    if (me) {
      ph.g.leftCols(n) = tp.g;
      ph.g.col(n).setZero();
    }
    ph.build_nullspace();

    // start: current y with s above the max violation
    VecR ys(n + 1);
    ys.head(n) = tp.lift(u);
    ys(n) = max_violation(ys.head(n)) + 1.0;
    VecR us = ph.nmat.transpose() * (ys - ph.y0);

    auto strictly_feasible = [&](const VecR& y_aug) {
      return max_violation(y_aug.head(n)) < -1e-9;
    };

    bool found = false;
    double t1 = 1.0;
    for (int outer = 0; outer < 40 && !found; ++outer) {
      const CenterResult cr = center(ph, t1, us, 1e-9, 60, strictly_feasible);
      us = cr.u;
      found = strictly_feasible(ph.lift(us));
      if (!found && ph.fi.size() / t1 < 1e-10) break;
      t1 *= 10.0;
    }
    if (!found) {
      const VecR y_fin = ph.lift(us).head(n);
      out.report.status = SolveStatus::INFEASIBLE;
      out.report.certificate_norm = std::max(max_violation(y_fin), 0.0);
      out.x = y_fin.array().exp();
      return out;
    }
    u = tp.nmat.transpose() * (ph.lift(us).head(n) - tp.y0);
  }

  // Phase 2: barrier path following on the equality manifold.
  const int mcon = static_cast<int>(tp.fi.size());
  double t = 1.0;
  int iters = 0;
  bool converged = false;
  while (iters < max_iter) {
    const CenterResult cr = center(tp, t, u, std::min(1e-10, tol * 1e-2), 80);
    iters++;
    u = cr.u;
    if (!cr.ok && cr.newton_dec > 1e-3) break;
    if (mcon == 0 || mcon / t <= tol * 0.5) {
      converged = cr.ok || cr.newton_dec < 1e-6;
      break;
    }
    t *= 20.0;
  }
  out.report.status = converged ? SolveStatus::OPTIMAL : SolveStatus::MAX_ITER;

  const VecR y = tp.lift(u);
  out.x = y.array().exp();
  out.report.objective = posy_eval(p.objective, out.x);
  // Barrier gap in the log domain: log f0(x) - log f0* <= m/t.
  out.report.duality_gap = mcon > 0 ? mcon / t : 0.0;
  out.report.dual_objective = out.report.objective * std::exp(-out.report.duality_gap);
  out.report.iterations = iters;

  // KKT stationarity at the reported point, reduced to the equality manifold.
  VecR kkt = tp.f0.grad(y);
  for (const auto& fi : tp.fi) {
    const double v = fi.value(y);
    kkt += fi.grad(y) / (t * (-v));
  }
  out.report.dual_residual = (tp.nmat.transpose() * kkt).norm();
  out.report.primal_residual = me ? (tp.g * y - tp.h).cwiseAbs().maxCoeff() : 0.0;
  return out;
}

}  // namespace nfisac
