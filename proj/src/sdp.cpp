#include "nfisac/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace nfisac {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::OPTIMAL: return "OPTIMAL";
    case SolveStatus::INFEASIBLE: return "INFEASIBLE";
    case SolveStatus::UNBOUNDED: return "UNBOUNDED";
    case SolveStatus::MAX_ITER: return "MAX_ITER";
  }
  return "?";
}

namespace {

// ----------------------------------------------------------------------
// Core solver: real standard form
//   min sum_k <C_k, X_k> + cf.v   s.t.  sum_k <A_ik, X_k> + F(i,:).v = b_i
// over symmetric PSD blocks X_k and free scalars v.
// ----------------------------------------------------------------------

struct CoreTerm {
  int blk;
  MatR mat;
};

struct CoreProblem {
  std::vector<int> dims;
  std::vector<MatR> C;
  std::vector<std::vector<CoreTerm>> rows;  // per-constraint block terms
  MatR F;                                   // m x p
  VecR b;
  VecR cf;
};

struct CoreResult {
  SolveStatus status = SolveStatus::MAX_ITER;
  std::vector<MatR> X, Z;
  VecR y, v;
  double pobj = 0.0, dobj = 0.0;
  double pres = 0.0, dres = 0.0;
  int iters = 0;
  double cert = 0.0;
};

MatR sym(const MatR& a) { return 0.5 * (a + a.transpose()); }

struct EigPair {
  MatR q;
  VecR lam;
};

EigPair sym_eig(const MatR& a) {
  Eigen::SelfAdjointEigenSolver<MatR> es(sym(a));
  return {es.eigenvectors(), es.eigenvalues()};
}

MatR eig_fun(const EigPair& e, const std::function<double(double)>& f) {
  VecR d(e.lam.size());
  for (int i = 0; i < d.size(); ++i) d(i) = f(e.lam(i));
  return e.q * d.asDiagonal() * e.q.transpose();
}

// Largest alpha in (0, 1] with X + alpha*dX staying PD, scaled by tau.
double max_step(const MatR& x, const MatR& dx, double tau) {
  Eigen::LLT<MatR> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatR l = llt.matrixL();
  const MatR m = l.triangularView<Eigen::Lower>().solve(
      l.triangularView<Eigen::Lower>().solve(dx).transpose());
  Eigen::SelfAdjointEigenSolver<MatR> es(sym(m), Eigen::EigenvaluesOnly);
  const double emin = es.eigenvalues().minCoeff();
  if (emin >= 0.0) return 1.0;
  return std::min(1.0, -tau / emin);
}

struct Scaling {
  MatR w, r, rinv;
  EigPair lam_eig;  // eigendecomposition of lambda = R Z R
};

Scaling nt_scaling(const MatR& x, const MatR& z) {
  const EigPair ex = sym_eig(x);
  const double floor_x = std::max(ex.lam.maxCoeff(), 1e-300) * 1e-14;
  const MatR s1 = eig_fun(ex, [&](double t) { return std::sqrt(std::max(t, floor_x)); });
  const EigPair em = sym_eig(s1 * z * s1);
  const double floor_m = std::max(em.lam.maxCoeff(), 1e-300) * 1e-14;
  const MatR mihalf =
      eig_fun(em, [&](double t) { return 1.0 / std::sqrt(std::sqrt(std::max(t, floor_m))); });
  // W = S1 (S1 Z S1)^{-1/2} S1; compute the square root factor directly.
  Scaling sc;
  sc.w = sym(s1 * mihalf * mihalf * s1);
  const EigPair ew = sym_eig(sc.w);
  const double floor_w = std::max(ew.lam.maxCoeff(), 1e-300) * 1e-14;
  sc.r = eig_fun(ew, [&](double t) { return std::sqrt(std::max(t, floor_w)); });
  sc.rinv = eig_fun(ew, [&](double t) { return 1.0 / std::sqrt(std::max(t, floor_w)); });
  sc.lam_eig = sym_eig(sc.r * z * sc.r);
  return sc;
}

// Solve lambda*U + U*lambda = 2*V for symmetric U.
MatR lyap_solve(const EigPair& lam, const MatR& v) {
  const MatR vt = lam.q.transpose() * v * lam.q;
  MatR u(vt.rows(), vt.cols());
  for (int i = 0; i < vt.rows(); ++i)
    for (int j = 0; j < vt.cols(); ++j) {
      const double den = lam.lam(i) + lam.lam(j);
      u(i, j) = 2.0 * vt(i, j) / (std::abs(den) > 1e-300 ? den : 1e-300);
    }
  return sym(lam.q * u * lam.q.transpose());
}

CoreResult solve_core(const CoreProblem& p, double tol, int max_iter) {
  const int nk = static_cast<int>(p.dims.size());
  const int m = static_cast<int>(p.b.size());
  const int nfree = static_cast<int>(p.cf.size());
  CoreResult res;

  double norm_a = 1.0, norm_c = 1.0;
  for (const auto& row : p.rows)
    for (const auto& t : row) norm_a = std::max(norm_a, t.mat.norm());
  for (const auto& c : p.C) norm_c = std::max(norm_c, c.norm());
  const double norm_b = m ? p.b.cwiseAbs().maxCoeff() : 0.0;

  const double init_p = std::max({10.0, 2.0 * norm_b / norm_a, std::sqrt(norm_c)});
  const double init_d = std::max(10.0, 2.0 * norm_c);

  std::vector<MatR> X(nk), Z(nk);
  for (int k = 0; k < nk; ++k) {
    X[k] = init_p * MatR::Identity(p.dims[k], p.dims[k]);
    Z[k] = init_d * MatR::Identity(p.dims[k], p.dims[k]);
  }
  VecR y = VecR::Zero(m), v = VecR::Zero(nfree);

  const double ntot = [&] {
    double s = 0;
    for (int d : p.dims) s += d;
    return std::max(s, 1.0);
  }();

  auto inner = [](const MatR& a, const MatR& b) { return (a.cwiseProduct(b)).sum(); };

  std::vector<MatR> Rd(nk), Rc(nk), dX(nk), dZ(nk), dXa(nk), dZa(nk), G(nk);
  VecR rp(m), rf(nfree);

  int stall = 0;
  double best_err = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iter; ++iter) {
    res.iters = iter;
    // residuals
    for (int i = 0; i < m; ++i) rp(i) = p.b(i);
    for (int i = 0; i < m; ++i) {
      for (const auto& t : p.rows[i]) rp(i) -= inner(t.mat, X[t.blk]);
      if (nfree) rp(i) -= p.F.row(i).dot(v);
    }
    for (int k = 0; k < nk; ++k) Rd[k] = p.C[k] - Z[k];
    for (int i = 0; i < m; ++i)
      for (const auto& t : p.rows[i]) Rd[t.blk].noalias() -= y(i) * t.mat;
    if (nfree) rf = p.cf - p.F.transpose() * y;

    double gap = 0.0;
    for (int k = 0; k < nk; ++k) gap += inner(X[k], Z[k]);
    const double mu = gap / ntot;

    double pobj = nfree ? p.cf.dot(v) : 0.0;
    for (int k = 0; k < nk; ++k) pobj += inner(p.C[k], X[k]);
    const double dobj = m ? p.b.dot(y) : 0.0;

    double dres = nfree ? rf.cwiseAbs().maxCoeff() : 0.0;
    for (int k = 0; k < nk; ++k) dres = std::max(dres, Rd[k].cwiseAbs().maxCoeff());
    const double pres = m ? rp.cwiseAbs().maxCoeff() : 0.0;
    const double relp = pres / (1.0 + norm_b);
    const double reld = dres / (1.0 + norm_c);
    const double relg = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    res.pobj = pobj;
    res.dobj = dobj;
    res.pres = relp;
    res.dres = reld;

    if (relp <= tol && reld <= tol && relg <= tol) {
      res.status = SolveStatus::OPTIMAL;
      break;
    }

    // primal infeasibility certificate: y with A^*(y) <= 0, F^T y = 0, b.y > 0
    if (m) {
      const double ynorm = y.norm();
      if (ynorm > 1.0) {
        const double bty = p.b.dot(y) / ynorm;
        if (bty > 1e-8) {
          double viol = nfree ? (p.F.transpose() * y).cwiseAbs().maxCoeff() / ynorm : 0.0;
          for (int k = 0; k < nk; ++k) {
            MatR s = MatR::Zero(p.dims[k], p.dims[k]);
            for (int i = 0; i < m; ++i)
              for (const auto& t : p.rows[i])
                if (t.blk == k) s.noalias() += y(i) * t.mat;
            Eigen::SelfAdjointEigenSolver<MatR> es(sym(s) / ynorm, Eigen::EigenvaluesOnly);
            viol = std::max(viol, es.eigenvalues().maxCoeff());
          }
          if (viol < 1e-9 * std::max(1.0, bty) && bty > 1e4 * viol) {
            res.status = SolveStatus::INFEASIBLE;
            res.cert = bty;
            break;
          }
        }
      }
      // dual infeasibility (primal unbounded ray)
      if (pobj < -1e13 * (1.0 + norm_b) && relp <= std::sqrt(tol)) {
        res.status = SolveStatus::UNBOUNDED;
        res.cert = -pobj;
        break;
      }
    }

    const double err = relp + reld + relg;
    if (err < best_err * 0.999) {
      best_err = err;
      stall = 0;
    } else if (++stall > 15) {
      res.status = SolveStatus::MAX_ITER;
      break;
    }

    // NT scalings
    std::vector<Scaling> sc(nk);
    for (int k = 0; k < nk; ++k) sc[k] = nt_scaling(X[k], Z[k]);

    // Schur complement S_ij = sum_k <A_ik, W_k A_jk W_k>
    MatR S = MatR::Zero(m, m);
    std::vector<std::vector<CoreTerm>> wa(m);
    for (int i = 0; i < m; ++i)
      for (const auto& t : p.rows[i])
        wa[i].push_back({t.blk, sym(sc[t.blk].w * t.mat * sc[t.blk].w)});
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        double s = 0.0;
        for (const auto& ti : wa[i])
          for (const auto& tj : p.rows[j])
            if (ti.blk == tj.blk) s += inner(ti.mat, tj.mat);
        S(i, j) = S(j, i) = s;
      }
    S.diagonal().array() += 1e-13 * std::max(1.0, S.diagonal().maxCoeff());

    Eigen::LDLT<MatR> sf(S);
    MatR sf_f;
    Eigen::LDLT<MatR> gf;
    if (nfree) {
      sf_f = sf.solve(p.F);
      MatR g = p.F.transpose() * sf_f;
      g.diagonal().array() += 1e-13 * std::max(1.0, g.diagonal().maxCoeff());
      gf.compute(g);
    }

    auto solve_direction = [&](const std::vector<MatR>& rc, VecR& dy, VecR& dv) {
      VecR r1 = rp;
      for (int i = 0; i < m; ++i)
        for (const auto& t : p.rows[i])
          r1(i) -= inner(t.mat, rc[t.blk] - sym(sc[t.blk].w * Rd[t.blk] * sc[t.blk].w));
      if (nfree) {
        dv = gf.solve(p.F.transpose() * sf.solve(r1) - rf);
        dy = sf.solve(r1 - p.F * dv);
      } else {
        dv.resize(0);
        dy = sf.solve(r1);
      }
      for (int k = 0; k < nk; ++k) {
        dZ[k] = Rd[k];
        dX[k] = rc[k];
      }
      for (int i = 0; i < m; ++i)
        for (const auto& t : p.rows[i]) dZ[t.blk].noalias() -= dy(i) * t.mat;
      for (int k = 0; k < nk; ++k) {
        dZ[k] = sym(dZ[k]);
        dX[k] = sym(dX[k] - sc[k].w * dZ[k] * sc[k].w);
      }
    };

    // predictor (affine)
    for (int k = 0; k < nk; ++k) Rc[k] = -X[k];
    VecR dya, dva;
    solve_direction(Rc, dya, dva);
    for (int k = 0; k < nk; ++k) {
      dXa[k] = dX[k];
      dZa[k] = dZ[k];
    }
    const double tau = (relg < 1e-5 && relp < 1e-5 && reld < 1e-5) ? 0.995 : 0.98;
    double apa = 1.0, ada = 1.0;
    for (int k = 0; k < nk; ++k) {
      apa = std::min(apa, max_step(X[k], dXa[k], 1.0));
      ada = std::min(ada, max_step(Z[k], dZa[k], 1.0));
    }
    double gap_aff = 0.0;
    for (int k = 0; k < nk; ++k)
      gap_aff += inner(X[k] + apa * dXa[k], Z[k] + ada * dZa[k]);
    const double mu_aff = std::max(gap_aff / ntot, 0.0);
    double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3.0);
    sigma = std::clamp(sigma, 1e-10, 1.0 - 1e-10);

    // corrector
    for (int k = 0; k < nk; ++k) {
      const MatR dlx = sc[k].rinv * dXa[k] * sc[k].rinv;
      const MatR dlz = sc[k].r * dZa[k] * sc[k].r;
      const MatR lam = sc[k].r * Z[k] * sc[k].r;
      const MatR target = sigma * mu * MatR::Identity(p.dims[k], p.dims[k]) -
                          lam * lam - sym(dlx * dlz);
      Rc[k] = sym(sc[k].r * lyap_solve(sc[k].lam_eig, target) * sc[k].r);
    }
    VecR dy, dv;
    solve_direction(Rc, dy, dv);

    double ap = 1.0, ad = 1.0;
    for (int k = 0; k < nk; ++k) {
      ap = std::min(ap, max_step(X[k], dX[k], tau));
      ad = std::min(ad, max_step(Z[k], dZ[k], tau));
    }
    if (ap < 1e-10 && ad < 1e-10) {
      res.status = SolveStatus::MAX_ITER;
      break;
    }

    for (int k = 0; k < nk; ++k) {
      X[k] = sym(X[k] + ap * dX[k]);
      Z[k] = sym(Z[k] + ad * dZ[k]);
    }
    y += ad * dy;
    if (nfree) v += ap * dv;
  }

  res.X = std::move(X);
  res.Z = std::move(Z);
  res.y = std::move(y);
  res.v = std::move(v);
  return res;
}

// complex Hermitian -> 2n x 2n real symmetric embedding carrying
// tr(embed(A) embed(X)) = 2 Re tr(A X); the 1/2 keeps values unchanged.
MatR embed_half(const MatC& a) {
  const int n = static_cast<int>(a.rows());
  MatR out(2 * n, 2 * n);
  const MatR re = a.real(), im = a.imag();
  out.topLeftCorner(n, n) = re;
  out.bottomRightCorner(n, n) = re;
  out.topRightCorner(n, n) = -im;
  out.bottomLeftCorner(n, n) = im;
  return 0.5 * out;
}

}  // namespace

int SdpProblem::add_psd_block(const std::string& name, int dim, bool complex_hermitian) {
  if (dim < 1) throw std::invalid_argument("add_psd_block: dim must be >= 1");
  blocks_.push_back({name, dim, complex_hermitian});
  objective_.emplace_back(static_cast<int>(blocks_.size()) - 1,
                          MatC::Zero(dim, dim));
  return static_cast<int>(blocks_.size()) - 1;
}

int SdpProblem::add_free_var(const std::string& name) {
  free_names_.push_back(name);
  objective_free_.push_back(0.0);
  return static_cast<int>(free_names_.size()) - 1;
}

void SdpProblem::add_objective(int block, const MatC& c) {
  objective_[block].second += 0.5 * (c + c.adjoint());
}

void SdpProblem::add_objective_free(int var, double coeff) { objective_free_[var] += coeff; }

void SdpProblem::add_constraint(std::vector<Term> terms,
                                std::vector<std::pair<int, double>> free_terms, Rel rel,
                                double rhs) {
  for (auto& t : terms) {
    if (t.block < 0 || t.block >= static_cast<int>(blocks_.size()))
      throw std::invalid_argument("add_constraint: bad block id");
    if (t.coeff.rows() != blocks_[t.block].dim || t.coeff.cols() != blocks_[t.block].dim)
      throw std::invalid_argument("add_constraint: coefficient dimension mismatch");
    t.coeff = 0.5 * (t.coeff + t.coeff.adjoint().eval());
  }
  cons_.push_back({std::move(terms), std::move(free_terms), rel, rhs});
}

void SdpProblem::pin_entry(int block, int p, int q, cplx value) {
  const int n = blocks_[block].dim;
  MatC e_re = MatC::Zero(n, n);
  e_re(p, q) += 0.5;
  e_re(q, p) += 0.5;
  add_constraint({{block, e_re}}, Rel::EQ, value.real());
  if (blocks_[block].complex_herm && p != q) {
    MatC e_im = MatC::Zero(n, n);
    e_im(p, q) += cplx(0.0, 0.5);
    e_im(q, p) += cplx(0.0, -0.5);
    add_constraint({{block, e_im}}, Rel::EQ, value.imag());
  }
}

int SdpProblem::tr_inverse_epigraph(int u_dim, bool complex_hermitian) {
  if (u_dim < 1) throw std::invalid_argument("tr_inverse_epigraph: u_dim must be >= 1");
  const int g = add_psd_block("schur_epigraph", 2 * u_dim, complex_hermitian);
  MatC c = MatC::Zero(2 * u_dim, 2 * u_dim);
  c.topLeftCorner(u_dim, u_dim).setIdentity();
  add_objective(g, c);
  for (int p = 0; p < u_dim; ++p)
    for (int q = 0; q < u_dim; ++q)
      pin_entry(g, p, u_dim + q, p == q ? 1.0 : 0.0);
  return g;
}

SolveReport SdpProblem::solve(double tol, int max_iter) {
  CoreProblem core;
  const int nb = static_cast<int>(blocks_.size());
  const int m = static_cast<int>(cons_.size());

  core.dims.reserve(nb);
  core.C.reserve(nb);
  for (int k = 0; k < nb; ++k) {
    const int d = blocks_[k].complex_herm ? 2 * blocks_[k].dim : blocks_[k].dim;
    core.dims.push_back(d);
    const MatC& c = objective_[k].second;
    core.C.push_back(blocks_[k].complex_herm ? embed_half(c) : MatR(c.real()));
  }

  // slacks: one 1x1 block per inequality
  std::vector<int> slack_of(m, -1);
  for (int i = 0; i < m; ++i)
    if (cons_[i].rel != Rel::EQ) {
      slack_of[i] = static_cast<int>(core.dims.size());
      core.dims.push_back(1);
      core.C.push_back(MatR::Zero(1, 1));
    }

  core.rows.resize(m);
  core.b.resize(m);
  const int nfree = static_cast<int>(free_names_.size());
  core.F = MatR::Zero(m, nfree);
  core.cf = Eigen::Map<const VecR>(objective_free_.data(), nfree);
  for (int i = 0; i < m; ++i) {
    const auto& c = cons_[i];
    core.b(i) = c.rhs;
    for (const auto& t : c.terms)
      core.rows[i].push_back({t.block, blocks_[t.block].complex_herm
                                           ? embed_half(t.coeff)
                                           : MatR(t.coeff.real())});
    for (const auto& [var, coef] : c.free_terms) core.F(i, var) += coef;
    if (c.rel != Rel::EQ) {
      MatR s(1, 1);
      s(0, 0) = c.rel == Rel::LE ? 1.0 : -1.0;
      core.rows[i].push_back({slack_of[i], s});
    }
  }

  CoreResult r = solve_core(core, tol, max_iter);
  sol_blocks_ = std::move(r.X);
  sol_free_ = r.v;
  sol_dual_ = r.y;
  solved_ = true;

  SolveReport rep;
  rep.status = r.status;
  rep.objective = r.pobj;
  rep.dual_objective = r.dobj;
  rep.duality_gap = std::abs(r.pobj - r.dobj);
  rep.primal_residual = r.pres;
  rep.dual_residual = r.dres;
  rep.iterations = r.iters;
  rep.certificate_norm = r.cert;
  return rep;
}

MatC SdpProblem::psd_value(int block) const {
  if (!solved_) throw std::logic_error("psd_value: solve() first");
  const Block& bl = blocks_[block];
  const MatR& y = sol_blocks_[block];
  if (!bl.complex_herm) return y.cast<cplx>();
  const int n = bl.dim;
  const MatR re = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  const MatR im = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  MatC x(n, n);
  x.real() = re;
  x.imag() = im;
  return 0.5 * (x + x.adjoint().eval());
}

double SdpProblem::free_value(int var) const {
  if (!solved_) throw std::logic_error("free_value: solve() first");
  return sol_free_(var);
}

double SdpProblem::dual_value(int i) const {
  if (!solved_) throw std::logic_error("dual_value: solve() first");
  return sol_dual_(i);
}

void SdpProblem::dump(std::ostream& os) const {
  os << "sdp problem: " << blocks_.size() << " blocks, " << free_names_.size()
     << " free vars, " << cons_.size() << " constraints\n";
  for (const auto& b : blocks_)
    os << "  block " << b.name << " dim " << b.dim << (b.complex_herm ? " hermitian" : " real")
       << "\n";
  for (size_t i = 0; i < cons_.size(); ++i) {
    const auto& c = cons_[i];
    os << "  con[" << i << "] ";
    for (const auto& t : c.terms) os << "<A," << blocks_[t.block].name << "> + ";
    for (const auto& [v, coef] : c.free_terms) os << coef << "*" << free_names_[v] << " + ";
    os << (c.rel == Rel::EQ ? "0 == " : c.rel == Rel::LE ? "0 <= " : "0 >= ") << c.rhs << "\n";
  }
}

}  // namespace nfisac
