#include "nfisac/fim.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nfisac {

void Scenario::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
  if (!(sigma2 > 0.0)) fail("Scenario: sigma2 must be positive");
  if (l_slots < 1) fail("Scenario: l_slots must be >= 1");
  if (!(omega0 > 0.0 && omega0 < 1.0)) fail("Scenario: omega0 must lie in (0,1)");
  if (!(eps0 > 0.0)) fail("Scenario: eps0 must be positive");
  if (!(p_max > 0.0)) fail("Scenario: p_max must be positive");
  if (m0 < 2) fail("Scenario: m0 must be >= 2");
  if (!(st.r > 0.0) || !(cu.r > 0.0)) fail("Scenario: positions need positive range");
}

std::pair<VecR, VecR> index_vectors(int count) {
  if (count < 2 || count % 2)
    throw std::invalid_argument("index_vectors: count must be even >= 2");
  const int half = count / 2;
  VecR v1(count + 1), v2(count + 1);
  for (int m = -half; m <= half; ++m) {
    v1(m + half) = m;
    v2(m + half) = double(m) * double(m);
  }
  return {v1, v2};
}

double norm_v1_sq(int count) {
  const double m = count;
  return m * (m + 1.0) * (m + 2.0) / 12.0;
}

double norm_v2_sq(int count) {
  const double m = count;
  return m * (m + 1.0) * (m + 2.0) * (3.0 * m * m + 6.0 * m - 4.0) / 240.0;
}

AssembledA assemble_A(const PolarPosition& st, const SystemConfig& cfg) {
  AssembledA out;
  const double r_tilde = effective_sensor_range(st.r, cfg.h_a);
  out.alpha_r = sensor_steering(st.r, st.theta, cfg);
  out.alpha_t = nf_steering(st.r, st.theta, cfg.m_star, cfg.d_r, cfg.lambda_c);

  const VecC& ar = out.alpha_r.entries;
  const VecC& at = out.alpha_t.entries;
  out.a = ar * at.adjoint();

  const VecC dar_dth = steering_derivative(out.alpha_r, DerivAxis::ANGLE);
  const VecC dat_dth = steering_derivative(out.alpha_t, DerivAxis::ANGLE);
  out.da_dtheta = dar_dth * at.adjoint() + ar * dat_dth.adjoint();

  // alpha_r is parameterized by r_tilde(r); the chain rule contributes
  // d r_tilde / d r = r / r_tilde on the sensor-side term.
  const double chain = st.r / r_tilde;
  const VecC dar_dr = steering_derivative(out.alpha_r, DerivAxis::RANGE) * chain;
  const VecC dat_dr = steering_derivative(out.alpha_t, DerivAxis::RANGE);
  out.da_dr = dar_dr * at.adjoint() + ar * dat_dr.adjoint();
  return out;
}

MatC reflected_covariance(const MatC& rx, const StarsProfile& profile, const MatC& h_br) {
  const MatC th = profile.theta_r();
  const MatC m = th * h_br;
  MatC rbar = m * rx * m.adjoint();
  rbar = 0.5 * (rbar + rbar.adjoint().eval());
  return rbar;
}

namespace {

void check_psd(const MatC& rx, const char* who) {
  Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (rx + rx.adjoint()),
                                         Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (lo < -1e-8 * scale) {
    std::ostringstream os;
    os << who << ": covariance is not PSD (min eigenvalue " << lo << ")";
    throw std::invalid_argument(os.str());
  }
}

double fim_prefactor(const Scenario& scn) {
  return 2.0 * std::norm(scn.alpha_s) * scn.l_slots / scn.sigma2;
}

FimReport finalize_report(Mat2 j, FimMethod method, const PolarPosition& st) {
  FimReport rep;
  j = 0.5 * (j + j.transpose().eval());
  rep.j_polar = j;
  rep.method = method;
  const double denom = std::sqrt(std::max(j(0, 0) * j(1, 1), 0.0));
  rep.offdiag_ratio = denom > 0.0 ? std::abs(j(0, 1)) / denom : 0.0;
  try {
    rep.speb = speb_from_fim(rep, cartesian_from_polar(st));
  } catch (const std::domain_error&) {
    // No information (e.g. alpha_s = 0): the bound is infinite.
    rep.speb = std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace

FimReport exact_fim(const MatC& rx, const StarsProfile& profile, const PolarPosition& st,
                    const Scenario& scn, const SystemConfig& cfg, const MatC& h_br) {
  scn.validate();
  check_psd(rx, "exact_fim");
  const AssembledA asm_a = assemble_A(st, cfg);
  const MatC rbar = reflected_covariance(rx, profile, h_br);
  const double pref = fim_prefactor(scn);

  auto entry = [&](const MatC& dx, const MatC& dy) {
    return pref * (rbar * (dx.adjoint() * dy)).trace().real();
  };
  Mat2 j;
  j(0, 0) = entry(asm_a.da_dtheta, asm_a.da_dtheta);
  j(0, 1) = entry(asm_a.da_dtheta, asm_a.da_dr);
  j(1, 0) = entry(asm_a.da_dr, asm_a.da_dtheta);
  j(1, 1) = entry(asm_a.da_dr, asm_a.da_dr);
  return finalize_report(j, FimMethod::EXACT, st);
}

FimReport exact_fim(const MatC& rx, const StarsProfile& profile, const PolarPosition& st,
                    const Scenario& scn, const SystemConfig& cfg) {
  return exact_fim(rx, profile, st, scn, cfg, bs_stars_channel(cfg));
}

CorrelationFactors correlation_factors(const MatC& rx, const StarsProfile& profile,
                                       const PolarPosition& st, const SystemConfig& cfg,
                                       const MatC& h_br) {
  const auto [v1t, v2t] = index_vectors(cfg.m_star);
  const VecC at = nf_steering(st.r, st.theta, cfg.m_star, cfg.d_r, cfg.lambda_c).entries;
  const MatC rbar = reflected_covariance(rx, profile, h_br);
  const MatC abar = at * at.adjoint();
  const VecC d1a = v1t.cast<cplx>().asDiagonal() * at;
  const VecC d2a = v2t.cast<cplx>().asDiagonal() * at;

  CorrelationFactors f;
  // Reflected-side route: traces against Rbar.
  f.a = (rbar * abar).trace().real();
  f.b1 = (d1a.adjoint() * rbar * d1a).value().real();
  f.b2 = (d2a.adjoint() * rbar * d2a).value().real();
  f.c = 2.0 * (d2a.adjoint() * rbar * at).value().real();

  // R_x-side route: quadratic forms through the cascaded channel.
  const MatC cascade = (profile.theta_r() * h_br).adjoint();  // H^H Theta_r^H
  const VecC u_a = cascade * at;
  const VecC u_b1 = cascade * d1a;
  const VecC u_b2 = cascade * d2a;
  f.a_rx = (u_a.adjoint() * rx * u_a).value().real();
  f.b1_rx = (u_b1.adjoint() * rx * u_b1).value().real();
  f.b2_rx = (u_b2.adjoint() * rx * u_b2).value().real();
  f.c_rx = 2.0 * (u_b2.adjoint() * rx * u_a).value().real();
  return f;
}

CorrelationFactors correlation_factors(const MatC& rx, const StarsProfile& profile,
                                       const PolarPosition& st, const SystemConfig& cfg) {
  return correlation_factors(rx, profile, st, cfg, bs_stars_channel(cfg));
}

Vec2 closed_form_j_diag(const CorrelationFactors& cf, double d_s, int m_r,
                        const PolarPosition& st, const Scenario& scn,
                        const SystemConfig& cfg, const ClosedFormVariant& variant) {
  const double lam = cfg.lambda_c;
  const double k = 2.0 * std::norm(scn.alpha_s) * kPi * kPi * scn.l_slots /
                   (scn.sigma2 * lam * lam);
  const double st2 = std::sin(st.theta) * std::sin(st.theta);
  const double r = st.r;
  const double rt = effective_sensor_range(r, cfg.h_a);
  const double ds2 = d_s * d_s;
  const double dr2 = cfg.d_r * cfg.d_r;
  const double n1 = norm_v1_sq(m_r);
  const double n2 = norm_v2_sq(m_r);
  const double b_theta = variant.b_theta_uses_v2 ? cf.b2 : cf.b1;

  Vec2 j;
  j(0) = 4.0 * k * st2 *
         (ds2 * n1 * cf.a + dr2 * (variant.b_theta_constant / 12.0) * m_r * b_theta);
  j(1) = k * (ds2 * ds2 * n2 * cf.a / (rt * rt * rt * rt) -
              ds2 * dr2 * n1 * cf.c / (rt * rt * r * r) +
              dr2 * dr2 * m_r * cf.b2 / (r * r * r * r));
  return j;
}

FimReport closed_form_fim(const MatC& rx, const StarsProfile& profile,
                          const PolarPosition& st, const Scenario& scn,
                          const SystemConfig& cfg, const MatC& h_br,
                          const ClosedFormVariant& variant) {
  scn.validate();
  const CorrelationFactors cf = correlation_factors(rx, profile, st, cfg, h_br);
  const Vec2 d = closed_form_j_diag(cf, cfg.d_s, cfg.m_sensor, st, scn, cfg, variant);
  Mat2 j = Mat2::Zero();
  j(0, 0) = d(0);
  j(1, 1) = d(1);
  return finalize_report(j, FimMethod::CLOSED_FORM, st);
}

FimReport closed_form_fim(const MatC& rx, const StarsProfile& profile,
                          const PolarPosition& st, const Scenario& scn,
                          const SystemConfig& cfg, const ClosedFormVariant& variant) {
  return closed_form_fim(rx, profile, st, scn, cfg, bs_stars_channel(cfg), variant);
}

double speb_diag_path(const Mat2& j_polar, const CartesianPosition& pos) {
  const PolarPosition pol = polar_from_cartesian(pos);
  const Mat2 tt = t_tilde(pos, jacobian_T(pol));
  // t_tilde orders its diagonal (r, theta); the FIM orders (theta, r).
  const double scale = (pos.p_x * pos.p_x * pos.p_y * pos.p_y) /
                       ((pos.p_x + pos.p_y) * (pos.p_x + pos.p_y));
  return scale * (tt(1, 1) / j_polar(0, 0) + tt(0, 0) / j_polar(1, 1));
}

double speb_from_fim(const FimReport& rep, const CartesianPosition& pos) {
  const Mat2& j = rep.j_polar;
  const PolarPosition pol = polar_from_cartesian(pos);
  const Mat2 t = jacobian_T(pol);
  // Reorder T's columns to the FIM's (theta, r) block order.
  Mat2 tf;
  tf.col(0) = t.col(1);
  tf.col(1) = t.col(0);
  const Mat2 j_eta = tf * j * tf.transpose();
  const double det = j_eta.determinant();
  const double scale = j_eta.cwiseAbs().maxCoeff();
  if (!(det > 0.0) || det < 1e-28 * scale * scale) {
    std::ostringstream os;
    os << "speb_from_fim: unobservable configuration, det(J_eta) = " << det
       << ", |J_eta|_max = " << scale;
    throw std::domain_error(os.str());
  }
  return j_eta.inverse().trace();
}

MatC snapshots_exact(const MatC& rx, int l_slots) {
  const int n = static_cast<int>(rx.rows());
  if (l_slots < n)
    throw std::invalid_argument("snapshots_exact: need l_slots >= matrix dimension");
  Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (rx + rx.adjoint()));
  const VecR ev = es.eigenvalues().cwiseMax(0.0);
  MatC x = MatC::Zero(n, l_slots);
  x.leftCols(n) = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
  return std::sqrt(double(l_slots)) * x;
}

FimReport fd_fim_oracle(const MatC& x_bar, const StarsProfile& profile,
                        const PolarPosition& st, const Scenario& scn,
                        const SystemConfig& cfg, const MatC& h_br) {
  scn.validate();
  const int mr1 = cfg.sensor_elements();
  const int l = static_cast<int>(x_bar.cols());
  if (mr1 * l > 10000)
    throw std::invalid_argument("fd_fim_oracle: instance too large for the oracle");

  const MatC base = profile.theta_r() * h_br * x_bar;  // (M+1) x L

  // Mean matrix (vectorization is irrelevant for the inner products below).
  auto mean_at = [&](double r, double theta) -> MatC {
    const VecC ar = sensor_steering(r, theta, cfg).entries;
    const VecC at = nf_steering(r, theta, cfg.m_star, cfg.d_r, cfg.lambda_c).entries;
    return scn.alpha_s * ar * (at.adjoint() * base);
  };

  // Central difference with one Richardson extrapolation level and a
  // convergence check between the h and h/2 estimates.
  auto derivative = [&](int axis) -> MatC {
    const double h0 = axis == 0 ? 1e-5 * std::max(std::abs(st.theta), 1.0)
                                : 1e-5 * st.r;
    auto central = [&](double h) -> MatC {
      const double rp = axis == 1 ? st.r + h : st.r;
      const double rm = axis == 1 ? st.r - h : st.r;
      const double tp = axis == 0 ? st.theta + h : st.theta;
      const double tm = axis == 0 ? st.theta - h : st.theta;
      return (mean_at(rp, tp) - mean_at(rm, tm)) / (2.0 * h);
    };
    const MatC d1 = central(h0);
    const MatC d2 = central(h0 / 2.0);
    const MatC rich = (4.0 * d2 - d1) / 3.0;
    const double disagree = (d2 - d1).norm();
    if (disagree > 1e-3 * rich.norm() + 1e-300) {
      std::ostringstream os;
      os << "fd_fim_oracle: Richardson check failed on axis " << axis
         << " (relative step disagreement " << disagree / rich.norm() << ")";
      throw std::runtime_error(os.str());
    }
    return rich;
  };

  const MatC d_theta = derivative(0);
  const MatC d_r = derivative(1);

  auto entry = [&](const MatC& a, const MatC& b) {
    return (2.0 / scn.sigma2) * (a.conjugate().cwiseProduct(b)).sum().real();
  };
  Mat2 j;
  j(0, 0) = entry(d_theta, d_theta);
  j(0, 1) = entry(d_theta, d_r);
  j(1, 0) = j(0, 1);
  j(1, 1) = entry(d_r, d_r);
  return finalize_report(j, FimMethod::FD_ORACLE, st);
}

}  // namespace nfisac
