#include "nfisac/channel.hpp"

#include <cmath>
#include <limits>

namespace nfisac {

namespace {
const cplx kJ(0.0, 1.0);
}

SteeringVector nf_steering(double r, double theta, int count, double interval,
                           double lambda_c) {
  if (!(r > 0.0)) throw std::invalid_argument("nf_steering: r must be positive");
  if (count < 2 || count % 2) throw std::invalid_argument("nf_steering: count must be even >= 2");
  if (interval <= 0.0 || lambda_c <= 0.0)
    throw std::invalid_argument("nf_steering: interval and lambda must be positive");

  SteeringVector sv;
  sv.range = r;
  sv.angle = theta;
  sv.interval = interval;
  sv.count = count;
  sv.lambda_c = lambda_c;
  sv.entries.resize(count + 1);

  const double k0 = 2.0 * kPi / lambda_c;
  const double ct = std::cos(theta);
  const int half = count / 2;
  const bool farfield = std::isinf(r);
  for (int m = -half; m <= half; ++m) {
    const double lin = -m * interval * ct;
    const double quad = farfield ? 0.0 : (m * m * interval * interval) / (2.0 * r);
    const double phase = -k0 * (lin + quad);
    sv.entries(m + half) = std::polar(1.0, phase);
  }
  sv.entries(half) = 1.0;  // centre entry exactly one
  return sv;
}

double effective_sensor_range(double r, double h_a) {
  if (!(r > h_a)) throw std::invalid_argument("sensor_steering: requires r > h_a");
  return std::sqrt(r * r - h_a * h_a);
}

SteeringVector sensor_steering(double r, double theta, const SystemConfig& cfg) {
  const double r_tilde = effective_sensor_range(r, cfg.h_a);
  return nf_steering(r_tilde, theta, cfg.m_sensor, cfg.d_s, cfg.lambda_c);
}

VecC steering_derivative(const SteeringVector& sv, DerivAxis axis) {
  const int half = sv.count / 2;
  VecC out(sv.count + 1);
  if (axis == DerivAxis::ANGLE) {
    const double f = 2.0 * kPi * sv.interval * std::sin(sv.angle) / sv.lambda_c;
    for (int m = -half; m <= half; ++m)
      out(m + half) = -kJ * (f * m) * sv.entries(m + half);
  } else {
    if (std::isinf(sv.range)) {
      out.setZero();
      return out;
    }
    const double f = kPi * sv.interval * sv.interval / (sv.lambda_c * sv.range * sv.range);
    for (int m = -half; m <= half; ++m)
      out(m + half) = kJ * (f * m * m) * sv.entries(m + half);
  }
  return out;
}

MatC bs_stars_channel(const SystemConfig& cfg) {
  cfg.validate();
  const auto star = element_positions(cfg, ArrayKind::STAR);
  const auto bs = element_positions(cfg, ArrayKind::BS);
  const int rows = static_cast<int>(star.size());
  const int cols = static_cast<int>(bs.size());
  const double wavenumber = cfg.hbr_literal_phase ? 1.0 : 2.0 * kPi / cfg.lambda_c;
  MatC h(rows, cols);
  for (int m = 0; m < rows; ++m) {
    for (int i = 0; i < cols; ++i) {
      const double dist = std::hypot(star[m].p_x - bs[i].p_x, star[m].p_y - bs[i].p_y);
      const double gain = cfg.lambda_c / (4.0 * kPi * dist);
      h(m, i) = std::polar(gain, -wavenumber * (dist - cfg.r_br));
    }
  }
  return h;
}

double exact_element_range(double r, double theta, int m, double interval) {
  const double md = m * interval;
  return std::sqrt(r * r - 2.0 * md * r * std::cos(theta) + md * md);
}

VecC cu_channel(const PolarPosition& pos, const SystemConfig& cfg) {
  cfg.validate();
  if (!(pos.r > 0.0)) throw std::invalid_argument("cu_channel: r must be positive");
  const SteeringVector alpha =
      nf_steering(pos.r, pos.theta, cfg.m_star, cfg.d_r, cfg.lambda_c);
  const int half = cfg.m_star / 2;
  VecC g(cfg.star_elements());
  for (int m = -half; m <= half; ++m) {
    const double rm = exact_element_range(pos.r, pos.theta, m, cfg.d_r);
    g(m + half) = (cfg.lambda_c / (4.0 * kPi * rm)) * alpha.entries(m + half);
  }
  return g;
}

}  // namespace nfisac
