#include "nfisac/geometry.hpp"

#include <cmath>

namespace nfisac {

void SystemConfig::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
  if (n_bs < 2 || m_star < 2 || m_sensor < 2) fail("SystemConfig: counts must be >= 2");
  if (n_bs % 2 || m_star % 2 || m_sensor % 2)
    fail("SystemConfig: counts must be even (symmetric index sets)");
  if (d_b <= 0 || d_r <= 0 || d_s <= 0) fail("SystemConfig: intervals must be positive");
  if (h_a < 0) fail("SystemConfig: h_a must be nonnegative");
  if (r_br <= 0 || lambda_c <= 0) fail("SystemConfig: r_br and lambda_c must be positive");
  // Deployment feasibility: the sensor aperture cannot exceed the STAR aperture.
  if (m_sensor * d_s > m_star * d_r * (1.0 + 1e-12))
    fail("SystemConfig: m_sensor * d_s <= m_star * d_r violated");
}

SystemConfig SystemConfig::desk_default() {
  SystemConfig cfg;
  cfg.d_b = cfg.lambda_c / 2.0;
  cfg.d_r = cfg.lambda_c / 2.0;
  cfg.d_s = cfg.lambda_c / 2.0;
  cfg.h_a = cfg.lambda_c;
  cfg.validate();
  return cfg;
}

std::vector<CartesianPosition> element_positions(const SystemConfig& cfg, ArrayKind array) {
  cfg.validate();
  int count = 0;
  double interval = 0.0, offset = 0.0;
  switch (array) {
    case ArrayKind::BS:
      count = cfg.n_bs;
      interval = cfg.d_b;
      offset = -cfg.r_br;
      break;
    case ArrayKind::STAR:
      count = cfg.m_star;
      interval = cfg.d_r;
      offset = 0.0;
      break;
    case ArrayKind::SENSOR:
      count = cfg.m_sensor;
      interval = cfg.d_s;
      offset = -cfg.h_a;
      break;
  }
  std::vector<CartesianPosition> out;
  out.reserve(count + 1);
  const int half = count / 2;
  for (int m = -half; m <= half; ++m) out.push_back({m * interval, offset});
  return out;
}

CartesianPosition cartesian_from_polar(const PolarPosition& p) {
  return {p.r * std::cos(p.theta), p.r * std::sin(p.theta)};
}

PolarPosition polar_from_cartesian(const CartesianPosition& p) {
  const double r = std::hypot(p.p_x, p.p_y);
  if (r == 0.0) throw std::invalid_argument("polar_from_cartesian: origin has no angle");
  return {r, std::atan2(p.p_y, p.p_x)};
}

Mat2 jacobian_T(const PolarPosition& pos) {
  if (pos.r <= 0.0) throw std::invalid_argument("jacobian_T: r must be positive");
  const double c = std::cos(pos.theta), s = std::sin(pos.theta);
  Mat2 T;
  // columns: (r, theta); rows: (p_x, p_y)
  T(0, 0) = c;
  T(1, 0) = s;
  T(0, 1) = -s / pos.r;
  T(1, 1) = c / pos.r;
  return T;
}

Mat2 t_tilde(const CartesianPosition& pos, const Mat2& T) {
  if (pos.p_x == 0.0 || pos.p_y == 0.0)
    throw std::invalid_argument("t_tilde: degenerate position (p_x * p_y = 0)");
  const double det = T.determinant();
  if (std::abs(det) < 1e-300) throw std::invalid_argument("t_tilde: T is singular");
  const Mat2 Tinv = T.inverse();
  const double sum = pos.p_x + pos.p_y;
  const double scale = (sum * sum) / (pos.p_x * pos.p_x * pos.p_y * pos.p_y);
  Mat2 out = scale * (Tinv * Tinv.transpose());
  // Symmetrize against round-off; the product is symmetric by construction.
  out = 0.5 * (out + out.transpose().eval());
  return out;
}

}  // namespace nfisac
