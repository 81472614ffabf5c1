#pragma once

#include <stdexcept>
#include <vector>

#include "nfisac/types.hpp"

namespace nfisac {

/// Array geometry and physical constants of the BS / STARS / sensor setup.
///
/// Counts follow the symmetric-index convention: a count parameter M (even)
/// describes the index set {-M/2, ..., 0, ..., M/2}, i.e. M+1 physical
/// elements with the centre element at the origin. All closed-form norm
/// identities used downstream (e.g. M(M+1)(M+2)/12) are exact under this
/// convention.
struct SystemConfig {
  int n_bs = 16;       // BS antenna count parameter N (N+1 antennas)
  int m_star = 16;     // STAR element count parameter M (M+1 elements)
  int m_sensor = 16;   // sensor count parameter M_r (M_r+1 sensors)
  double d_b = 0.0;    // BS antenna interval [m]
  double d_r = 0.0;    // STAR element interval [m]
  double d_s = 0.0;    // sensor interval [m]
  double h_a = 0.0;    // sensor-plane offset along z [m]
  double r_br = 2.0;   // BS-STARS distance [m]
  double lambda_c = 0.0107068735;  // carrier wavelength [m] (28 GHz)

  // When true, the BS-STARS channel phase uses the literal exponent
  // -(r(m,i) - r_br) without the 2*pi/lambda wavenumber.
  bool hbr_literal_phase = false;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;

  int bs_elements() const { return n_bs + 1; }
  int star_elements() const { return m_star + 1; }
  int sensor_elements() const { return m_sensor + 1; }

  /// Convenience: defaults with half-wavelength spacing everywhere.
  static SystemConfig desk_default();
};

struct PolarPosition {
  double r = 0.0;      // range from STARS centre [m]
  double theta = 0.0;  // azimuth [rad], (0, pi) for the simulated sector
};

struct CartesianPosition {
  double p_x = 0.0;
  double p_y = 0.0;
};

enum class ArrayKind { BS, STAR, SENSOR };

/// Element positions in the x-y plane, ordered by index m = -K/2..K/2.
/// STAR elements sit at (m*d_r, 0), sensors at (m*d_s, -h_a), BS antennas
/// at (i*d_b, -r_br).
std::vector<CartesianPosition> element_positions(const SystemConfig& cfg, ArrayKind array);

CartesianPosition cartesian_from_polar(const PolarPosition& p);

/// Inverse of cartesian_from_polar; rejects the origin.
PolarPosition polar_from_cartesian(const CartesianPosition& p);

/// Jacobian of the Cartesian -> polar map, stored with gamma = (r, theta)
/// along columns and eta = (p_x, p_y) along rows:
///
///   T = [ dr/dp_x  dtheta/dp_x ]
///       [ dr/dp_y  dtheta/dp_y ]
///
/// This orientation makes T^H T diagonal (columns orthogonal), det(T) = 1/r,
/// and tr((T J T^H)^-1) the position error bound for a polar FIM J ordered
/// (r, theta). Rejects r = 0.
Mat2 jacobian_T(const PolarPosition& pos);

/// T_tilde = ((p_x+p_y)^2 / (p_x^2 p_y^2)) * T^-1 (T^H)^-1, symmetric
/// positive definite, diagonal entries ordered (r, theta) like T's columns.
/// Rejects p_x*p_y = 0.
Mat2 t_tilde(const CartesianPosition& pos, const Mat2& T);

}  // namespace nfisac
