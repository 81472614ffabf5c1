#pragma once

#include "nfisac/geometry.hpp"
#include "nfisac/types.hpp"

namespace nfisac {

/// Near-field steering vector under the quadratic Taylor phase model.
/// Entry m (m = -count/2..count/2) has unit modulus and phase
///   -(2*pi/lambda) * (-m*d*cos(theta) + m^2 d^2 / (2 r)).
/// The centre entry is exactly 1. range = +inf selects the far-field limit
/// (the quadratic term vanishes).
struct SteeringVector {
  VecC entries;
  double range = 0.0;     // range parameter the phases were evaluated at [m]
  double angle = 0.0;     // azimuth [rad]
  double interval = 0.0;  // element interval [m]
  int count = 0;          // even count parameter (entries.size() == count+1)
  double lambda_c = 0.0;
};

enum class DerivAxis { RANGE, ANGLE };

/// Deterministic channels of one scenario.
struct ChannelSet {
  MatC h_br;  // (M+1) x (N+1) BS->STARS LoS channel
  VecC g_c;   // (M+1) STARS->CU channel
};

SteeringVector nf_steering(double r, double theta, int count, double interval,
                           double lambda_c);

/// Sensor-side steering: nf_steering at the effective range
/// r_tilde = sqrt(r^2 - h_a^2) with the sensor interval. Requires r > h_a.
SteeringVector sensor_steering(double r, double theta, const SystemConfig& cfg);

double effective_sensor_range(double r, double h_a);

/// Analytic derivative of the steering entries with respect to the vector's
/// own range or angle parameter:
///   d[alpha]_m/dtheta = -j (2 pi m d sin(theta) / lambda) [alpha]_m
///   d[alpha]_m/dr     =  j (pi m^2 d^2 / (lambda r^2))    [alpha]_m
/// For range = +inf the RANGE derivative is the zero vector.
VecC steering_derivative(const SteeringVector& sv, DerivAxis axis);

/// BS->STARS LoS channel, entry (m,i) with modulus lambda/(4 pi r(m,i)) and
/// phase -(2 pi/lambda)(r(m,i) - r_br) (or the literal -(r(m,i) - r_br) when
/// cfg.hbr_literal_phase is set). The (0,0) entry has zero phase.
MatC bs_stars_channel(const SystemConfig& cfg);

/// STARS->CU channel g_c: entry m = lambda/(4 pi r^(m)) * [alpha(r,theta)]_m
/// with the exact per-element range r^(m). The CU angle is measured in the
/// transmit half-space; its position mirrors across the STARS line (y -> -y)
/// so the exact ranges agree with the Taylor model of alpha(r, theta).
VecC cu_channel(const PolarPosition& pos, const SystemConfig& cfg);

/// Exact per-element distance sqrt(r^2 - 2 m d r cos(theta) + m^2 d^2) used
/// by cu_channel and by the mismatch-study echo synthesizer.
double exact_element_range(double r, double theta, int m, double interval);

}  // namespace nfisac
