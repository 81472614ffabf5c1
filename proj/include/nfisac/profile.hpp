#pragma once

#include "nfisac/types.hpp"

namespace nfisac {

/// STARS transmit/reflect coefficient vectors q_t, q_r (length M+1) and
/// their Hermitian outer products Q_t, Q_r. Energy split per element:
/// |q_r,m|^2 + |q_t,m|^2 <= 1. The matrices are what the passive
/// optimization works on; the vectors are the extracted rank-one solution.
struct StarsProfile {
  VecC q_r, q_t;
  MatC big_q_r, big_q_t;

  MatC theta_r() const { return MatC(q_r.asDiagonal()); }
  MatC theta_t() const { return MatC(q_t.asDiagonal()); }

  void sync_outer_products() {
    big_q_r = q_r * q_r.adjoint();
    big_q_t = q_t * q_t.adjoint();
  }

  /// Uniform energy split (sqrt(2)/2 amplitudes, zero phases) on all
  /// elements; the standard algorithm initialization.
  static StarsProfile uniform_split(int m_star) {
    StarsProfile p;
    const int n = m_star + 1;
    const double amp = std::sqrt(2.0) / 2.0;
    p.q_r = VecC::Constant(n, cplx(amp, 0.0));
    p.q_t = VecC::Constant(n, cplx(amp, 0.0));
    p.sync_outer_products();
    return p;
  }

  /// Largest per-element energy-split violation, max_m (|q_r|^2+|q_t|^2) - 1.
  double split_violation() const {
    double worst = 0.0;
    for (int m = 0; m < q_r.size(); ++m) {
      const double s = std::norm(q_r(m)) + std::norm(q_t(m));
      worst = std::max(worst, s - 1.0);
    }
    return worst;
  }
};

}  // namespace nfisac
