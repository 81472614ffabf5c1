#include "nfisac/channel.hpp"

#include <cmath>

#include "doctest.h"
#include "nfisac/rng.hpp"

using namespace nfisac;

TEST_CASE("nf_steering phases match the quadratic model") {
  const double lam = 0.01;

  SUBCASE("centre entry is exactly one") {
    const auto sv = nf_steering(3.7, 1.1, 8, lam / 2, lam);
    CHECK(sv.entries(4) == cplx(1.0, 0.0));
    for (int i = 0; i < sv.entries.size(); ++i)
      CHECK(std::abs(sv.entries(i)) == doctest::Approx(1.0));
  }

  SUBCASE("hand-evaluated entry: m=2, d=lambda/2, theta=60deg, r=10lambda") {
    const auto sv = nf_steering(10 * lam, kPi / 3, 4, lam / 2, lam);
    // phase terms -0.5 lambda + 0.05 lambda -> exp(+j 0.9 pi)
    const cplx expect = std::polar(1.0, 0.9 * kPi);
    CHECK(std::abs(sv.entries(4) - expect) < 1e-12);
  }

  SUBCASE("far-field limit reduces to the plane wave") {
    const double theta = 0.9;
    const auto sv = nf_steering(1e9 * lam, theta, 8, lam / 2, lam);
    for (int m = -4; m <= 4; ++m) {
      const cplx ff = std::polar(1.0, 2 * kPi * m * (lam / 2) * std::cos(theta) / lam);
      CHECK(std::arg(sv.entries(m + 4) * std::conj(ff)) == doctest::Approx(0.0).epsilon(1e-6));
    }
  }

  CHECK_THROWS_AS(nf_steering(-1.0, 0.3, 8, lam / 2, lam), std::invalid_argument);
  CHECK_THROWS_AS(nf_steering(1.0, 0.3, 7, lam / 2, lam), std::invalid_argument);
}

TEST_CASE("sensor_steering folds h_a into the effective range") {
  SystemConfig cfg = SystemConfig::desk_default();

  SUBCASE("3-4-5 triangle") {
    cfg.h_a = 3.0;
    const auto sv = sensor_steering(5.0, 1.0, cfg);
    CHECK(sv.range == doctest::Approx(4.0));
    for (int i = 0; i < sv.entries.size(); ++i)
      CHECK(std::abs(sv.entries(i)) == doctest::Approx(1.0));
  }

  SUBCASE("zero offset equals nf_steering at (r, theta)") {
    cfg.h_a = 0.0;
    const auto a = sensor_steering(2.0, 0.8, cfg);
    const auto b = nf_steering(2.0, 0.8, cfg.m_sensor, cfg.d_s, cfg.lambda_c);
    CHECK((a.entries - b.entries).norm() == doctest::Approx(0.0));
  }

  cfg.h_a = 3.0;
  CHECK_THROWS_AS(sensor_steering(2.0, 1.0, cfg), std::invalid_argument);
}

TEST_CASE("steering derivatives match central finite differences") {
  const double lam = 0.0107;
  Rng rng(3);

  for (int trial = 0; trial < 50; ++trial) {
    const double r = rng.uniform(0.3, 5.0);
    const double th = rng.uniform(0.3, kPi - 0.3);
    const auto sv = nf_steering(r, th, 16, lam / 2, lam);

    const VecC d_r = steering_derivative(sv, DerivAxis::RANGE);
    const VecC d_th = steering_derivative(sv, DerivAxis::ANGLE);

    const double hr = 1e-5 * r;
    const VecC fd_r = (nf_steering(r + hr, th, 16, lam / 2, lam).entries -
                       nf_steering(r - hr, th, 16, lam / 2, lam).entries) /
                      (2 * hr);
    const double ht = 1e-6;
    const VecC fd_th = (nf_steering(r, th + ht, 16, lam / 2, lam).entries -
                        nf_steering(r, th - ht, 16, lam / 2, lam).entries) /
                       (2 * ht);

    CHECK((d_r - fd_r).norm() <= 1e-6 * fd_r.norm());
    CHECK((d_th - fd_th).norm() <= 1e-6 * fd_th.norm());
  }

  SUBCASE("structural zeros") {
    const auto sv = nf_steering(2.0, 0.7, 8, lam / 2, lam);
    CHECK(std::abs(steering_derivative(sv, DerivAxis::ANGLE)(4)) == 0.0);  // m = 0

    const auto sv0 = nf_steering(2.0, 0.0, 8, lam / 2, lam);
    CHECK(steering_derivative(sv0, DerivAxis::ANGLE).norm() == 0.0);  // sin(theta) = 0

    auto svf = nf_steering(std::numeric_limits<double>::infinity(), 0.7, 8, lam / 2, lam);
    CHECK(steering_derivative(svf, DerivAxis::RANGE).norm() == 0.0);
  }

  SUBCASE("inner products with the derivative are purely imaginary") {
    const auto sv = nf_steering(1.7, 1.2, 16, lam / 2, lam);
    const cplx ip_th = sv.entries.dot(steering_derivative(sv, DerivAxis::ANGLE));
    const cplx ip_r = sv.entries.dot(steering_derivative(sv, DerivAxis::RANGE));
    CHECK(std::abs(ip_th.real()) <= 1e-13);
    CHECK(std::abs(ip_r.real()) <= 1e-13 * std::abs(ip_r.imag()));
    CHECK(std::abs(ip_th) <= 1e-12);        // theta derivative: exactly zero inner product
    CHECK(ip_r.imag() > 0.0);               // r derivative: j * positive real
  }
}

TEST_CASE("bs_stars_channel gains and phases") {
  SystemConfig cfg = SystemConfig::desk_default();
  const MatC h = bs_stars_channel(cfg);
  const int mc = cfg.m_star / 2, nc = cfg.n_bs / 2;

  // reference pair: modulus lambda/(4 pi r_br), zero phase
  CHECK(std::abs(h(mc, nc)) == doctest::Approx(cfg.lambda_c / (4 * kPi * cfg.r_br)));
  CHECK(std::arg(h(mc, nc)) == doctest::Approx(0.0));

  // nearest-pair bound on all gains
  const double aperture = mc * cfg.d_r + nc * cfg.d_b;
  const double bound = cfg.lambda_c / (4 * kPi * (cfg.r_br - aperture));
  REQUIRE(cfg.r_br > aperture);
  for (int m = 0; m <= cfg.m_star; ++m)
    for (int i = 0; i <= cfg.n_bs; ++i) CHECK(std::abs(h(m, i)) <= bound);

  // mirror symmetry |H(m,i)| = |H(-m,-i)| (phases too, by symmetric geometry)
  for (int m = 0; m <= cfg.m_star; ++m)
    for (int i = 0; i <= cfg.n_bs; ++i)
      CHECK(std::abs(h(m, i)) ==
            doctest::Approx(std::abs(h(cfg.m_star - m, cfg.n_bs - i))));

  SUBCASE("literal-phase switch changes only the phase") {
    SystemConfig lit = cfg;
    lit.hbr_literal_phase = true;
    const MatC hl = bs_stars_channel(lit);
    for (int m = 0; m <= cfg.m_star; ++m)
      for (int i = 0; i <= cfg.n_bs; ++i)
        CHECK(std::abs(hl(m, i)) == doctest::Approx(std::abs(h(m, i))));
    CHECK((hl - h).norm() > 0.0);
  }
}

TEST_CASE("cu_channel gains use exact per-element ranges") {
  SystemConfig cfg = SystemConfig::desk_default();
  const PolarPosition cu{1.3, 1.9};
  const VecC g = cu_channel(cu, cfg);
  const int half = cfg.m_star / 2;

  for (int m = -half; m <= half; ++m) {
    const double rm = exact_element_range(cu.r, cu.theta, m, cfg.d_r);
    // physical check against the mirrored position (r cos, -r sin) and
    // elements at (m d_r, 0)
    const double dx = cu.r * std::cos(cu.theta) - m * cfg.d_r;
    const double dy = -cu.r * std::sin(cu.theta);
    CHECK(rm == doctest::Approx(std::hypot(dx, dy)));
    CHECK(std::abs(g(m + half)) == doctest::Approx(cfg.lambda_c / (4 * kPi * rm)));
  }

  // centre-entry phase matches the steering centre (zero)
  CHECK(std::arg(g(half)) == doctest::Approx(0.0));

  // far user: all moduli converge to a common value
  const VecC gf = cu_channel({5e3, 1.9}, cfg);
  const double m0 = std::abs(gf(0));
  for (int i = 0; i < gf.size(); ++i)
    CHECK(std::abs(gf(i)) == doctest::Approx(m0).epsilon(1e-3));
}
