#include <cmath>
#include <random>

#include "doctest.h"
#include "jjepr/error.hpp"
#include "jjepr/model.hpp"

using namespace jjepr;
using doctest::Approx;

TEST_CASE("collective masses") {
  auto m0 = collective_masses(JunctionSystem(1.0, 100.0, 0.0));
  CHECK(m0.m_plus == 0.125);
  CHECK(m0.m_minus == 0.125);

  auto m1 = collective_masses(JunctionSystem(1.0, 100.0, 0.9995));
  CHECK(m1.m_plus == 0.125);
  CHECK(m1.m_minus == Approx(499.875).epsilon(1e-12));
  CHECK(m1.m_minus / m1.m_plus == Approx(3999.0).epsilon(1e-12));

  auto m2 = collective_masses(JunctionSystem(2.0, 100.0, 0.5));
  CHECK(m2.m_plus == Approx(0.0625));
  CHECK(m2.m_minus == Approx(0.1875));
}

TEST_CASE("mass invariants hold for random parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ec(0.1, 10.0), z(0.0, 0.9999);
  for (int trial = 0; trial < 200; ++trial) {
    const double e_c = ec(rng), zeta = z(rng);
    const auto m = collective_masses(JunctionSystem(e_c, 50.0, zeta));
    CHECK(m.m_plus == 1.0 / (8.0 * e_c));
    CHECK(m.m_minus >= m.m_plus);
    CHECK(m.m_minus / m.m_plus == Approx((1.0 + zeta) / (1.0 - zeta)).epsilon(1e-12));
  }
}

TEST_CASE("junction system validation") {
  CHECK_THROWS_AS(JunctionSystem(1.0, 100.0, 1.0), ValidationError);
  CHECK_THROWS_AS(JunctionSystem(1.0, 100.0, -0.1), ValidationError);
  CHECK_THROWS_AS(JunctionSystem(0.0, 100.0, 0.1), ValidationError);
  CHECK_THROWS_AS(JunctionSystem(1.0, -1.0, 0.1), ValidationError);
  CHECK_THROWS_AS(JunctionSystem(1.0, 100.0, 0.1, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(JunctionSystem(1.0, 100.0, 0.1, 0.0, -1.2), ValidationError);
  CHECK_NOTHROW(JunctionSystem(1.0, 100.0, 0.999999, 0.99, -0.99));
}

TEST_CASE("collective potential") {
  const JunctionSystem unit(1.0, 1.0, 0.0);
  CHECK(potential_2d(unit, 0.0, 0.0) == Approx(-2.0));
  CHECK(potential_2d(unit, kPi * kSqrt2, 0.0) == Approx(2.0));

  const JunctionSystem biased(1.0, 100.0, 0.0, 0.1, 0.1);
  const double expected = -2.0 * 100.0 * std::cos(1.0) - 100.0 / kSqrt2 * 0.2 * kSqrt2;
  CHECK(potential_2d(biased, kSqrt2, 0.0) == Approx(expected).epsilon(1e-12));
  CHECK(potential_2d(biased, kSqrt2, 0.0) == Approx(-128.0604).epsilon(1e-6));
}

TEST_CASE("collective potential equals the lab potential pointwise") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(-8.0, 8.0), bias(-0.9, 0.9), z(0.0, 0.99);
  for (int trial = 0; trial < 500; ++trial) {
    const JunctionSystem sys(1.0, 37.0, z(rng), bias(rng), bias(rng));
    const double t1 = th(rng), t2 = th(rng);
    const auto [p, m] = to_collective(t1, t2);
    const double lab = potential_lab(sys, t1, t2);
    CHECK(potential_2d(sys, p, m) == Approx(lab).epsilon(1e-12).scale(std::abs(lab) + 1.0));
  }
}

TEST_CASE("unbiased collective potential is even in each argument") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> th(-6.0, 6.0);
  const JunctionSystem sys(1.0, 100.0, 0.7);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = th(rng), m = th(rng);
    const double v = potential_2d(sys, p, m);
    CHECK(potential_2d(sys, -p, m) == Approx(v));
    CHECK(potential_2d(sys, p, -m) == Approx(v));
  }
}

TEST_CASE("single-junction washboard") {
  CHECK(potential_washboard_1d(1.0, 0.0, 0.0) == Approx(-1.0));
  CHECK(potential_washboard_1d(1.0, 0.5, 2.0 * kPi) == Approx(-4.14159265).epsilon(1e-8));

  // critical bias: the minimum and maximum merge into an inflection at pi/2
  const double h = 1e-4, x = kPi / 2;
  auto v = [](double t) { return potential_washboard_1d(1.0, 1.0, t); };
  const double d1 = (v(x + h) - v(x - h)) / (2 * h);
  const double d2 = (v(x + h) - 2 * v(x) + v(x - h)) / (h * h);
  CHECK(std::abs(d1) < 1e-8);
  CHECK(std::abs(d2) < 1e-6);
}

TEST_CASE("collective transform") {
  auto [a, b] = to_collective(1.0, 1.0);
  CHECK(a == Approx(kSqrt2));
  CHECK(b == Approx(0.0));
  auto [c, d] = to_collective(1.0, -1.0);
  CHECK(c == Approx(0.0));
  CHECK(d == Approx(kSqrt2));
  auto [x1, x2] = from_collective(to_collective(0.3, -0.7).first, to_collective(0.3, -0.7).second);
  CHECK(x1 == Approx(0.3).epsilon(1e-15));
  CHECK(x2 == Approx(-0.7).epsilon(1e-15));
}

TEST_CASE("covariance rotation is an involution") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 2.0), c(-0.05, 0.05);
  for (int trial = 0; trial < 100; ++trial) {
    const Covariance2 lab{u(rng), u(rng), c(rng)};
    const auto back = rotate_covariance(rotate_covariance(lab));
    CHECK(back.var_first == Approx(lab.var_first));
    CHECK(back.var_second == Approx(lab.var_second));
    CHECK(back.cov == Approx(lab.cov).scale(1.0));
  }
}

TEST_CASE("harmonic reference closed forms") {
  const auto r0 = harmonic_reference(JunctionSystem(1.0, 100.0, 0.0));
  CHECK(r0.s_harmonic == Approx(1.0));
  CHECK(r0.cross_theta_norm == Approx(0.0).scale(1.0));

  const auto r1 = harmonic_reference(JunctionSystem(1.0, 100.0, 0.976));
  CHECK(r1.s_harmonic == Approx(std::pow(1.976 / 0.024, 0.25)));
  CHECK(r1.s_harmonic == Approx(3.01).epsilon(2e-3));

  const auto r2 = harmonic_reference(JunctionSystem(1.0, 100.0, 0.9995));
  CHECK(r2.s_harmonic == Approx(std::pow(3999.0, 0.25)));
  CHECK(r2.s_harmonic == Approx(7.95).epsilon(1e-3));
  CHECK(r2.omega0 == Approx(28.2843).epsilon(1e-5));

  const auto r3 = harmonic_reference(JunctionSystem(1.0, 100.0, 0.6));
  CHECK(r3.cross_theta_norm == Approx(0.25));
}

TEST_CASE("harmonic reference is monotone in zeta") {
  double last_s = 0.0, last_c = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const double zeta = 0.999 * i / 999.0;
    const auto r = harmonic_reference(JunctionSystem(1.0, 100.0, zeta));
    CHECK(r.s_harmonic > last_s);
    CHECK(r.cross_theta_norm > last_c);
    CHECK(r.cross_theta_norm < 0.5);
    last_s = r.s_harmonic;
    last_c = r.cross_theta_norm;
  }
}

TEST_CASE("SI conversion") {
  PhysicalUnits u;
  u.junction_capacitance = 1e-12;
  u.critical_current = 1e-6;
  u.coupling_capacitance = 0.0;
  CHECK(si_conversion(u).zeta() == 0.0);
  CHECK(si_conversion(u).e_c() == 1.0);

  u.coupling_capacitance = 1e-12;
  CHECK(si_conversion(u).zeta() == Approx(0.5));

  u.coupling_capacitance = 1999e-12;
  CHECK(si_conversion(u).zeta() == Approx(0.9995));

  // E_J/E_C = (hbar I_c / 2e) / (e^2 / C_J)
  const double ratio = (1.054571817e-34 * 1e-6 / (2 * 1.602176634e-19)) /
                       (1.602176634e-19 * 1.602176634e-19 / 1e-12);
  CHECK(si_conversion(u).e_j() == Approx(ratio));

  u.critical_current = 0.0;
  CHECK_THROWS_AS(si_conversion(u), ValidationError);
  u.critical_current = 1e-6;
  u.junction_capacitance = -1.0;
  CHECK_THROWS_AS(si_conversion(u), ValidationError);
}
