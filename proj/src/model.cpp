#include "jjepr/model.hpp"

#include <cmath>
#include <sstream>

#include "jjepr/error.hpp"

namespace jjepr {

namespace {
constexpr double kElementaryCharge = 1.602176634e-19;  // C
constexpr double kHbar = 1.054571817e-34;              // J s
}  // namespace

JunctionSystem::JunctionSystem(double e_c, double e_j, double zeta, double j1, double j2)
    : e_c_(e_c), e_j_(e_j), zeta_(zeta), j1_(j1), j2_(j2) {
  auto finite = [](double x) { return std::isfinite(x); };
  require(finite(e_c) && e_c > 0.0, "junction system: e_c must be positive");
  require(finite(e_j) && e_j > 0.0, "junction system: e_j must be positive");
  if (!(finite(zeta) && zeta >= 0.0 && zeta < 1.0)) {
    std::ostringstream msg;
    msg << "junction system: zeta must lie in [0, 1), got " << zeta;
    throw ValidationError(msg.str());
  }
  require(finite(j1) && std::abs(j1) < 1.0, "junction system: |j1| must be below 1");
  require(finite(j2) && std::abs(j2) < 1.0, "junction system: |j2| must be below 1");
}

CollectiveMasses collective_masses(const JunctionSystem& sys) {
  const double z = sys.zeta();
  require(z < 1.0, "collective_masses: zeta = 1 is singular");
  return {1.0 / (8.0 * sys.e_c()), (1.0 + z) / (8.0 * sys.e_c() * (1.0 - z))};
}

double potential_2d(const JunctionSystem& sys, double theta_plus, double theta_minus) {
  const double ej = sys.e_j();
  return -2.0 * ej * std::cos(theta_plus / kSqrt2) * std::cos(theta_minus / kSqrt2) -
         ej / kSqrt2 * (sys.j1() + sys.j2()) * theta_plus -
         ej / kSqrt2 * (sys.j1() - sys.j2()) * theta_minus;
}

double potential_lab(const JunctionSystem& sys, double theta1, double theta2) {
  return -sys.e_j() *
         (std::cos(theta1) + std::cos(theta2) + sys.j1() * theta1 + sys.j2() * theta2);
}

double potential_washboard_1d(double e_j, double j, double theta) {
  return -e_j * (std::cos(theta) + j * theta);
}

std::pair<double, double> to_collective(double x1, double x2) {
  return {(x1 + x2) / kSqrt2, (x1 - x2) / kSqrt2};
}

std::pair<double, double> from_collective(double plus, double minus) {
  return to_collective(plus, minus);
}

Covariance2 rotate_covariance(const Covariance2& c) {
  // R = [[1, 1], [1, -1]] / sqrt2
  return {0.5 * (c.var_first + c.var_second) + c.cov,
          0.5 * (c.var_first + c.var_second) - c.cov,
          0.5 * (c.var_first - c.var_second)};
}

HarmonicReference harmonic_reference(const JunctionSystem& sys) {
  const auto m = collective_masses(sys);
  const double ej = sys.e_j();
  const double z = sys.zeta();
  HarmonicReference r{};
  r.omega0 = std::sqrt(ej / m.m_plus);
  r.s_harmonic = std::pow((1.0 + z) / (1.0 - z), 0.25);
  r.cross_theta_norm = 0.5 * (1.0 - std::sqrt((1.0 - z) / (1.0 + z)));
  r.var_theta_plus = 1.0 / (2.0 * std::sqrt(ej * m.m_plus));
  r.var_theta_minus = 1.0 / (2.0 * std::sqrt(ej * m.m_minus));
  r.var_p_plus = 0.5 * std::sqrt(ej * m.m_plus);
  r.var_p_minus = 0.5 * std::sqrt(ej * m.m_minus);
  return r;
}

double charging_energy_joule(const PhysicalUnits& units) {
  require(units.junction_capacitance > 0.0, "physical units: junction capacitance must be positive");
  return kElementaryCharge * kElementaryCharge / units.junction_capacitance;
}

JunctionSystem si_conversion(const PhysicalUnits& u) {
  require(u.flux_quantum > 0.0, "physical units: flux quantum must be positive");
  require(u.junction_capacitance > 0.0, "physical units: junction capacitance must be positive");
  require(u.critical_current > 0.0, "physical units: critical current must be positive");
  require(u.coupling_capacitance >= 0.0, "physical units: coupling capacitance must be non-negative");
  const double e_c = charging_energy_joule(u);
  const double e_j = kHbar * u.critical_current / (2.0 * kElementaryCharge);
  const double zeta = u.coupling_capacitance / (u.coupling_capacitance + u.junction_capacitance);
  return JunctionSystem(1.0, e_j / e_c, zeta, u.bias_current1 / u.critical_current,
                        u.bias_current2 / u.critical_current);
}

}  // namespace jjepr
