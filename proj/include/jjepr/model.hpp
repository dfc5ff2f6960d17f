#pragma once

// Circuit parameters of two capacitively coupled current-biased Josephson
// junctions, the collective-mode transform, and the closed-form small
// oscillation formulas used as analytic oracles by the numerical modules.
//
// Units: hbar = 1, energies in a caller-chosen unit (E_C = 1 recommended),
// phases in radians, momenta conjugate to the phases (dimensionless).

#include <array>
#include <utility>

namespace jjepr {

inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kPi = 3.14159265358979323846;

/// Dimensionless parameters (E_C, E_J, J1, J2, zeta) of the coupled pair.
/// Construction validates every invariant; instances are immutable.
class JunctionSystem {
public:
  JunctionSystem(double e_c, double e_j, double zeta, double j1 = 0.0, double j2 = 0.0);

  double e_c() const { return e_c_; }
  double e_j() const { return e_j_; }
  double zeta() const { return zeta_; }
  double j1() const { return j1_; }
  double j2() const { return j2_; }
  bool unbiased() const { return j1_ == 0.0 && j2_ == 0.0; }

  JunctionSystem with_zeta(double zeta) const { return {e_c_, e_j_, zeta, j1_, j2_}; }
  JunctionSystem with_bias(double j1, double j2) const { return {e_c_, e_j_, zeta_, j1, j2}; }

private:
  double e_c_;
  double e_j_;
  double zeta_;
  double j1_;
  double j2_;
};

struct CollectiveMasses {
  double m_plus;   // fast (symmetric) mode
  double m_minus;  // slow (antisymmetric) mode
};

/// m_plus = 1/(8 E_C) for every zeta; m_minus = (1+zeta)/(8 E_C (1-zeta)).
CollectiveMasses collective_masses(const JunctionSystem& sys);

/// Potential of the collective-coordinate Hamiltonian, bias terms included.
double potential_2d(const JunctionSystem& sys, double theta_plus, double theta_minus);

/// Lab-frame potential -E_J (cos t1 + cos t2 + J1 t1 + J2 t2).
double potential_lab(const JunctionSystem& sys, double theta1, double theta2);

/// Tilted washboard -E_J (cos theta + j theta) of a single junction.
double potential_washboard_1d(double e_j, double j, double theta);

/// (x1 + x2)/sqrt2, (x1 - x2)/sqrt2. The matrix is symmetric and orthogonal,
/// so it is its own inverse and from_collective is the same map.
std::pair<double, double> to_collective(double x1, double x2);
std::pair<double, double> from_collective(double plus, double minus);

/// Symmetric 2x2 covariance [[a, c], [c, b]] stored as {a, b, c}.
struct Covariance2 {
  double var_first;
  double var_second;
  double cov;
};

/// Congruence transform R C R^T with the collective rotation R. Works in both
/// directions (lab -> collective and back).
Covariance2 rotate_covariance(const Covariance2& c);

struct HarmonicReference {
  double omega0;            // sqrt(E_J / m_plus)
  double s_harmonic;        // ((1+zeta)/(1-zeta))^(1/4)
  double cross_theta_norm;  // (1/2)[1 - sqrt((1-zeta)/(1+zeta))]
  double var_theta_plus;    // 1/(2 sqrt(E_J m_plus))
  double var_theta_minus;   // 1/(2 sqrt(E_J m_minus))
  double var_p_plus;        // sqrt(E_J m_plus)/2
  double var_p_minus;       // sqrt(E_J m_minus)/2
};

/// Ground-state moments of the quadratic expansion of the unbiased potential
/// about the origin; both collective modes have spring constant E_J.
HarmonicReference harmonic_reference(const JunctionSystem& sys);

/// SI description of the circuit. Only used for conversion into a
/// JunctionSystem; solver code never sees SI values.
struct PhysicalUnits {
  double flux_quantum = 2.067833848e-15;   // Wb, h/(2e)
  double junction_capacitance = 0.0;       // F
  double coupling_capacitance = 0.0;       // F, may be zero
  double critical_current = 0.0;           // A
  double bias_current1 = 0.0;              // A
  double bias_current2 = 0.0;              // A
};

/// Returns the system in units of E_C = e^2/C_J (so e_c() == 1).
JunctionSystem si_conversion(const PhysicalUnits& units);

/// E_C = e^2/C_J in joules.
double charging_energy_joule(const PhysicalUnits& units);

}  // namespace jjepr
