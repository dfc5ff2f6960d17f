#pragma once

// Continuous-variable teleportation of a single-junction state through a
// two-junction EPR resource: noise budget, Gaussian channel, single-shot
// measurement and correction, fidelity.

#include <cstdint>
#include <string>
#include <vector>

#include "jjepr/epr.hpp"

namespace jjepr {

/// Additive Gaussian noise of the joint variables theta2 - theta3 and p2 + p3.
struct NoiseBudget {
  double var_theta_epr = 0.0;   // <(theta1 - theta2)^2> of the resource
  double var_theta_meas = 0.0;
  double var_p_epr = 0.0;       // <(p1 + p2)^2> of the resource
  double var_p_meas = 0.0;

  double var_theta_total() const { return var_theta_epr + var_theta_meas; }
  double var_p_total() const { return var_p_epr + var_p_meas; }
  void validate() const;

  /// Totals without a split; stored as measurement noise.
  static NoiseBudget totals_only(double var_theta_total, double var_p_total);
};

/// Operating-point totals 0.015 rad^2 and 3.19.
inline constexpr double kReferenceVarTheta = 0.015;
inline constexpr double kReferenceVarP = 3.19;
NoiseBudget reference_budget();

/// var_theta_epr = 2 var_theta_minus, var_p_epr = 2 var_p_plus.
NoiseBudget noise_budget_from_epr(const CovarianceReport& report, double meas_var_theta, double meas_var_p);

/// Resource noise from `report`, no theta measurement noise, and p measurement
/// noise topping the p total up to kReferenceVarP (zero if already above).
NoiseBudget matched_budget(const CovarianceReport& report);

/// Kernel rho(x, x') on a grid; as an operator rho_ij * step.
struct DensityMatrix1D {
  Grid1D grid;
  Eigen::MatrixXcd matrix;
  double clipped_weight = 0.0;  // trace lost at the box edges before renormalization

  static DensityMatrix1D pure(const WaveFunction1D& psi);
  double trace() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
  /// Hermitian within 1e-10, trace 1 within 1e-8, eigenvalues above -1e-8.
  void validate() const;
};

struct InputState {
  std::vector<cplx> coefficients;  // normalized, index = washboard level
  SpectrumResult basis;
  WaveFunction1D psi;
};

/// Washboard levels of the input junction.
SpectrumResult input_spectrum(double e_c, double e_j, double j = 0.0, std::size_t points = 401,
                              std::size_t count = 8);

/// (|1> - i|3>)/sqrt2 and (|0> - i|2> + i|4>)/sqrt3.
std::vector<cplx> two_term_coefficients();
std::vector<cplx> three_term_coefficients();

/// Normalizes `coeffs` and builds sum c_j phi_j; every level with a nonzero
/// coefficient must be computed and bound.
InputState build_input_state(const std::vector<cplx>& coeffs, const SpectrumResult& spectrum);

/// Discrete Gaussian of variance `var` on multiples of `step`, weights summing
/// to one. Throws when step exceeds the standard deviation.
kernels::ShiftKernel gaussian_shift_kernel(double var, double step);

/// rho(x, x') = sum_s w_s psi(x - s) psi*(x' - s) exp(-var_p (x - x')^2 / 2),
/// renormalized to unit trace.
DensityMatrix1D apply_channel(const WaveFunction1D& psi, const NoiseBudget& budget);
DensityMatrix1D apply_channel(const InputState& input, const NoiseBudget& budget);

/// <psi|rho|psi>
double fidelity(const WaveFunction1D& psi, const DensityMatrix1D& rho);
double fidelity(const InputState& input, const DensityMatrix1D& rho);

/// (1/2) sum |eig(a - b)|
double trace_distance(const DensityMatrix1D& a, const DensityMatrix1D& b);

// ---- resources ----------------------------------------------------------

/// Lab-frame ground state of the quadratic expansion, both axes equal to `axis`.
WaveFunction2D harmonic_epr_resource(const JunctionSystem& sys, const Grid1D& axis);
/// theta1 = theta2 with a flat envelope (test limit of infinite squeezing).
WaveFunction2D ideal_epr_resource(const Grid1D& axis);
/// Moves a collective-frame state onto the lab grid axis x axis.
WaveFunction2D lab_resource(const WaveFunction2D& state, const Grid1D& axis);

// ---- single shots ---------------------------------------------------------

enum class ShiftMode {
  bounded,  // zero outside the box
  cyclic,   // indices wrap; measurement and shifts act on Z_N
};

/// psi(x - k h) exp(i p x)
WaveFunction1D displace(const WaveFunction1D& psi, long shift_steps, double p, ShiftMode mode = ShiftMode::bounded);
/// The correction applied after outcome (k h, p): psi(x + k h) exp(i p x).
WaveFunction1D correct(const WaveFunction1D& psi, long shift_steps, double p, ShiftMode mode = ShiftMode::bounded);

struct ShotResult {
  double measured_theta;  // theta2 - theta3
  double measured_p;      // p2 + p3
  long shift_steps;
  WaveFunction1D output;
  double lost_norm;       // weight clipped by the correcting translation
};

struct EnsembleResult {
  DensityMatrix1D rho;
  std::vector<double> measured_theta, measured_p;
  double max_lost_norm = 0.0;
  std::uint64_t seed = 0;
  std::size_t shots = 0;
};

/// Samples (theta2 - theta3, p2 + p3) for the input on junction 3 and the
/// resource on junctions 1 and 2, collapses junction 1 and corrects it.
/// The resource grid must be the input grid on both lab axes.
class TeleportSampler {
public:
  TeleportSampler(const InputState& input, const WaveFunction2D& resource, ShiftMode mode = ShiftMode::bounded);

  /// Shot number i of an ensemble seeded with `seed` uses seed + i.
  ShotResult shot(std::uint64_t seed) const;
  EnsembleResult ensemble(std::size_t shots, std::uint64_t seed) const;

  /// Probability of the translation outcome k (sums to one over outcomes).
  double shift_probability(long k) const;
  std::size_t momentum_bins() const { return m_; }

private:
  struct Draw {
    long k;
    std::size_t m;
  };
  Draw draw(std::uint64_t seed, const std::vector<double>* cached_cdf) const;
  std::vector<double> momentum_cdf(long k) const;
  WaveFunction1D collapse(long k, std::size_t m, double& lost) const;
  double momentum_value(std::size_t m) const;

  Grid1D grid_;
  Eigen::VectorXcd psi_;
  Eigen::MatrixXcd resource_;  // (theta1, theta2)
  Eigen::MatrixXcd reduced_;   // theta2 reduced density, sum_i E(i,l) E*(i,l')
  ShiftMode mode_;
  std::size_t n_, m_;
  long k_min_, k_max_;
  std::vector<double> shift_cdf_;
};

/// One shot with a fresh sampler.
ShotResult single_shot(const InputState& input, const WaveFunction2D& resource, std::uint64_t seed,
                       ShiftMode mode = ShiftMode::bounded);

// ---- calibration ------------------------------------------------------------

struct CalibrationRow {
  double ej_over_ec = 0.0;
  std::size_t bound_levels = 0;
  double fidelity_two = 0.0;    // NaN when the state cannot be built
  double fidelity_three = 0.0;
  std::string error_two, error_three;
};

/// Fidelity of both preset inputs under `budget` for each E_J/E_C (E_C = 1).
std::vector<CalibrationRow> calibrate(const std::vector<double>& ej_over_ec, const NoiseBudget& budget,
                                      double j = 0.0, std::size_t points = 401);

}  // namespace jjepr
