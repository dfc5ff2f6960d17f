#pragma once

// Second moments of two-mode states, the squeezing factor s and zeta sweeps.

#include <optional>
#include <string>
#include <vector>

#include "jjepr/spectra.hpp"

namespace jjepr {

struct CovarianceReport {
  // collective frame
  double mean_theta_plus = 0, mean_theta_minus = 0, mean_p_plus = 0, mean_p_minus = 0;
  double var_theta_plus = 0, var_theta_minus = 0, var_p_plus = 0, var_p_minus = 0;
  double cov_theta = 0;  // <d theta+ d theta->
  double cov_p = 0;      // <d p+ d p->
  // lab frame
  double var_theta1 = 0, var_theta2 = 0, cross_theta = 0;
  double var_p1 = 0, var_p2 = 0, cross_p = 0;
  double s = 0;  // 1 / (2 sqrt(var_theta_minus var_p_plus))
  std::optional<int> n, nu;
};

/// Moments of a normalized state on a collective- or lab-frame grid.
/// Momentum moments use the Hamiltonian's finite-difference stencils, so
/// <p^2> is the kinetic expectation value the solver minimized.
CovarianceReport covariance(const WaveFunction2D& psi);

/// sqrt(E_J / (2 E_C)) <d theta1 d theta2>
double normalized_cross_theta(const JunctionSystem& sys, double cross_theta);

/// Largest violation of var_theta * var_p >= 1/4 over both modes (0 if none).
double heisenberg_violation(const CovarianceReport& r);

enum class DomainMode {
  adaptive,  // box scales with the harmonic widths of each mode
  fixed,     // box fixed at the zeta = 0 widths; resolution grows with m_minus
};

struct GridPolicy {
  DomainMode mode = DomainMode::adaptive;
  double widths = 10.0;           // half-width in harmonic standard deviations
  std::size_t points = 128;       // per axis (adaptive mode)
  double points_per_sigma = 6.0;  // fixed mode
  std::size_t grid_cap = kDefaultGridCap;
};

/// Collective grid for the ground state of `sys`; nullopt when the fixed
/// domain would need more than grid_cap points.
std::optional<Grid2D> policy_grid(const JunctionSystem& sys, const GridPolicy& policy);

struct GroundState {
  WaveFunction2D psi;
  double energy;
  std::string method;  // "exact-dense", "exact-krylov", "bo" or "bo-fallback"
  double boundary_ratio;
};

GroundState ground_state(const JunctionSystem& sys, const GridPolicy& policy = {}, bool use_bo = false);

/// Moments of the BO state (n, nu) on the policy grid, labelled; rejects
/// states that are not bound.
CovarianceReport bo_state_report(const JunctionSystem& sys, int n, int nu, const GridPolicy& policy = {});

struct SweepRow {
  double zeta = 0;
  double log10_inv_one_minus_zeta = 0;
  std::optional<CovarianceReport> report;
  double s_harmonic = 0;
  double cross_theta_norm_harmonic = 0;
  double cross_theta_norm_numeric = 0;
  std::string method_flag;
  std::string error;  // non-empty when the row failed
};

/// One row per zeta in input order; a failing row records its error and the
/// sweep continues.
std::vector<SweepRow> zeta_sweep(const JunctionSystem& sys_template, const std::vector<double>& zetas,
                                 const GridPolicy& policy = {});

}  // namespace jjepr
