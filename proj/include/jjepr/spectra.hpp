#pragma once

// Born-Oppenheimer machinery for the coupled pair: fast-mode energy surfaces
// eps_n(theta_minus), slow-mode spectra on those surfaces, and the closed-form
// pendulum/BO level formulas they are compared against.

#include <string>
#include <vector>

#include "jjepr/eigensolver.hpp"

namespace jjepr {

/// Default domain for a single washboard well: unbiased [-pi, pi]; biased
/// [-pi - a, pi - a] with a = asin(j), i.e. between the barrier tops that
/// flank the minimum at a.
Grid1D washboard_grid(double j, std::size_t points);

/// Spectrum of one junction, 4 E_C p^2 - E_J (cos theta + j theta).
SpectrumResult washboard_spectrum(double e_c, double e_j, double j, std::size_t count,
                                  std::size_t points = 401);

/// Fast-mode axis covering one period of cos(theta_plus / sqrt2) around the
/// fast minimum. Periodic for unbiased systems, Dirichlet otherwise.
struct FastAxis {
  Grid1D grid;
  Boundary boundary;
};
FastAxis fast_mode_axis(const JunctionSystem& sys, std::size_t points = 0);

/// Eigenvalues of the fast Hamiltonian p+^2/2m+ + V(theta+, theta-) at frozen theta-.
Eigen::VectorXd fast_mode_levels(const JunctionSystem& sys, double theta_minus, std::size_t count,
                                 const FastAxis& axis);

/// Levels of the unbiased collective pendulum p^2/2m+ - 2E_J cos(x/sqrt2) on a
/// periodic axis, Richardson-extrapolated from `points` and 2 `points`.
Eigen::VectorXd pendulum_levels(const JunctionSystem& sys, std::size_t count, std::size_t points = 600);

struct BOSurface {
  int n = 0;
  Eigen::VectorXd theta_minus;  // strictly increasing
  Eigen::VectorXd energy;

  /// Cubic Hermite interpolation with finite-difference slopes, clamped at the ends.
  double at(double theta) const;
};

/// eps_n(theta_minus) at the given samples. Slices are solved in parallel and
/// stored in sample order.
BOSurface fast_mode_surface(const JunctionSystem& sys, int n, const std::vector<double>& theta_minus,
                            std::size_t fast_points = 0);

/// Fit of eps(theta) ~ c + k theta^2 / 2 + d theta^4 to the samples with
/// |theta| <= window.
struct CurvatureFit {
  double offset;
  double k_eff;
  double quartic;
};
CurvatureFit fit_curvature(const BOSurface& surface, double window);

struct BOLevels {
  double omega0;
  double epsilon_n0;            // -2E_J + w0 (n + 1/2) - (n^2 + n + 1/2) / (16 m+)
  double epsilon_n0_collective; // same with 1/(32 m+), the quartic term of -2E_J cos(x/sqrt2)
  double Omega_n;
  double E_n_nu;                // Omega_n (nu + 1/2)
  std::vector<std::string> warnings;
};

BOLevels bo_levels_analytic(const JunctionSystem& sys, int n, int nu);

/// Slow-mode levels on the interpolated surface plus the theta- bias tilt,
/// Dirichlet on `slow_grid`.
SpectrumResult bo_slow_levels(const JunctionSystem& sys, const BOSurface& surface, const Grid1D& slow_grid,
                              std::size_t count);

struct BOProductState {
  WaveFunction2D psi;
  double energy;          // slow-mode eigenvalue nu on the eps_n surface
  BOSurface surface;      // eps_n sampled on the grid's theta_minus axis
  double boundary_ratio;  // of the product state
  bool bound;             // fast level below the fast barrier and slow level below the slow one
};

/// phi_n(theta+; theta-) Phi_nu(theta-) on a collective-frame grid. Each
/// theta- column gets its own fast solve; the slow problem uses the sampled
/// surface directly.
BOProductState bo_state(const JunctionSystem& sys, const Grid2D& grid, int n = 0, int nu = 0);
inline BOProductState bo_ground_state(const JunctionSystem& sys, const Grid2D& grid) {
  return bo_state(sys, grid, 0, 0);
}

}  // namespace jjepr
