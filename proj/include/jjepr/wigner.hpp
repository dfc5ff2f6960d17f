#pragma once

// Wigner functions of one-junction states on a (theta, p) grid.

#include "jjepr/teleport.hpp"

namespace jjepr {

struct WignerGrid {
  Grid1D theta_axis;
  Grid1D p_axis;
  Eigen::MatrixXd values;  // rows theta, columns p

  /// Trapezoidal weights along p.
  Eigen::VectorXd p_weights() const;
  double integral() const;
  /// int W dp for each theta
  Eigen::VectorXd theta_marginal() const;
};

/// Symmetric axis about <p> spanning `sigmas` momentum standard deviations,
/// clipped to the alias-free range |p| < pi / (2 step).
Grid1D default_p_axis(const DensityMatrix1D& rho, std::size_t points = 257, double sigmas = 10.0);

/// W(theta, p) = (1/pi) int rho(theta + y, theta - y) exp(-2 i p y) dy with
/// zero padding outside the box. Throws NumericalError when the normalization
/// or the theta marginal misses by more than 1e-6 (p axis too short).
WignerGrid wigner_of_density(const DensityMatrix1D& rho, const Grid1D& p_axis);
WignerGrid wigner_of_density(const DensityMatrix1D& rho);
WignerGrid wigner_of_state(const WaveFunction1D& psi, const Grid1D& p_axis);

/// 2 pi int W_a W_b, equal to Tr(rho_a rho_b).
double wigner_overlap_fidelity(const WignerGrid& a, const WignerGrid& b);

/// Convolution with a Gaussian of variances (var_theta, var_p): discrete
/// normalized weights along theta, trapezoidal quadrature along p.
WignerGrid gaussian_convolve(const WignerGrid& w, double var_theta, double var_p);

}  // namespace jjepr
