#include "jjepr/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jjepr/error.hpp"

namespace jjepr {

namespace {

void require_same_axes(const WignerGrid& a, const WignerGrid& b, const char* who) {
  if (!(a.theta_axis == b.theta_axis && a.p_axis == b.p_axis)) {
    throw ValidationError(std::string(who) + ": Wigner grids have different axes");
  }
}

}  // namespace

Eigen::VectorXd WignerGrid::p_weights() const {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p_axis.size()), p_axis.step());
  w[0] *= 0.5;
  w[w.size() - 1] *= 0.5;
  return w;
}

double WignerGrid::integral() const { return theta_marginal().sum() * theta_axis.step(); }

Eigen::VectorXd WignerGrid::theta_marginal() const { return values * p_weights(); }

Grid1D default_p_axis(const DensityMatrix1D& rho, std::size_t points, double sigmas) {
  require(points >= 3 && points % 2 == 1, "p axis: need an odd number of points");
  require(sigmas > 0.0, "p axis: sigmas must be positive");
  const double h = rho.grid.step();
  const Eigen::MatrixXcd op = rho.matrix * h;
  const SparseMatrix d = derivative_1d(rho.grid), l = laplacian_1d(rho.grid);
  // Tr(rho A) = sum_ij rho_ij A_ji
  const double mean = (op.cwiseProduct(Eigen::MatrixXd(d).transpose())).sum().imag();
  const double second = (op.cwiseProduct(Eigen::MatrixXd(l).transpose())).sum().real();
  const double sigma = std::sqrt(std::max(second - mean * mean, 0.0));
  const double nyquist = 0.5 * kPi / h;
  const double lo = std::max(mean - sigmas * sigma, -0.999 * nyquist);
  const double hi = std::min(mean + sigmas * sigma, 0.999 * nyquist);
  const double half = std::min(mean - lo, hi - mean);
  return Grid1D(mean - half, mean + half, points);
}

WignerGrid wigner_of_density(const DensityMatrix1D& rho, const Grid1D& p_axis) {
  const double h = rho.grid.step();
  const double span = p_axis.max() - p_axis.min();
  if (span >= kPi / h) {
    std::ostringstream msg;
    msg << "wigner: p axis spans " << span << ", beyond the alias-free period " << kPi / h;
    throw ValidationError(msg.str());
  }
  WignerGrid w{rho.grid, p_axis, kernels::parallel::wigner(rho.matrix, h, p_axis.points())};
  const double norm_error = std::abs(w.integral() - rho.trace());
  const double marginal_error = (w.theta_marginal() - rho.matrix.diagonal().real()).cwiseAbs().maxCoeff();
  if (norm_error > 1e-6 || marginal_error > 1e-6) {
    std::ostringstream msg;
    msg << "wigner: p axis [" << p_axis.min() << ", " << p_axis.max() << "] is too short (normalization error "
        << norm_error << ", marginal error " << marginal_error << ")";
    throw NumericalError(msg.str());
  }
  return w;
}

WignerGrid wigner_of_density(const DensityMatrix1D& rho) { return wigner_of_density(rho, default_p_axis(rho)); }

WignerGrid wigner_of_state(const WaveFunction1D& psi, const Grid1D& p_axis) {
  return wigner_of_density(DensityMatrix1D::pure(psi), p_axis);
}

double wigner_overlap_fidelity(const WignerGrid& a, const WignerGrid& b) {
  require_same_axes(a, b, "wigner_overlap_fidelity");
  return 2.0 * kPi * (a.values.cwiseProduct(b.values) * a.p_weights()).sum() * a.theta_axis.step();
}

WignerGrid gaussian_convolve(const WignerGrid& w, double var_theta, double var_p) {
  require(std::isfinite(var_p) && var_p >= 0.0, "gaussian_convolve: var_p must be non-negative");
  const auto shifts = gaussian_shift_kernel(var_theta, w.theta_axis.step());
  const auto nt = static_cast<Eigen::Index>(w.theta_axis.size());
  const auto np = static_cast<Eigen::Index>(w.p_axis.size());

  Eigen::MatrixXd along_theta = Eigen::MatrixXd::Zero(nt, np);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (int s = -shifts.radius; s <= shifts.radius; ++s) {
      const Eigen::Index src = i - s;
      if (src < 0 || src >= nt) continue;
      along_theta.row(i) += shifts.weights[static_cast<std::size_t>(s + shifts.radius)] * w.values.row(src);
    }
  }
  if (var_p == 0.0) return {w.theta_axis, w.p_axis, along_theta};

  const double dp = w.p_axis.step();
  if (dp > std::sqrt(var_p)) {
    std::ostringstream msg;
    msg << "gaussian_convolve: p step " << dp << " does not resolve the p noise (std " << std::sqrt(var_p) << ")";
    throw ValidationError(msg.str());
  }
  const Eigen::VectorXd pw = w.p_weights();
  Eigen::MatrixXd kernel(np, np);  // kernel(m', m) = G(p_m - p_m') dp_m'
  const double c = 1.0 / std::sqrt(2.0 * kPi * var_p);
  for (Eigen::Index a = 0; a < np; ++a)
    for (Eigen::Index b = 0; b < np; ++b) {
      const double d = static_cast<double>(b - a) * dp;
      kernel(a, b) = c * std::exp(-0.5 * d * d / var_p) * pw[a];
    }
  return {w.theta_axis, w.p_axis, along_theta * kernel};
}

}  // namespace jjepr
