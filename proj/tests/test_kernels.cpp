#include <cmath>
#include <random>

#include "doctest.h"
#include "jjepr/hamiltonian.hpp"
#include "jjepr/kernels.hpp"
#include "jjepr/model.hpp"

using namespace jjepr;
using doctest::Approx;

namespace {

Eigen::VectorXcd random_state(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {g(rng), g(rng)};
  return v;
}

struct Workers {
  int saved = kernels::worker_count();
  explicit Workers(int n) { kernels::set_worker_count(n); }
  ~Workers() { kernels::set_worker_count(saved); }
};

}  // namespace

TEST_CASE("parallel spmv is bitwise identical to serial") {
  Workers w(4);
  const JunctionSystem sys(1.0, 100.0, 0.8, 0.1, 0.0);
  const Grid2D g{Grid1D(-3.0, 3.0, 40), Grid1D(-2.0, 2.0, 36), Frame::lab};
  const auto h = build_h_2d_lab(g, sys);
  const Eigen::VectorXcd x = random_state(h.dimension(), 1);
  Eigen::VectorXcd ys, yp;
  kernels::serial::spmv(h.matrix, x, ys);
  kernels::parallel::spmv(h.matrix, x, yp);
  CHECK(ys == yp);

  const Eigen::VectorXd xr = x.real();
  Eigen::VectorXd rs, rp;
  kernels::serial::spmv(h.matrix, xr, rs);
  kernels::parallel::spmv(h.matrix, xr, rp);
  CHECK(rs == rp);
  CHECK((rs - h.matrix * xr).cwiseAbs().maxCoeff() <= 1e-12 * rs.cwiseAbs().maxCoeff());
}

TEST_CASE("parallel density and Wigner kernels are bitwise identical to serial") {
  Workers w(3);
  const Eigen::VectorXcd psi = random_state(90, 2);
  kernels::ShiftKernel k;
  k.radius = 4;
  k.weights = {0.05, 0.1, 0.1, 0.15, 0.2, 0.15, 0.1, 0.1, 0.05};
  const auto rs = kernels::serial::noisy_density(psi, k, 0.7, 0.05);
  const auto rp = kernels::parallel::noisy_density(psi, k, 0.7, 0.05);
  CHECK(rs == rp);

  Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(33, -8.0, 8.0);
  const auto ws = kernels::serial::wigner(rs, 0.05, p);
  const auto wp = kernels::parallel::wigner(rs, 0.05, p);
  CHECK(ws == wp);
}

TEST_CASE("noiseless density is the outer product") {
  const Eigen::VectorXcd psi = random_state(20, 3);
  const auto rho = kernels::serial::noisy_density(psi, {}, 0.0, 0.1);
  CHECK((rho - psi * psi.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("momentum noise damps coherences by a Gaussian in the separation") {
  const Eigen::VectorXcd psi = random_state(16, 4);
  const double h = 0.2, var_p = 1.5;
  const auto rho = kernels::serial::noisy_density(psi, {}, var_p, h);
  for (Eigen::Index i = 0; i < 16; ++i)
    for (Eigen::Index j = 0; j < 16; ++j) {
      const double d = static_cast<double>(i - j) * h;
      CHECK(std::abs(rho(i, j) - std::exp(-0.5 * var_p * d * d) * psi[i] * std::conj(psi[j])) < 1e-14);
    }
}

TEST_CASE("Wigner function of a Gaussian matches the closed form") {
  // psi = (2 pi s^2)^(-1/4) exp(-x^2 / 4 s^2 + i p0 x)
  // W = (1/pi) exp(-x^2 / 2 s^2 - 2 s^2 (p - p0)^2)
  const double s = 0.5, p0 = 0.7, h = 0.02;
  const Grid1D g(-6.0, 6.0, 601);
  Eigen::VectorXcd psi(601);
  for (Eigen::Index i = 0; i < 601; ++i) {
    const double x = g.point(static_cast<std::size_t>(i));
    psi[i] = std::pow(2.0 * kPi * s * s, -0.25) * std::exp(cplx(-x * x / (4.0 * s * s), p0 * x));
  }
  CHECK(g.step() == Approx(h));
  const Eigen::MatrixXcd rho = psi * psi.adjoint();
  const Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(21, -3.0, 4.0);
  const auto w = kernels::parallel::wigner(rho, h, p);
  // interior points only: near the edges the grid truncates the coherences
  double worst = 0.0;
  for (Eigen::Index i = 200; i <= 400; i += 5)
    for (Eigen::Index m = 0; m < p.size(); ++m) {
      const double x = g.point(static_cast<std::size_t>(i));
      const double exact = std::exp(-x * x / (2.0 * s * s) - 2.0 * s * s * (p[m] - p0) * (p[m] - p0)) / kPi;
      worst = std::max(worst, std::abs(w(i, m) - exact));
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("worker count can be configured") {
  Workers w(2);
  CHECK(kernels::worker_count() == 2);
}
