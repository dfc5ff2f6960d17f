#include <cmath>

#include "doctest.h"
#include "jjepr/error.hpp"
#include "jjepr/wigner.hpp"

using namespace jjepr;
using doctest::Approx;

namespace {

const Grid1D kAxis(-10.0, 10.0, 401);

// oscillator eigenstates with m = omega = 1
WaveFunction1D oscillator(int n) {
  WaveFunction1D psi{kAxis, Eigen::VectorXcd(static_cast<Eigen::Index>(kAxis.size()))};
  for (std::size_t i = 0; i < kAxis.size(); ++i) {
    const double x = kAxis.point(i);
    const double hermite = n == 0 ? 1.0 : n == 1 ? 2.0 * x : 4.0 * x * x - 2.0;
    psi.amplitudes[static_cast<Eigen::Index>(i)] = hermite * std::exp(-0.5 * x * x);
  }
  return psi.normalized();
}

const Grid1D kP(-8.0, 8.0, 257);

double at_origin(const WignerGrid& w) {
  return w.values(static_cast<Eigen::Index>(kAxis.size() / 2), static_cast<Eigen::Index>(kP.size() / 2));
}

}  // namespace

TEST_CASE("oscillator Wigner functions at the origin") {
  CHECK(at_origin(wigner_of_state(oscillator(0), kP)) * kPi == Approx(1.0).epsilon(0.01));
  CHECK(at_origin(wigner_of_state(oscillator(1), kP)) * kPi == Approx(-1.0).epsilon(0.01));
  CHECK(at_origin(wigner_of_state(oscillator(2), kP)) * kPi == Approx(1.0).epsilon(0.01));
}

TEST_CASE("marginals, normalization and bounds") {
  const auto in = build_input_state(three_term_coefficients(), input_spectrum(1.0, 100.0));
  const auto rho = DensityMatrix1D::pure(in.psi);
  const auto w = wigner_of_density(rho);
  CHECK(w.integral() == Approx(1.0).epsilon(1e-6));
  CHECK((w.theta_marginal() - in.psi.amplitudes.cwiseAbs2()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(w.values.cwiseAbs().maxCoeff() <= (1.0 + 1e-6) / kPi);
  CHECK(w.values.minCoeff() < 0.0);

  // p marginal of the ground state is the Gaussian of variance 1/2
  const auto g = wigner_of_state(oscillator(0), kP);
  const Eigen::VectorXd pm = g.values.colwise().sum() * kAxis.step();
  for (Eigen::Index m = 0; m < pm.size(); m += 16) {
    const double p = kP.point(static_cast<std::size_t>(m));
    CHECK(pm[m] == Approx(std::exp(-p * p) / std::sqrt(kPi)).epsilon(1e-3).scale(1e-6));
  }
}

TEST_CASE("real states have a parity-symmetric Wigner function in p") {
  const auto w = wigner_of_state(oscillator(1), kP);
  const Eigen::MatrixXd flipped = w.values.rowwise().reverse();
  CHECK((w.values - flipped).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("overlap identity") {
  const auto a = wigner_of_state(oscillator(0), kP);
  const auto b = wigner_of_state(oscillator(1), kP);
  CHECK(wigner_overlap_fidelity(a, a) == Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(wigner_overlap_fidelity(a, b)) < 1e-4);
  const auto other = wigner_of_state(oscillator(0), Grid1D(-7.0, 7.0, 257));
  CHECK_THROWS_AS(wigner_overlap_fidelity(a, other), ValidationError);
}

TEST_CASE("Gaussian channel equals phase-space convolution") {
  const auto in = build_input_state(two_term_coefficients(), input_spectrum(1.0, 100.0));
  const auto out = apply_channel(in, reference_budget());
  const auto axis = default_p_axis(out);
  const auto w_in = wigner_of_density(DensityMatrix1D::pure(in.psi), axis);
  const auto w_out = wigner_of_density(out, axis);
  const auto conv = gaussian_convolve(w_in, kReferenceVarTheta, kReferenceVarP);
  CHECK((conv.values - w_out.values).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(wigner_overlap_fidelity(w_in, w_out) == Approx(fidelity(in, out)).epsilon(1e-4));
  CHECK(w_in.values.minCoeff() <= -0.05 / kPi);
  CHECK_THROWS_AS(gaussian_convolve(w_in, 0.0, 1e-6), ValidationError);
}

TEST_CASE("p axis checks") {
  const auto rho = DensityMatrix1D::pure(oscillator(0));
  CHECK_THROWS_AS(wigner_of_density(rho, Grid1D(-40.0, 40.0, 257)), ValidationError);
  CHECK_THROWS_AS(wigner_of_density(rho, Grid1D(-0.5, 0.5, 257)), NumericalError);
  CHECK_THROWS_AS(default_p_axis(rho, 256), ValidationError);
  const auto axis = default_p_axis(rho);
  CHECK(axis.max() == Approx(10.0 * std::sqrt(0.5)).epsilon(1e-3));
  CHECK(axis.min() == Approx(-axis.max()));
}
