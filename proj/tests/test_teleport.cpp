#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "jjepr/error.hpp"
#include "jjepr/teleport.hpp"

using namespace jjepr;
using doctest::Approx;

namespace {

const SpectrumResult& spectrum100() {
  static const SpectrumResult s = input_spectrum(1.0, 100.0);
  return s;
}

InputState two_term() { return build_input_state(two_term_coefficients(), spectrum100()); }

NoiseBudget totals(double vt, double vp) { return NoiseBudget::totals_only(vt, vp); }

double max_abs_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("noise budget from a near-ideal harmonic resource") {
  const JunctionSystem sys(1.0, 100.0, 0.9995);
  const auto in = two_term();
  const auto report = covariance(harmonic_epr_resource(sys, in.psi.grid));
  const auto b = noise_budget_from_epr(report, 0.001, 0.5);
  CHECK(b.var_theta_epr == Approx(0.00447).epsilon(0.01));
  CHECK(b.var_theta_total() == Approx(b.var_theta_epr + 0.001));
  CHECK(b.var_p_total() == Approx(b.var_p_epr + 0.5));
  // the resource p noise alone already exceeds the reference total
  const auto m = matched_budget(report);
  CHECK(m.var_theta_meas == 0.0);
  CHECK(m.var_p_meas == 0.0);
  CHECK(m.var_p_epr > kReferenceVarP);

  const auto r = reference_budget();
  CHECK(r.var_theta_total() == kReferenceVarTheta);
  CHECK(r.var_p_total() == kReferenceVarP);
  CHECK_THROWS_AS(totals(-1e-3, 1.0).validate(), ValidationError);
  CHECK_THROWS_AS(totals(std::nan(""), 1.0).validate(), ValidationError);
}

TEST_CASE("input presets") {
  const auto a = two_term_coefficients();
  const auto b = three_term_coefficients();
  REQUIRE(a.size() == 4);
  REQUIRE(b.size() == 5);
  CHECK(std::abs(a[1] - cplx(1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
  CHECK(std::abs(a[3] - cplx(0.0, -1.0 / std::sqrt(2.0))) < 1e-15);
  CHECK(std::abs(b[4] - cplx(0.0, 1.0 / std::sqrt(3.0))) < 1e-15);

  const auto in = two_term();
  CHECK(in.psi.norm() == Approx(1.0).epsilon(1e-10));
  // coefficients are normalized on the way in
  const auto scaled = build_input_state({0.0, 3.0}, spectrum100());
  CHECK(std::abs(scaled.coefficients[1]) == Approx(1.0));

  // level 4 is not bound at E_J/E_C = 25
  const auto shallow = input_spectrum(1.0, 25.0);
  CHECK_THROWS_AS(build_input_state(three_term_coefficients(), shallow), ValidationError);
  CHECK_THROWS_AS(build_input_state({0.0, 0.0}, spectrum100()), ValidationError);
  CHECK_THROWS_AS(build_input_state(std::vector<cplx>(20, 1.0), spectrum100()), ValidationError);
}

TEST_CASE("zero noise is the identity channel") {
  const auto in = two_term();
  const auto rho = apply_channel(in, NoiseBudget{});
  CHECK(fidelity(in, rho) == Approx(1.0).epsilon(1e-8));
  CHECK(rho.clipped_weight < 1e-12);
  // orthogonal level
  const auto other = build_input_state({1.0}, spectrum100());
  CHECK(std::abs(fidelity(other.psi, rho)) < 1e-8);
}

TEST_CASE("momentum noise leaves the theta distribution unchanged") {
  const auto in = two_term();
  const auto rho = apply_channel(in, totals(0.0, 2.0));
  const Eigen::VectorXd diag = rho.matrix.diagonal().real();
  const Eigen::VectorXd prob = in.psi.amplitudes.cwiseAbs2();
  CHECK((diag - prob).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fidelity(in, rho) < 1.0);
}

TEST_CASE("channel output is a physical state") {
  const auto in = build_input_state(three_term_coefficients(), spectrum100());
  for (const auto& b : {reference_budget(), totals(0.05, 0.0), totals(0.0, 10.0), totals(0.1, 8.0)}) {
    const auto rho = apply_channel(in, b);
    CHECK_NOTHROW(rho.validate());
    CHECK(rho.trace() == Approx(1.0).epsilon(1e-8));
    CHECK(rho.hermiticity_error() <= 1e-10);
    CHECK(rho.min_eigenvalue() >= -1e-8);
  }
}

TEST_CASE("fidelity is monotone in both noise components") {
  const auto in = two_term();
  const std::vector<double> vt{0.0, 0.01, 0.03}, vp{0.0, 1.0, 3.0};
  double f[3][3];
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) f[a][b] = fidelity(in, apply_channel(in, totals(vt[a], vp[b])));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (a > 0) CHECK(f[a][b] <= f[a - 1][b] + 1e-12);
      if (b > 0) CHECK(f[a][b] <= f[a][b - 1] + 1e-12);
    }
  // saturating noise
  CHECK(fidelity(in, apply_channel(in, totals(0.5, 200.0))) < 0.1);
}

TEST_CASE("theta noise below the grid step is rejected") {
  CHECK_THROWS_AS(gaussian_shift_kernel(1e-6, 0.01), ValidationError);
  const auto k = gaussian_shift_kernel(0.01, 0.01);
  double sum = 0.0, var = 0.0;
  for (int s = -k.radius; s <= k.radius; ++s) {
    const double w = k.weights[static_cast<std::size_t>(s + k.radius)];
    sum += w;
    var += w * s * s * 1e-4;
  }
  CHECK(sum == Approx(1.0).epsilon(1e-14));
  CHECK(var == Approx(0.01).epsilon(1e-6));
  CHECK(gaussian_shift_kernel(0.0, 0.01).radius == 0);
}

TEST_CASE("displacement and correction") {
  const auto in = two_term();
  const auto d = displace(in.psi, 5, 1.5);
  const auto back = correct(d, 5, -1.5);
  // undoing the pair leaves the Weyl phase exp(i p k h); the last five points were clipped
  const cplx weyl = std::polar(1.0, 1.5 * 5.0 * in.psi.grid.step());
  const auto n = static_cast<Eigen::Index>(in.psi.grid.size());
  CHECK(max_abs_diff(back.amplitudes.head(n - 5), weyl * in.psi.amplitudes.head(n - 5)) < 1e-12);
  CHECK(back.amplitudes.tail(5).isZero(0.0));
  const auto c = displace(in.psi, 7, 0.0, ShiftMode::cyclic);
  CHECK(max_abs_diff(correct(c, 7, 0.0, ShiftMode::cyclic).amplitudes, in.psi.amplitudes) == 0.0);
  CHECK(d.amplitudes[10] == in.psi.amplitudes[5] * std::polar(1.0, 1.5 * in.psi.grid.point(10)));
}

TEST_CASE("ideal resource teleports exactly") {
  const auto in = two_term();
  const TeleportSampler sampler(in, ideal_epr_resource(in.psi.grid), ShiftMode::cyclic);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto r = sampler.shot(seed);
    INFO("seed " << seed << " k " << r.shift_steps);
    CHECK(max_abs_diff(r.output.amplitudes, in.psi.amplitudes) < 1e-6);
    CHECK(r.lost_norm < 1e-12);
  }
}

TEST_CASE("sampling is reproducible and covariant") {
  const JunctionSystem sys(1.0, 100.0, 0.9995);
  const auto in = two_term();
  const auto res = harmonic_epr_resource(sys, in.psi.grid);
  const TeleportSampler sampler(in, res);
  const auto a = sampler.shot(17), b = sampler.shot(17);
  CHECK(a.shift_steps == b.shift_steps);
  CHECK(a.measured_p == b.measured_p);
  CHECK(max_abs_diff(a.output.amplitudes, b.output.amplitudes) == 0.0);
  CHECK(a.lost_norm < 1e-6);

  double total = 0.0;
  for (long k = -static_cast<long>(in.psi.grid.size()) + 1; k < static_cast<long>(in.psi.grid.size()); ++k)
    total += sampler.shift_probability(k);
  CHECK(total == Approx(1.0).epsilon(1e-10));

  // translating junction 3 by +4 steps moves theta2 - theta3 by -4
  InputState moved = in;
  moved.psi = displace(in.psi, 4, 0.0);
  const TeleportSampler shifted(moved, res);
  for (long k : {-20L, -3L, 0L, 6L, 15L})
    CHECK(std::abs(shifted.shift_probability(k - 4) - sampler.shift_probability(k)) < 1e-8);

  // distinct seeds give distinct outcomes
  std::set<long> ks;
  for (std::uint64_t s = 0; s < 32; ++s) ks.insert(sampler.shot(s).shift_steps);
  CHECK(ks.size() > 4);
}

TEST_CASE("Monte Carlo ensemble agrees with the Gaussian channel") {
  const JunctionSystem sys(1.0, 100.0, 0.9995);
  const auto in = two_term();
  const auto res = harmonic_epr_resource(sys, in.psi.grid);
  const auto ens = TeleportSampler(in, res).ensemble(4000, 42);
  CHECK(ens.shots == 4000);
  CHECK(ens.max_lost_norm < 1e-6);
  CHECK(ens.rho.trace() == Approx(1.0).epsilon(1e-10));
  const auto rho = apply_channel(in, noise_budget_from_epr(covariance(res), 0.0, 0.0));
  const double td = trace_distance(ens.rho, rho);
  INFO("trace distance " << td);
  CHECK(td < 0.02);
  CHECK_THROWS_AS(TeleportSampler(in, res).ensemble(0, 1), ValidationError);
}

TEST_CASE("sampler rejects mismatched resources") {
  const auto in = two_term();
  const Grid1D other(in.psi.grid.min(), in.psi.grid.max(), in.psi.grid.size() - 2);
  CHECK_THROWS_AS(TeleportSampler(in, ideal_epr_resource(other)), ValidationError);
  auto res = ideal_epr_resource(in.psi.grid);
  res.amplitudes *= 2.0;
  CHECK_THROWS_AS(TeleportSampler(in, res), ValidationError);
}

TEST_CASE("calibration rows") {
  const auto rows = calibrate({25.0, 100.0}, reference_budget());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].bound_levels < 5);
  CHECK(std::isnan(rows[0].fidelity_three));
  CHECK_FALSE(rows[0].error_three.empty());
  CHECK(rows[1].fidelity_two > rows[0].fidelity_two);
  CHECK(rows[1].fidelity_two == Approx(fidelity(two_term(), apply_channel(two_term(), reference_budget()))));
  CHECK_THROWS_AS(calibrate({-1.0}, reference_budget()), ValidationError);
}
