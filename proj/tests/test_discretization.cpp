#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "jjepr/eigensolver.hpp"
#include "jjepr/error.hpp"
#include "jjepr/hamiltonian.hpp"

using namespace jjepr;
using doctest::Approx;

namespace {

Eigen::VectorXd dense_levels(const SparseMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double max_abs(const SparseMatrix& m) {
  double worst = 0.0;
  for (int r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

}  // namespace

TEST_CASE("laplacian is symmetric positive semidefinite") {
  const Grid1D g(-3.0, 5.0, 40);
  const SparseMatrix l = laplacian_1d(g);
  const SparseMatrix diff = SparseMatrix(l - SparseMatrix(l.transpose()));
  CHECK(max_abs(diff) == 0.0);
  CHECK(dense_levels(l).minCoeff() > 0.0);
}

TEST_CASE("derivative is antisymmetric") {
  const Grid1D g(-1.0, 1.0, 33);
  const SparseMatrix d = derivative_1d(g);
  const SparseMatrix sum = SparseMatrix(d + SparseMatrix(d.transpose()));
  CHECK(max_abs(sum) == 0.0);
  // exact on cubics away from the walls
  Eigen::VectorXd x = g.points();
  Eigen::VectorXd f = x.array().cube();
  Eigen::VectorXd df = d * f;
  for (Eigen::Index i = 2; i < x.size() - 2; ++i) CHECK(df[i] == Approx(3.0 * x[i] * x[i]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("particle in a box converges at fourth order") {
  // walls one step outside the grid: L = (n + 1) h
  auto error_for = [](std::size_t n) {
    const Grid1D g(0.0, 1.0, n);
    const double length = (static_cast<double>(n) + 1.0) * g.step();
    const auto op = build_h_1d(g, 1.0, [](double) { return 0.0; });
    const Eigen::VectorXd e = dense_levels(op.matrix);
    const double exact = kPi * kPi / (2.0 * length * length);
    return std::abs(e[0] - exact) / exact;
  };
  const double e50 = error_for(50);
  const double e100 = error_for(100);
  CHECK(e50 < 1e-6);
  CHECK(e50 / e100 > 12.0);
  CHECK(e50 / e100 < 20.0);
}

TEST_CASE("harmonic oscillator levels") {
  const double mass = 0.125, k = 100.0;
  const double omega = std::sqrt(k / mass);
  const double sigma = std::sqrt(1.0 / (2.0 * std::sqrt(k * mass)));
  const Grid1D g(-12.0 * sigma, 12.0 * sigma, 301);
  const auto op = build_h_1d(g, mass, [k](double x) { return 0.5 * k * x * x; });
  const Eigen::VectorXd e = dense_levels(op.matrix);
  for (int n = 0; n < 6; ++n) CHECK(e[n] == Approx(omega * (n + 0.5)).epsilon(1e-4));
}

TEST_CASE("periodic free rotor") {
  const double mass = 0.125;
  const auto g = Grid1D::periodic(-kPi, 2.0 * kPi, 128);
  const auto op = build_h_1d(g, mass, [](double) { return 0.0; }, Boundary::periodic);
  const Eigen::VectorXd e = dense_levels(op.matrix);
  CHECK(std::abs(e[0]) < 1e-10);
  // doubly degenerate k = +-1, +-2
  CHECK(e[1] == Approx(1.0 / (2.0 * mass)).epsilon(1e-6));
  CHECK(e[2] == Approx(1.0 / (2.0 * mass)).epsilon(1e-6));
  CHECK(e[3] == Approx(4.0 / (2.0 * mass)).epsilon(1e-6));
  CHECK(e[4] == Approx(4.0 / (2.0 * mass)).epsilon(1e-6));
}

TEST_CASE("2D operators are symmetric") {
  const JunctionSystem sys(1.0, 100.0, 0.9, 0.1, -0.2);
  const Grid2D gc{Grid1D(-3.0, 3.0, 24), Grid1D(-2.0, 2.0, 20), Frame::collective};
  const auto hc = build_h_2d_collective(gc, collective_masses(sys), sys);
  CHECK(hc.asymmetry() <= 1e-12 * hc.norm_bound());
  const Grid2D gl{Grid1D(-3.0, 3.0, 24), Grid1D(-2.5, 2.5, 22), Frame::lab};
  const auto hl = build_h_2d_lab(gl, sys);
  CHECK(hl.asymmetry() <= 1e-12 * hl.norm_bound());
  CHECK(hl.dimension() == 24 * 22);
}

TEST_CASE("quadratic potential matches the 2D oscillator oracle") {
  const JunctionSystem sys(1.0, 100.0, 0.9);
  const auto ref = harmonic_reference(sys);
  const auto m = collective_masses(sys);
  const double sp = std::sqrt(ref.var_theta_plus), sm = std::sqrt(ref.var_theta_minus);
  const Grid2D g{Grid1D(-9.0 * sp, 9.0 * sp, 40), Grid1D(-9.0 * sm, 9.0 * sm, 40), Frame::collective};
  Build2DOptions opt;
  opt.potential = PotentialForm::quadratic;
  const auto h = build_h_2d_collective(g, m, sys, opt);
  const auto spec = eigensolve(h, 1);
  const double zero_point = 0.5 * std::sqrt(sys.e_j() / m.m_plus) + 0.5 * std::sqrt(sys.e_j() / m.m_minus);
  CHECK(spec.eigenvalues[0] + 2.0 * sys.e_j() == Approx(zero_point).epsilon(1e-3));

  const auto full = eigensolve(build_h_2d_collective(g, m, sys), 1);
  CHECK(full.eigenvalues[0] < spec.eigenvalues[0]);
}

TEST_CASE("uncoupled lab Hamiltonian separates into sums of 1D levels") {
  const JunctionSystem sys(1.0, 50.0, 0.0);
  const Grid1D axis(-2.5, 2.5, 30);
  const auto one = build_h_1d(axis, 1.0 / 8.0, [](double t) { return -50.0 * std::cos(t); });
  const Eigen::VectorXd e1 = dense_levels(one.matrix);
  std::vector<double> sums;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) sums.push_back(e1[a] + e1[b]);
  std::sort(sums.begin(), sums.end());

  const auto two = build_h_2d_lab(Grid2D{axis, axis, Frame::lab}, sys);
  const Eigen::VectorXd e2 = dense_levels(two.matrix);
  for (int i = 0; i < 8; ++i) CHECK(e2[i] == Approx(sums[static_cast<std::size_t>(i)]).epsilon(1e-10));
}

TEST_CASE("lab and collective frames give the same bound spectrum") {
  const JunctionSystem sys(1.0, 50.0, 0.5);
  const Grid2D gc{Grid1D(-2.2, 2.2, 44), Grid1D(-2.2, 2.2, 44), Frame::collective};
  const Grid2D gl{Grid1D(-2.2, 2.2, 44), Grid1D(-2.2, 2.2, 44), Frame::lab};
  const auto ec = eigensolve(build_h_2d_collective(gc, collective_masses(sys), sys), 3);
  const auto el = eigensolve(build_h_2d_lab(gl, sys), 3);
  for (int i = 0; i < 3; ++i) {
    const double gap = ec.eigenvalues[i] - ec.eigenvalues[0] + 20.0;
    CHECK(std::abs(ec.eigenvalues[i] - el.eigenvalues[i]) < 1e-3 * gap);
  }
}

TEST_CASE("collective parts reassemble the full operator") {
  const JunctionSystem sys(1.0, 80.0, 0.7, 0.05, 0.0);
  const Grid2D g{Grid1D(-2.0, 2.0, 20), Grid1D(-1.0, 1.0, 18), Frame::collective};
  const auto parts = build_collective_parts(g, sys);
  const auto m = collective_masses(sys);
  const SparseMatrix a = parts.assemble(1.0 / m.m_minus);
  const auto h = build_h_2d_collective(g, m, sys);
  CHECK(max_abs(SparseMatrix(a - h.matrix)) < 1e-10);
}

TEST_CASE("construction errors") {
  const JunctionSystem sys(1.0, 100.0, 0.5);
  const Grid2D big{Grid1D(-1.0, 1.0, 600), Grid1D(-1.0, 1.0, 600), Frame::collective};
  CHECK_THROWS_AS(build_h_2d_collective(big, collective_masses(sys), sys), ValidationError);
  Build2DOptions small;
  small.grid_cap = 100;
  const Grid2D g{Grid1D(-1.0, 1.0, 16), Grid1D(-1.0, 1.0, 16), Frame::collective};
  CHECK_THROWS_AS(build_h_2d_collective(g, collective_masses(sys), sys, small), ValidationError);
  CHECK_THROWS_AS(build_h_2d_lab(g, sys), ValidationError);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(build_h_1d(Grid1D(0.0, 1.0, 20), 1.0, [nan](double x) { return x > 0.5 ? nan : 0.0; }),
                  ValidationError);
  CHECK_THROWS_AS(build_h_1d(Grid1D(0.0, 1.0, 20), 0.0, [](double) { return 0.0; }), ValidationError);

  Build2DOptions quad;
  quad.potential = PotentialForm::quadratic;
  const JunctionSystem biased(1.0, 100.0, 0.5, 0.1, 0.0);
  CHECK_THROWS_AS(build_h_2d_collective(g, collective_masses(biased), biased, quad), ValidationError);

  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 8), ValidationError);
  CHECK_THROWS_AS(Grid1D(1.0, 0.0, 32), ValidationError);
}

TEST_CASE("wavefunction helpers") {
  const Grid1D g(-5.0, 5.0, 201);
  WaveFunction1D psi{g, Eigen::VectorXcd(201)};
  for (std::size_t i = 0; i < 201; ++i) psi.amplitudes[static_cast<Eigen::Index>(i)] = std::exp(-g.point(i) * g.point(i));
  const auto n = psi.normalized();
  CHECK(n.norm() == Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(n.inner(n)) == Approx(1.0).epsilon(1e-14));
  CHECK(boundary_amplitude_ratio(n) < 1e-10);

  WaveFunction1D zero{g, Eigen::VectorXcd::Zero(201)};
  CHECK_THROWS_AS(zero.normalized(), NumericalError);

  const Grid1D a(0.0, 1.0, 21);
  const Grid1D b(0.3, 1.15, 18);
  CHECK(a.aligned_with(b));
  CHECK(b.offset_in(a) == 6);
  CHECK_FALSE(a.aligned_with(Grid1D(0.01, 1.01, 21)));
}

TEST_CASE("resampling a Gaussian into the lab frame") {
  const Grid2D gc{Grid1D(-4.0, 4.0, 81), Grid1D(-3.0, 3.0, 61), Frame::collective};
  auto gaussian = [](double x, double y) { return std::exp(-x * x / 1.0 - y * y / 0.5); };
  WaveFunction2D src{gc, Eigen::VectorXcd(static_cast<Eigen::Index>(gc.size()))};
  for (std::size_t i = 0; i < 81; ++i)
    for (std::size_t j = 0; j < 61; ++j)
      src.amplitudes[static_cast<Eigen::Index>(gc.index(i, j))] = gaussian(gc.axis_plus.point(i), gc.axis_minus.point(j));

  const Grid2D gl{Grid1D(-2.0, 2.0, 37), Grid1D(-2.0, 2.0, 37), Frame::lab};
  const auto out = resample(src, gl);
  double worst = 0.0;
  for (std::size_t i = 0; i < 37; ++i) {
    for (std::size_t j = 0; j < 37; ++j) {
      const auto [p, m] = to_collective(gl.axis_plus.point(i), gl.axis_minus.point(j));
      worst = std::max(worst, std::abs(out.at(i, j) - gaussian(p, m)));
    }
  }
  CHECK(worst < 2e-3);
}
