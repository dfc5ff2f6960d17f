#include "jjepr/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jjepr/error.hpp"

namespace jjepr {

namespace {

double fast_potential(const JunctionSystem& sys, double theta_plus, double theta_minus) {
  return -2.0 * sys.e_j() * std::cos(theta_plus / kSqrt2) * std::cos(theta_minus / kSqrt2) -
         sys.e_j() / kSqrt2 * (sys.j1() + sys.j2()) * theta_plus;
}

double slow_tilt(const JunctionSystem& sys) { return sys.e_j() / kSqrt2 * (sys.j1() - sys.j2()); }

}  // namespace

Grid1D washboard_grid(double j, std::size_t points) {
  require(std::abs(j) < 1.0, "washboard_grid: |j| must be below 1");
  const double a = std::asin(j);
  return Grid1D(-kPi - a, kPi - a, points);
}

SpectrumResult washboard_spectrum(double e_c, double e_j, double j, std::size_t count, std::size_t points) {
  require(e_c > 0.0 && e_j > 0.0, "washboard_spectrum: energies must be positive");
  const auto grid = washboard_grid(j, points);
  const auto h = build_h_1d(grid, 1.0 / (8.0 * e_c), [e_j, j](double t) { return potential_washboard_1d(e_j, j, t); });
  return eigensolve(h, count);
}

FastAxis fast_mode_axis(const JunctionSystem& sys, std::size_t points) {
  const double period = 2.0 * kPi * kSqrt2;
  if (points == 0) {
    const double sigma = std::sqrt(harmonic_reference(sys).var_theta_plus);
    points = static_cast<std::size_t>(std::ceil(16.0 * period / sigma));
    points = std::clamp<std::size_t>(points, 256, 2000);
  } else {
    require(points >= 16, "fast_mode_axis: at least 16 points required");
  }
  const double j_plus = sys.j1() + sys.j2();
  if (j_plus == 0.0) return {Grid1D::periodic(-0.5 * period, period, points), Boundary::periodic};
  const double a = std::asin(0.5 * j_plus);
  return {Grid1D(kSqrt2 * (-kPi - a), kSqrt2 * (kPi - a), points), Boundary::dirichlet};
}

Eigen::VectorXd pendulum_levels(const JunctionSystem& sys, std::size_t count, std::size_t points) {
  const JunctionSystem unbiased(sys.e_c(), sys.e_j(), sys.zeta());
  const auto coarse = fast_mode_levels(unbiased, 0.0, count, fast_mode_axis(unbiased, points));
  const auto fine = fast_mode_levels(unbiased, 0.0, count, fast_mode_axis(unbiased, 2 * points));
  return fine + (fine - coarse) / 15.0;
}

Eigen::VectorXd fast_mode_levels(const JunctionSystem& sys, double theta_minus, std::size_t count,
                                 const FastAxis& axis) {
  const double m_plus = collective_masses(sys).m_plus;
  const auto h = build_h_1d(
      axis.grid, m_plus, [&](double x) { return fast_potential(sys, x, theta_minus); }, axis.boundary);
  return eigensolve(h, count).eigenvalues;
}

double BOSurface::at(double theta) const {
  const Eigen::Index m = theta_minus.size();
  require(m >= 2 && energy.size() == m, "BOSurface: need at least two samples");
  if (theta <= theta_minus[0]) return energy[0];
  if (theta >= theta_minus[m - 1]) return energy[m - 1];
  const auto it = std::upper_bound(theta_minus.data(), theta_minus.data() + m, theta);
  const Eigen::Index i = (it - theta_minus.data()) - 1;  // theta in [x_i, x_{i+1})
  const double x0 = theta_minus[i], x1 = theta_minus[i + 1];
  const double y0 = energy[i], y1 = energy[i + 1];
  const double dx = x1 - x0;
  // finite-difference slopes on a possibly nonuniform sample set
  auto slope = [&](Eigen::Index k) {
    if (k == 0) return (energy[1] - energy[0]) / (theta_minus[1] - theta_minus[0]);
    if (k == m - 1) return (energy[m - 1] - energy[m - 2]) / (theta_minus[m - 1] - theta_minus[m - 2]);
    return (energy[k + 1] - energy[k - 1]) / (theta_minus[k + 1] - theta_minus[k - 1]);
  };
  const double t = (theta - x0) / dx;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * dx * slope(i) + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * dx * slope(i + 1);
}

BOSurface fast_mode_surface(const JunctionSystem& sys, int n, const std::vector<double>& theta_minus,
                            std::size_t fast_points) {
  require(n >= 0 && n <= 10, "fast_mode_surface: n must lie in [0, 10]");
  require(!theta_minus.empty(), "fast_mode_surface: no samples");
  for (std::size_t i = 1; i < theta_minus.size(); ++i)
    require(theta_minus[i] > theta_minus[i - 1], "fast_mode_surface: samples must be strictly increasing");

  const auto axis = fast_mode_axis(sys, fast_points);
  const auto count = static_cast<Eigen::Index>(theta_minus.size());
  BOSurface out;
  out.n = n;
  out.theta_minus = Eigen::Map<const Eigen::VectorXd>(theta_minus.data(), count);
  out.energy.resize(count);

  std::string failure;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index i = 0; i < count; ++i) {
    try {
      out.energy[i] = fast_mode_levels(sys, theta_minus[static_cast<std::size_t>(i)],
                                       static_cast<std::size_t>(n) + 1, axis)[n];
    } catch (const std::exception& e) {
#pragma omp critical
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw NumericalError("fast_mode_surface: " + failure);
  return out;
}

CurvatureFit fit_curvature(const BOSurface& surface, double window) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < surface.theta_minus.size(); ++i)
    if (std::abs(surface.theta_minus[i]) <= window) rows.push_back(i);
  require(rows.size() >= 3, "fit_curvature: need at least three samples inside the window");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 3);
  Eigen::VectorXd b(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double x = surface.theta_minus[rows[static_cast<std::size_t>(r)]];
    a(r, 0) = 1.0;
    a(r, 1) = 0.5 * x * x;
    a(r, 2) = x * x * x * x;
    b[r] = surface.energy[rows[static_cast<std::size_t>(r)]];
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
  return {c[0], c[1], c[2]};
}

BOLevels bo_levels_analytic(const JunctionSystem& sys, int n, int nu) {
  require(n >= 0 && nu >= 0, "bo_levels_analytic: quantum numbers must be non-negative");
  const auto m = collective_masses(sys);
  const double ej = sys.e_j();
  BOLevels out{};
  out.omega0 = std::sqrt(ej / m.m_plus);
  const double nn = static_cast<double>(n);
  const double shape = nn * nn + nn + 0.5;
  out.epsilon_n0 = -2.0 * ej + out.omega0 * (nn + 0.5) - shape / (16.0 * m.m_plus);
  out.epsilon_n0_collective = -2.0 * ej + out.omega0 * (nn + 0.5) - shape / (32.0 * m.m_plus);
  out.Omega_n = out.omega0 * (1.0 - (nn + 0.5) / (4.0 * std::sqrt(ej * m.m_plus))) * std::sqrt(m.m_plus / m.m_minus);
  out.E_n_nu = out.Omega_n * (static_cast<double>(nu) + 0.5);
  if (ej / (8.0 * sys.e_c()) < 10.0) {
    std::ostringstream msg;
    msg << "E_J/(8 E_C) = " << ej / (8.0 * sys.e_c()) << " is below 10; the asymptotic formulas are unreliable";
    out.warnings.push_back(msg.str());
  }
  return out;
}

SpectrumResult bo_slow_levels(const JunctionSystem& sys, const BOSurface& surface, const Grid1D& slow_grid,
                              std::size_t count) {
  const double m_minus = collective_masses(sys).m_minus;
  const double tilt = slow_tilt(sys);
  const auto h = build_h_1d(slow_grid, m_minus, [&](double x) { return surface.at(x) - tilt * x; });
  return eigensolve(h, count);
}

BOProductState bo_state(const JunctionSystem& sys, const Grid2D& grid, int n, int nu) {
  require(grid.frame == Frame::collective, "bo_state: grid must be in the collective frame");
  require(n >= 0 && n <= 10 && nu >= 0 && nu <= 10, "bo_state: quantum numbers must lie in [0, 10]");
  const auto masses = collective_masses(sys);
  const auto& ap = grid.axis_plus;
  const auto& am = grid.axis_minus;
  const auto np = static_cast<Eigen::Index>(ap.size());
  const auto nm = static_cast<Eigen::Index>(am.size());

  Eigen::MatrixXd fast(np, nm);
  Eigen::VectorXd eps(nm);
  std::vector<char> fast_bound(static_cast<std::size_t>(nm), 0);
  std::string failure;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index j = 0; j < nm; ++j) {
    try {
      const double y = am.point(static_cast<std::size_t>(j));
      const auto h = build_h_1d(ap, masses.m_plus, [&](double x) { return fast_potential(sys, x, y); });
      const auto s = eigensolve(h, static_cast<std::size_t>(n) + 1);
      fast.col(j) = s.eigenvectors.col(n);
      eps[j] = s.eigenvalues[n];
      fast_bound[static_cast<std::size_t>(j)] = s.bound[static_cast<std::size_t>(n)] ? 1 : 0;
    } catch (const std::exception& e) {
#pragma omp critical
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw NumericalError("bo_state: " + failure);

  BOSurface surface{n, am.points(), eps};
  const Eigen::VectorXd slow_potential = eps - slow_tilt(sys) * am.points();
  const auto hs = build_h_1d(am, masses.m_minus, [&](double x) {
    return slow_potential[static_cast<Eigen::Index>(std::lround((x - am.min()) / am.step()))];
  });
  const auto slow = eigensolve(hs, static_cast<std::size_t>(nu) + 1);

  WaveFunction2D psi{grid, Eigen::VectorXcd(static_cast<Eigen::Index>(grid.size()))};
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < nm; ++j)
      psi.amplitudes[static_cast<Eigen::Index>(grid.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))] =
          fast(i, j) * slow.eigenvectors(j, nu);
  psi = psi.normalized();
  const double edge = boundary_amplitude_ratio(psi);
  // the fast level only has to be bound where the slow state lives
  bool bound = slow.bound[static_cast<std::size_t>(nu)];
  const double weight_floor = 1e-6 * slow.eigenvectors.col(nu).cwiseAbs2().maxCoeff();
  for (Eigen::Index j = 0; j < nm; ++j)
    if (slow.eigenvectors(j, nu) * slow.eigenvectors(j, nu) > weight_floor && !fast_bound[static_cast<std::size_t>(j)])
      bound = false;
  return {std::move(psi), slow.eigenvalues[nu], surface, edge, bound};
}

}  // namespace jjepr
