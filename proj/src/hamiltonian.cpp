#include "jjepr/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jjepr/error.hpp"

namespace jjepr {

namespace {

using Triplet = Eigen::Triplet<double, int>;

void append_stencil(std::vector<Triplet>& out, std::size_t n, Boundary bc,
                    const double (&w)[5], double scale, bool reflect_odd) {
  const long ln = static_cast<long>(n);
  for (long i = 0; i < ln; ++i) {
    for (int s = -2; s <= 2; ++s) {
      const double c = w[s + 2] * scale;
      if (c == 0.0) continue;
      long j = i + s;
      if (bc == Boundary::periodic) {
        j = ((j % ln) + ln) % ln;
        out.emplace_back(static_cast<int>(i), static_cast<int>(j), c);
        continue;
      }
      if (j >= 0 && j < ln) {
        out.emplace_back(static_cast<int>(i), static_cast<int>(j), c);
      } else if (reflect_odd && (j == -2 || j == ln + 1)) {
        // wall at -1 (or n): f(-2) = -f(0), f(n+1) = -f(n-1)
        const long mirror = (j == -2) ? 0 : ln - 1;
        out.emplace_back(static_cast<int>(i), static_cast<int>(mirror), -c);
      }
    }
  }
}

SparseMatrix from_triplets(std::size_t n, const std::vector<Triplet>& t) {
  SparseMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

SparseMatrix identity(std::size_t n) {
  SparseMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setIdentity();
  return m;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  const int nb_rows = static_cast<int>(b.rows());
  const int nb_cols = static_cast<int>(b.cols());
  for (int ra = 0; ra < a.outerSize(); ++ra) {
    for (SparseMatrix::InnerIterator ia(a, ra); ia; ++ia) {
      for (int rb = 0; rb < b.outerSize(); ++rb) {
        for (SparseMatrix::InnerIterator ib(b, rb); ib; ++ib) {
          t.emplace_back(ra * nb_rows + rb, static_cast<int>(ia.col()) * nb_cols + static_cast<int>(ib.col()),
                         ia.value() * ib.value());
        }
      }
    }
  }
  SparseMatrix m(static_cast<int>(a.rows() * b.rows()), static_cast<int>(a.cols() * b.cols()));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

SparseMatrix diagonal(const Eigen::VectorXd& d) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), d[i]);
  return from_triplets(static_cast<std::size_t>(d.size()), t);
}

void check_potential(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream msg;
      msg << "hamiltonian: non-finite potential at grid index " << i;
      throw ValidationError(msg.str());
    }
  }
}

void check_cap(const Grid2D& grid, std::size_t cap) {
  if (grid.size() > cap) {
    std::ostringstream msg;
    msg << "hamiltonian: grid of " << grid.size() << " points exceeds cap " << cap;
    throw ValidationError(msg.str());
  }
}

Eigen::VectorXd potential_on_grid(const Grid2D& grid, const JunctionSystem& sys, PotentialForm form) {
  if (form == PotentialForm::quadratic) {
    require(sys.unbiased(), "hamiltonian: quadratic potential form requires zero bias");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  const double ej = sys.e_j();
  for (std::size_t i = 0; i < grid.axis_plus.size(); ++i) {
    const double x = grid.axis_plus.point(i);
    for (std::size_t j = 0; j < grid.axis_minus.size(); ++j) {
      const double y = grid.axis_minus.point(j);
      double value;
      if (form == PotentialForm::quadratic) {
        value = -2.0 * ej + 0.5 * ej * (x * x + y * y);
      } else if (grid.frame == Frame::collective) {
        value = potential_2d(sys, x, y);
      } else {
        value = potential_lab(sys, x, y);
      }
      v[static_cast<Eigen::Index>(grid.index(i, j))] = value;
    }
  }
  check_potential(v);
  return v;
}

constexpr double kSecondDiff[5] = {1.0, -16.0, 30.0, -16.0, 1.0};  // -d^2, /12h^2
constexpr double kFirstDiff[5] = {1.0, -8.0, 0.0, 8.0, -1.0};      // d/dx, /12h

}  // namespace

double HamiltonianOperator::norm_bound() const {
  double best = 0.0;
  for (int r = 0; r < matrix.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

double HamiltonianOperator::asymmetry() const {
  SparseMatrix t = matrix.transpose();
  SparseMatrix d = matrix - t;
  double worst = 0.0;
  for (int r = 0; r < d.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(d, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

double HamiltonianOperator::measure() const {
  if (const auto* g1 = std::get_if<Grid1D>(&grid)) return g1->step();
  return std::get<Grid2D>(grid).cell();
}

SparseMatrix laplacian_1d(const Grid1D& grid, Boundary bc) {
  std::vector<Triplet> t;
  const double h = grid.step();
  append_stencil(t, grid.size(), bc, kSecondDiff, 1.0 / (12.0 * h * h), true);
  return from_triplets(grid.size(), t);
}

SparseMatrix derivative_1d(const Grid1D& grid, Boundary bc) {
  std::vector<Triplet> t;
  append_stencil(t, grid.size(), bc, kFirstDiff, 1.0 / (12.0 * grid.step()), false);
  return from_triplets(grid.size(), t);
}

HamiltonianOperator build_h_1d(const Grid1D& grid, double mass,
                               const std::function<double(double)>& potential, Boundary bc) {
  require(mass > 0.0 && std::isfinite(mass), "build_h_1d: mass must be positive");
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) v[static_cast<Eigen::Index>(i)] = potential(grid.point(i));
  check_potential(v);

  SparseMatrix h = laplacian_1d(grid, bc) * (0.5 / mass);
  h += diagonal(v);
  h.makeCompressed();
  HamiltonianOperator op{std::move(h), grid, v, v.minCoeff(), v.maxCoeff(), "1d", bc};
  return op;
}

HamiltonianOperator build_h_2d_collective(const Grid2D& grid, const CollectiveMasses& masses,
                                          const JunctionSystem& sys, const Build2DOptions& options) {
  require(grid.frame == Frame::collective, "build_h_2d_collective: grid must be in the collective frame");
  check_cap(grid, options.grid_cap);
  require(masses.m_plus > 0.0 && masses.m_minus > 0.0, "build_h_2d_collective: masses must be positive");
  const auto v = potential_on_grid(grid, sys, options.potential);

  const auto np = grid.axis_plus.size();
  const auto nm = grid.axis_minus.size();
  SparseMatrix h = kron(laplacian_1d(grid.axis_plus), identity(nm)) * (0.5 / masses.m_plus);
  h += kron(identity(np), laplacian_1d(grid.axis_minus)) * (0.5 / masses.m_minus);
  h += diagonal(v);
  h.makeCompressed();
  return {std::move(h), grid, v, v.minCoeff(), v.maxCoeff(), "2d-collective"};
}

HamiltonianOperator build_h_2d_lab(const Grid2D& grid, const JunctionSystem& sys,
                                   const Build2DOptions& options) {
  require(grid.frame == Frame::lab, "build_h_2d_lab: grid must be in the lab frame");
  check_cap(grid, options.grid_cap);
  const auto v = potential_on_grid(grid, sys, options.potential);

  const auto n1 = grid.axis_plus.size();
  const auto n2 = grid.axis_minus.size();
  const double a = 4.0 * sys.e_c() / (1.0 + sys.zeta());
  SparseMatrix h = kron(laplacian_1d(grid.axis_plus), identity(n2)) * a;
  h += kron(identity(n1), laplacian_1d(grid.axis_minus)) * a;
  if (sys.zeta() != 0.0) {
    // 2 zeta a p1 p2 = -2 zeta a d1 d2
    h += kron(derivative_1d(grid.axis_plus), derivative_1d(grid.axis_minus)) * (-2.0 * sys.zeta() * a);
  }
  h += diagonal(v);
  h.makeCompressed();
  return {std::move(h), grid, v, v.minCoeff(), v.maxCoeff(), "2d-lab"};
}

CollectiveParts build_collective_parts(const Grid2D& grid, const JunctionSystem& sys,
                                       const Build2DOptions& options) {
  require(grid.frame == Frame::collective, "build_collective_parts: grid must be in the collective frame");
  check_cap(grid, options.grid_cap);
  const auto masses = collective_masses(sys);
  const auto v = potential_on_grid(grid, sys, options.potential);
  const auto np = grid.axis_plus.size();
  const auto nm = grid.axis_minus.size();
  CollectiveParts parts{grid, {}, {}, v};
  parts.fixed = kron(laplacian_1d(grid.axis_plus), identity(nm)) * (0.5 / masses.m_plus);
  parts.fixed += diagonal(v);
  parts.fixed.makeCompressed();
  parts.unit_kinetic_minus = kron(identity(np), laplacian_1d(grid.axis_minus)) * 0.5;
  parts.unit_kinetic_minus.makeCompressed();
  return parts;
}

SparseMatrix CollectiveParts::assemble(double inverse_m_minus) const {
  SparseMatrix h = fixed + unit_kinetic_minus * inverse_m_minus;
  h.makeCompressed();
  return h;
}

HamiltonianOperator CollectiveParts::hamiltonian(double inverse_m_minus) const {
  return {assemble(inverse_m_minus), grid, potential, potential.minCoeff(), potential.maxCoeff(),
          "2d-collective"};
}

}  // namespace jjepr
