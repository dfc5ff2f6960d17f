#include "jjepr/grid.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "jjepr/error.hpp"
#include "jjepr/model.hpp"

namespace jjepr {

Grid1D::Grid1D(double min, double max, std::size_t n) : min_(min), max_(max), n_(n) {
  require(std::isfinite(min) && std::isfinite(max) && max > min, "grid: max must exceed min");
  require(n >= 16, "grid: at least 16 points required");
}

Grid1D Grid1D::periodic(double min, double period, std::size_t n) {
  require(period > 0.0, "grid: period must be positive");
  const double step = period / static_cast<double>(n);
  return Grid1D(min, min + step * static_cast<double>(n - 1), n);
}

Grid1D Grid1D::centered(double center, double step, std::size_t n) {
  require(step > 0.0, "grid: step must be positive");
  const double half = 0.5 * step * static_cast<double>(n - 1);
  return Grid1D(center - half, center + half, n);
}

Eigen::VectorXd Grid1D::points() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) x[static_cast<Eigen::Index>(i)] = point(i);
  return x;
}

bool Grid1D::aligned_with(const Grid1D& other, double tol) const {
  const double h = step();
  if (std::abs(h - other.step()) > tol * h) return false;
  const double shift = (other.min_ - min_) / h;
  return std::abs(shift - std::round(shift)) < 1e-6;
}

long Grid1D::offset_in(const Grid1D& other) const {
  require(aligned_with(other), "grid: grids are not aligned");
  return std::lround((min_ - other.min_) / step());
}

double WaveFunction1D::norm() const {
  return std::sqrt(amplitudes.squaredNorm() * grid.step());
}

WaveFunction1D WaveFunction1D::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("wavefunction: cannot normalize a zero or non-finite state");
  return {grid, amplitudes / n};
}

cplx WaveFunction1D::inner(const WaveFunction1D& other) const {
  require(grid == other.grid, "wavefunction: grid mismatch in inner product");
  return amplitudes.dot(other.amplitudes) * grid.step();
}

double WaveFunction2D::norm() const {
  return std::sqrt(amplitudes.squaredNorm() * grid.cell());
}

WaveFunction2D WaveFunction2D::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("wavefunction: cannot normalize a zero or non-finite state");
  return {grid, amplitudes / n};
}

cplx WaveFunction2D::inner(const WaveFunction2D& other) const {
  require(grid == other.grid, "wavefunction: grid mismatch in inner product");
  return amplitudes.dot(other.amplitudes) * grid.cell();
}

double boundary_amplitude_ratio(const WaveFunction1D& psi) {
  const double peak = psi.amplitudes.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  const auto n = psi.amplitudes.size();
  return std::max(std::abs(psi.amplitudes[0]), std::abs(psi.amplitudes[n - 1])) / peak;
}

double boundary_amplitude_ratio(const WaveFunction2D& psi) {
  const double peak = psi.amplitudes.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  const std::size_t np = psi.grid.axis_plus.size();
  const std::size_t nm = psi.grid.axis_minus.size();
  double edge = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    edge = std::max({edge, std::abs(psi.at(i, 0)), std::abs(psi.at(i, nm - 1))});
  }
  for (std::size_t j = 0; j < nm; ++j) {
    edge = std::max({edge, std::abs(psi.at(0, j)), std::abs(psi.at(np - 1, j))});
  }
  return edge / peak;
}

namespace {

double catmull_rom_weight(int k, double t) {
  // weights for samples at offsets -1, 0, 1, 2
  const double t2 = t * t, t3 = t2 * t;
  switch (k) {
    case -1: return 0.5 * (-t3 + 2.0 * t2 - t);
    case 0: return 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
    case 1: return 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
    default: return 0.5 * (t3 - t2);
  }
}

}  // namespace

WaveFunction2D resample(const WaveFunction2D& source, const Grid2D& target) {
  const auto& ga = source.grid.axis_plus;
  const auto& gb = source.grid.axis_minus;
  const long na = static_cast<long>(ga.size());
  const long nb = static_cast<long>(gb.size());
  auto sample = [&](long i, long j) -> cplx {
    if (i < 0 || j < 0 || i >= na || j >= nb) return {0.0, 0.0};
    return source.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };

  WaveFunction2D out{target, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(target.size()))};
  const std::size_t ta = target.axis_plus.size();
  const std::size_t tb = target.axis_minus.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < ta; ++i) {
    for (std::size_t j = 0; j < tb; ++j) {
      double x = target.axis_plus.point(i);
      double y = target.axis_minus.point(j);
      if (target.frame != source.grid.frame) std::tie(x, y) = to_collective(x, y);
      const double u = (x - ga.min()) / ga.step();
      const double v = (y - gb.min()) / gb.step();
      if (u < -1.0 || v < -1.0 || u > static_cast<double>(na) || v > static_cast<double>(nb)) continue;
      const long iu = static_cast<long>(std::floor(u));
      const long iv = static_cast<long>(std::floor(v));
      const double tu = u - static_cast<double>(iu);
      const double tv = v - static_cast<double>(iv);
      cplx acc{0.0, 0.0};
      for (int a = -1; a <= 2; ++a) {
        const double wa = catmull_rom_weight(a, tu);
        for (int b = -1; b <= 2; ++b) acc += wa * catmull_rom_weight(b, tv) * sample(iu + a, iv + b);
      }
      out.amplitudes[static_cast<Eigen::Index>(target.index(i, j))] = acc;
    }
  }
  return out;
}

}  // namespace jjepr
