#pragma once

// Uniform grids and real-space wavefunctions.
//
// Grid points are the unknowns of every discretized problem. Dirichlet walls
// sit one step outside the first and last point, so the trapezoidal rule over
// the walled domain reduces to weight `step` on every grid point.

#include <complex>
#include <cstddef>
#include <Eigen/Dense>

namespace jjepr {

using cplx = std::complex<double>;

class Grid1D {
public:
  Grid1D(double min, double max, std::size_t n);

  /// Grid of n points covering one period [min, min + period) for periodic
  /// boundaries; the point after max() is identified with min().
  static Grid1D periodic(double min, double period, std::size_t n);

  /// n points with the given step, centered on `center`.
  static Grid1D centered(double center, double step, std::size_t n);

  double min() const { return min_; }
  double max() const { return max_; }
  std::size_t size() const { return n_; }
  double step() const { return (max_ - min_) / static_cast<double>(n_ - 1); }
  double point(std::size_t i) const { return min_ + step() * static_cast<double>(i); }
  Eigen::VectorXd points() const;

  /// Same step and points on a common lattice (offset an integer number of steps).
  bool aligned_with(const Grid1D& other, double tol = 1e-9) const;
  /// Integer offset k such that point(i) == other.point(i + k); requires alignment.
  long offset_in(const Grid1D& other) const;

  bool operator==(const Grid1D& other) const {
    return min_ == other.min_ && max_ == other.max_ && n_ == other.n_;
  }

private:
  double min_;
  double max_;
  std::size_t n_;
};

enum class Frame { collective, lab };

/// Row-major 2D grid; the first axis is the outer index. In the collective
/// frame the axes are (theta_plus, theta_minus), in the lab frame
/// (theta_1, theta_2).
struct Grid2D {
  Grid1D axis_plus;
  Grid1D axis_minus;
  Frame frame = Frame::collective;

  std::size_t size() const { return axis_plus.size() * axis_minus.size(); }
  std::size_t index(std::size_t i_plus, std::size_t i_minus) const {
    return i_plus * axis_minus.size() + i_minus;
  }
  double cell() const { return axis_plus.step() * axis_minus.step(); }
  bool operator==(const Grid2D& o) const {
    return axis_plus == o.axis_plus && axis_minus == o.axis_minus && frame == o.frame;
  }
};

/// Default cap on the number of 2D grid points.
inline constexpr std::size_t kDefaultGridCap = 512 * 512;

struct WaveFunction1D {
  Grid1D grid;
  Eigen::VectorXcd amplitudes;

  double norm() const;
  WaveFunction1D normalized() const;
  cplx inner(const WaveFunction1D& other) const;  // <this|other>
};

struct WaveFunction2D {
  Grid2D grid;
  Eigen::VectorXcd amplitudes;

  double norm() const;
  WaveFunction2D normalized() const;
  cplx inner(const WaveFunction2D& other) const;
  cplx at(std::size_t i_plus, std::size_t i_minus) const {
    return amplitudes[static_cast<Eigen::Index>(grid.index(i_plus, i_minus))];
  }
};

/// Fraction of peak |psi| found on the outermost grid rows/columns; a value
/// above 1e-6 means the Dirichlet box truncates the state.
double boundary_amplitude_ratio(const WaveFunction1D& psi);
double boundary_amplitude_ratio(const WaveFunction2D& psi);

/// Catmull-Rom interpolation of a 2D state onto another grid (zero outside
/// the source support). Used to move collective-frame states into the lab
/// frame and vice versa.
WaveFunction2D resample(const WaveFunction2D& source, const Grid2D& target);

}  // namespace jjepr
