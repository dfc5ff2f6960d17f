#pragma once

// Finite-difference Hamiltonians on uniform grids.
//
// Second derivatives use the 5-point 4th-order stencil, first derivatives the
// 5-point 4th-order central stencil. Dirichlet walls sit one step outside the
// grid; the second-derivative stencil is closed by odd reflection about the
// wall, the first-derivative stencil by zero ghosts.

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "jjepr/grid.hpp"
#include "jjepr/kernels.hpp"
#include "jjepr/model.hpp"

namespace jjepr {

enum class Boundary { dirichlet, periodic };

struct HamiltonianOperator {
  SparseMatrix matrix;
  std::variant<Grid1D, Grid2D> grid;
  Eigen::VectorXd potential;   // diagonal potential part, one value per grid point
  double potential_min = 0.0;  // lower bound of the spectrum (kinetic part is PSD)
  double potential_max = 0.0;
  std::string description;
  Boundary boundary = Boundary::dirichlet;

  Eigen::Index dimension() const { return matrix.rows(); }
  /// max_i sum_j |H_ij|, an upper bound on the spectral norm.
  double norm_bound() const;
  /// max |H - H^T|
  double asymmetry() const;
  double measure() const;  // grid cell volume used for L2 normalization
};

/// 4th-order -d^2/dx^2 (note the sign: positive semidefinite) on one axis.
SparseMatrix laplacian_1d(const Grid1D& grid, Boundary bc = Boundary::dirichlet);
/// 4th-order d/dx on one axis (antisymmetric).
SparseMatrix derivative_1d(const Grid1D& grid, Boundary bc = Boundary::dirichlet);

HamiltonianOperator build_h_1d(const Grid1D& grid, double mass,
                               const std::function<double(double)>& potential,
                               Boundary bc = Boundary::dirichlet);

enum class PotentialForm {
  full,       // the cosine-product potential with bias
  quadratic,  // its quadratic expansion about the origin (test hook, unbiased only)
};

struct Build2DOptions {
  std::size_t grid_cap = kDefaultGridCap;
  PotentialForm potential = PotentialForm::full;
};

HamiltonianOperator build_h_2d_collective(const Grid2D& grid, const CollectiveMasses& masses,
                                          const JunctionSystem& sys,
                                          const Build2DOptions& options = {});

HamiltonianOperator build_h_2d_lab(const Grid2D& grid, const JunctionSystem& sys,
                                   const Build2DOptions& options = {});

/// Pieces of the collective Hamiltonian for time-dependent coupling:
/// H(zeta) = fixed + unit_kinetic_minus / m_minus(zeta).
struct CollectiveParts {
  Grid2D grid;
  SparseMatrix fixed;               // p+^2/(2 m+) + V
  SparseMatrix unit_kinetic_minus;  // p-^2 / 2
  Eigen::VectorXd potential;

  SparseMatrix assemble(double inverse_m_minus) const;
  HamiltonianOperator hamiltonian(double inverse_m_minus) const;
};

CollectiveParts build_collective_parts(const Grid2D& grid, const JunctionSystem& sys,
                                       const Build2DOptions& options = {});

}  // namespace jjepr
