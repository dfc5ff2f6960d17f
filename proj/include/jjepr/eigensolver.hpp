#pragma once

#include <string>
#include <vector>

#include "jjepr/hamiltonian.hpp"

namespace jjepr {

/// Lowest eigenpairs of a discretized Hamiltonian.
///
/// Eigenvectors are stored as columns normalized in the grid L2 norm
/// (sum |v|^2 * cell == 1). Within a degenerate cluster the basis is fixed by
/// Gram-Schmidt over projected grid unit vectors in lexicographic order, and
/// every vector's first significant entry is positive, so outputs do not
/// depend on the solver path.
struct SpectrumResult {
  std::variant<Grid1D, Grid2D> grid;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  std::vector<bool> bound;
  Eigen::VectorXd residuals;  // ||H v - lambda v|| for Euclidean-unit v
  double barrier = 0.0;       // energy below which a state counts as bound
  std::string method;         // "dense" or "krylov"
  double boundary_ratio = 0.0;  // ground-state edge amplitude over peak

  /// True when the box visibly truncates the ground state (ratio above 1e-6).
  bool domain_too_small() const { return boundary_ratio > 1e-6; }

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  WaveFunction1D state_1d(std::size_t i) const;
  WaveFunction2D state_2d(std::size_t i) const;
  std::size_t bound_count() const;
};

struct EigenOptions {
  Eigen::Index dense_threshold = 2048;
  std::size_t max_states = 64;
  int block_size = 4;
  Eigen::Index max_basis = 320;
  int max_restarts = 8;
  double tolerance = 1e-8;  // residual relative to the operator norm bound
  unsigned long long seed = 0x5eed1234ULL;
};

SpectrumResult eigensolve(const HamiltonianOperator& h, std::size_t k, const EigenOptions& options = {});

/// Lowest barrier a particle has to cross to leave the well holding the
/// potential minimum, found by 1D maximization along each escape direction
/// (both sides in 1D, rays to every boundary point in 2D). Only the part of
/// the potential inside the solver domain is considered.
double escape_barrier(const HamiltonianOperator& h);

}  // namespace jjepr
