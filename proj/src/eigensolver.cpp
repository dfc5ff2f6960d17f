#include "jjepr/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <Eigen/SparseCholesky>

#include "jjepr/error.hpp"

namespace jjepr {

WaveFunction1D SpectrumResult::state_1d(std::size_t i) const {
  const auto& g = std::get<Grid1D>(grid);
  return {g, eigenvectors.col(static_cast<Eigen::Index>(i)).cast<cplx>()};
}

WaveFunction2D SpectrumResult::state_2d(std::size_t i) const {
  const auto& g = std::get<Grid2D>(grid);
  return {g, eigenvectors.col(static_cast<Eigen::Index>(i)).cast<cplx>()};
}

std::size_t SpectrumResult::bound_count() const {
  return static_cast<std::size_t>(std::count(bound.begin(), bound.end(), true));
}

double escape_barrier(const HamiltonianOperator& h) {
  const Eigen::VectorXd& v = h.potential;
  // among (numerically) tied minima take the one nearest the grid center
  const double vmin = v.minCoeff();
  const double tie = 1e-12 * std::max(1.0, std::abs(vmin));
  Eigen::Index imin = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  auto center_distance = [&](Eigen::Index i) {
    if (const auto* g1 = std::get_if<Grid1D>(&h.grid)) {
      return std::abs(static_cast<double>(i) - 0.5 * static_cast<double>(g1->size() - 1));
    }
    const auto& g2 = std::get<Grid2D>(h.grid);
    const auto nb = static_cast<Eigen::Index>(g2.axis_minus.size());
    const double da = static_cast<double>(i / nb) - 0.5 * static_cast<double>(g2.axis_plus.size() - 1);
    const double db = static_cast<double>(i % nb) - 0.5 * static_cast<double>(nb - 1);
    return std::hypot(da, db);
  };
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] > vmin + tie) continue;
    const double d = center_distance(i);
    if (d < best_dist) {
      best_dist = d;
      imin = i;
    }
  }

  if (std::holds_alternative<Grid1D>(h.grid)) {
    const double left = v.head(imin + 1).maxCoeff();
    const double right = v.tail(v.size() - imin).maxCoeff();
    return std::min(left, right);
  }

  const auto& g = std::get<Grid2D>(h.grid);
  const long na = static_cast<long>(g.axis_plus.size());
  const long nb = static_cast<long>(g.axis_minus.size());
  const long ia = imin / nb, ib = imin % nb;
  auto ray_max = [&](long ea, long eb) {
    const long steps = std::max(std::abs(ea - ia), std::abs(eb - ib));
    double best = v[imin];
    for (long s = 1; s <= steps; ++s) {
      const double t = static_cast<double>(s) / static_cast<double>(steps);
      const long a = std::lround(static_cast<double>(ia) + t * static_cast<double>(ea - ia));
      const long b = std::lround(static_cast<double>(ib) + t * static_cast<double>(eb - ib));
      best = std::max(best, v[a * nb + b]);
    }
    return best;
  };
  double barrier = std::numeric_limits<double>::infinity();
  for (long a = 0; a < na; ++a) barrier = std::min({barrier, ray_max(a, 0), ray_max(a, nb - 1)});
  for (long b = 0; b < nb; ++b) barrier = std::min({barrier, ray_max(0, b), ray_max(na - 1, b)});
  return barrier;
}

namespace {

// Uniform doubles in [-1, 1) from a fixed-seed engine; the conversion is
// spelled out so the start vectors are identical across standard libraries.
Eigen::MatrixXd random_block(Eigen::Index rows, Eigen::Index cols, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
  return m;
}

// Orthonormalize the columns of w against q (first `used` columns) and among
// themselves; returns the accepted columns.
Eigen::MatrixXd orthonormalize_block(const Eigen::MatrixXd& q, Eigen::Index used, Eigen::MatrixXd w) {
  for (int pass = 0; pass < 2; ++pass) {
    if (used > 0) {
      const auto qu = q.leftCols(used);
      w -= qu * (qu.transpose() * w);
    }
  }
  std::vector<Eigen::VectorXd> accepted;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    Eigen::VectorXd x = w.col(j);
    const double before = x.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& a : accepted) x -= a * a.dot(x);
      if (used > 0) {
        const auto qu = q.leftCols(used);
        x -= qu * (qu.transpose() * x);
      }
    }
    const double after = x.norm();
    if (after > 1e-10 * std::max(before, 1e-300) && after > 1e-300) accepted.push_back(x / after);
  }
  Eigen::MatrixXd out(w.rows(), static_cast<Eigen::Index>(accepted.size()));
  for (std::size_t j = 0; j < accepted.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = accepted[j];
  return out;
}

void canonicalize(Eigen::VectorXd& values, Eigen::MatrixXd& vectors, double degeneracy_tol) {
  const Eigen::Index k = values.size();
  Eigen::Index start = 0;
  while (start < k) {
    Eigen::Index end = start + 1;
    while (end < k && values[end] - values[end - 1] <= degeneracy_tol) ++end;
    const Eigen::Index d = end - start;
    if (d > 1) {
      const Eigen::MatrixXd basis = vectors.middleCols(start, d);
      const Eigen::VectorXd row_norms = basis.rowwise().norm();
      const double threshold = 1e-2 * row_norms.maxCoeff();
      std::vector<Eigen::VectorXd> chosen;
      for (Eigen::Index i = 0; i < basis.rows() && static_cast<Eigen::Index>(chosen.size()) < d; ++i) {
        if (row_norms[i] < threshold) continue;
        Eigen::VectorXd u = basis * basis.row(i).transpose();
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& c : chosen) u -= c * c.dot(u);
        const double nrm = u.norm();
        if (nrm > threshold) chosen.push_back(u / nrm);
      }
      if (static_cast<Eigen::Index>(chosen.size()) == d) {
        for (Eigen::Index c = 0; c < d; ++c) vectors.col(start + c) = chosen[static_cast<std::size_t>(c)];
      }
    }
    start = end;
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    auto col = vectors.col(c);
    const double peak = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col[i]) >= 1e-2 * peak) {
        if (col[i] < 0.0) col = -col;
        break;
      }
    }
  }
}

struct RawEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // Euclidean-normalized
  std::string method;
};

RawEigen dense_solve(const HamiltonianOperator& h, std::size_t k) {
  const Eigen::MatrixXd dense = Eigen::MatrixXd(h.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolve: dense solver failed");
  const auto kk = static_cast<Eigen::Index>(k);
  return {es.eigenvalues().head(kk), es.eigenvectors().leftCols(kk), "dense"};
}

RawEigen krylov_solve(const HamiltonianOperator& h, std::size_t k, const EigenOptions& opt, double norm) {
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  const Eigen::Index n = h.dimension();
  const auto kk = static_cast<Eigen::Index>(k);
  const double shift = h.potential_min - std::max(1.0, 1e-3 * std::abs(h.potential_min));

  ColMajor shifted = h.matrix;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
  Eigen::SimplicialLDLT<ColMajor> ldlt;
  ldlt.compute(shifted);
  if (ldlt.info() != Eigen::Success) throw NumericalError("eigensolve: shifted factorization failed");

  const Eigen::Index block = std::max<Eigen::Index>(opt.block_size, 1);
  const Eigen::Index max_basis = std::min<Eigen::Index>(n, std::max<Eigen::Index>(opt.max_basis, kk + 4 * block));

  Eigen::MatrixXd start = random_block(n, block, opt.seed);
  Eigen::VectorXd best_values, best_residuals;
  Eigen::MatrixXd best_vectors;

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    Eigen::MatrixXd q(n, max_basis);
    Eigen::MatrixXd hq(n, max_basis);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(max_basis, max_basis);
    Eigen::Index used = 0;

    auto append = [&](const Eigen::MatrixXd& w) {
      Eigen::MatrixXd accepted = orthonormalize_block(q, used, w);
      const Eigen::Index take = std::min<Eigen::Index>(accepted.cols(), max_basis - used);
      const Eigen::Index first = used;
      for (Eigen::Index j = 0; j < take; ++j) {
        q.col(used) = accepted.col(j);
        Eigen::VectorXd y;
        kernels::parallel::spmv(h.matrix, Eigen::VectorXd(accepted.col(j)), y);
        hq.col(used) = y;
        ++used;
      }
      if (take > 0) {
        const Eigen::MatrixXd cross = q.leftCols(used).transpose() * hq.middleCols(first, take);
        t.block(0, first, used, take) = cross;
        t.block(first, 0, take, used) = cross.transpose();
      }
      return take;
    };

    Eigen::Index last_begin = used;
    Eigen::Index last_count = append(start);
    bool converged = false;
    while (last_count > 0) {
      if (used >= kk) {
        const Eigen::MatrixXd tu = t.topLeftCorner(used, used);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (tu + tu.transpose()));
        const Eigen::MatrixXd y = es.eigenvectors().leftCols(kk);
        const Eigen::MatrixXd ritz = q.leftCols(used) * y;
        const Eigen::MatrixXd hritz = hq.leftCols(used) * y;
        Eigen::VectorXd res(kk);
        for (Eigen::Index c = 0; c < kk; ++c)
          res[c] = (hritz.col(c) - es.eigenvalues()[c] * ritz.col(c)).norm();
        best_values = es.eigenvalues().head(kk);
        best_vectors = ritz;
        best_residuals = res;
        // one extra block beyond convergence guards against missed multiplicities
        if (res.maxCoeff() <= opt.tolerance * norm && used >= kk + block) {
          converged = true;
          break;
        }
      }
      if (used >= max_basis) break;
      Eigen::MatrixXd w(n, last_count);
      for (Eigen::Index j = 0; j < last_count; ++j) w.col(j) = ldlt.solve(Eigen::VectorXd(q.col(last_begin + j)));
      last_begin = used;
      last_count = append(w);
    }
    if (converged) return {best_values, best_vectors, "krylov"};
    // thick restart from the current Ritz vectors plus fresh random directions
    start.resize(n, kk + block);
    start.leftCols(kk) = best_vectors;
    start.rightCols(block) = random_block(n, block, opt.seed + static_cast<unsigned long long>(restart) + 1);
  }
  std::ostringstream msg;
  msg << "eigensolve: Krylov solver did not converge; worst residual " << best_residuals.maxCoeff()
      << " vs target " << opt.tolerance * norm;
  throw NumericalError(msg.str());
}

}  // namespace

SpectrumResult eigensolve(const HamiltonianOperator& h, std::size_t k, const EigenOptions& options) {
  const Eigen::Index n = h.dimension();
  require(k >= 1, "eigensolve: at least one state must be requested");
  require(static_cast<Eigen::Index>(k) <= n, "eigensolve: more states requested than the matrix dimension");
  require(k <= options.max_states, "eigensolve: state count exceeds the configured cap");

  const double norm = h.norm_bound();
  // a few extra states so a degenerate cluster straddling k is canonicalized whole
  const std::size_t k_solve = std::min<std::size_t>(static_cast<std::size_t>(n), k + 3);
  RawEigen raw = n < options.dense_threshold ? dense_solve(h, k_solve) : krylov_solve(h, k_solve, options, norm);
  canonicalize(raw.values, raw.vectors, 1e-9 * std::max(norm, 1.0));
  raw.values.conservativeResize(static_cast<Eigen::Index>(k));
  raw.vectors.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(k));

  SpectrumResult out{h.grid, {}, {}, {}, {}, 0.0, {}, 0.0};
  out.eigenvalues = raw.values;
  out.method = raw.method;
  out.residuals.resize(raw.values.size());
  Eigen::VectorXd hv;
  for (Eigen::Index c = 0; c < raw.values.size(); ++c) {
    kernels::parallel::spmv(h.matrix, Eigen::VectorXd(raw.vectors.col(c)), hv);
    out.residuals[c] = (hv - raw.values[c] * raw.vectors.col(c)).norm();
  }
  out.eigenvectors = raw.vectors / std::sqrt(h.measure());
  out.barrier = escape_barrier(h);
  if (h.boundary == Boundary::periodic) out.barrier = h.potential_max;
  out.boundary_ratio = h.boundary == Boundary::periodic ? 0.0
                       : std::holds_alternative<Grid1D>(h.grid) ? boundary_amplitude_ratio(out.state_1d(0))
                                                              : boundary_amplitude_ratio(out.state_2d(0));
  out.bound.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.bound[i] = out.eigenvalues[static_cast<Eigen::Index>(i)] < out.barrier;
  return out;
}

}  // namespace jjepr
