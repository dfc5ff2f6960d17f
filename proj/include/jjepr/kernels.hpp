#pragma once

// Data-parallel inner loops. Every kernel exists twice: kernels::serial is the
// reference implementation kept for testing, kernels::parallel is the OpenMP
// version used by the library. Both perform the same arithmetic in the same
// order per output element, so their results are bitwise identical.

#include <vector>
#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace jjepr {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

namespace kernels {

/// Weights of a discrete shift kernel w[s + radius] for shifts s in [-radius, radius].
struct ShiftKernel {
  int radius = 0;
  std::vector<double> weights{1.0};
};

namespace serial {
void spmv(const SparseMatrix& a, const Eigen::VectorXd& x, Eigen::VectorXd& y);
void spmv(const SparseMatrix& a, const Eigen::VectorXcd& x, Eigen::VectorXcd& y);

/// rho(i, j) = exp(-var_p (i-j)^2 h^2 / 2) * sum_s w_s psi(i-s) conj(psi(j-s)).
Eigen::MatrixXcd noisy_density(const Eigen::VectorXcd& psi, const ShiftKernel& shifts,
                               double var_p, double step);

/// W(i, m) = (h/pi) sum_k rho(i+k, i-k) exp(-2 i p_m k h), rows indexed by grid point.
Eigen::MatrixXd wigner(const Eigen::MatrixXcd& rho, double step, const Eigen::VectorXd& p);
}  // namespace serial

namespace parallel {
void spmv(const SparseMatrix& a, const Eigen::VectorXd& x, Eigen::VectorXd& y);
void spmv(const SparseMatrix& a, const Eigen::VectorXcd& x, Eigen::VectorXcd& y);
Eigen::MatrixXcd noisy_density(const Eigen::VectorXcd& psi, const ShiftKernel& shifts,
                               double var_p, double step);
Eigen::MatrixXd wigner(const Eigen::MatrixXcd& rho, double step, const Eigen::VectorXd& p);
}  // namespace parallel

/// Number of OpenMP workers currently configured.
int worker_count();
void set_worker_count(int n);

}  // namespace kernels
}  // namespace jjepr
