#include "jjepr/kernels.hpp"

#include <cmath>
#include <complex>
#include <omp.h>

namespace jjepr::kernels {

namespace {

template <typename Vec>
inline void spmv_row(const SparseMatrix& a, const Vec& x, Vec& y, Eigen::Index row) {
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  typename Vec::Scalar acc(0);
  for (int k = outer[row]; k < outer[row + 1]; ++k) acc += val[k] * x[inner[k]];
  y[row] = acc;
}

inline std::complex<double> density_element(const Eigen::VectorXcd& psi, const ShiftKernel& sk,
                                            Eigen::Index i, Eigen::Index j) {
  const Eigen::Index n = psi.size();
  std::complex<double> acc(0.0, 0.0);
  for (int s = -sk.radius; s <= sk.radius; ++s) {
    const Eigen::Index a = i - s, b = j - s;
    if (a < 0 || b < 0 || a >= n || b >= n) continue;
    acc += sk.weights[static_cast<std::size_t>(s + sk.radius)] * psi[a] * std::conj(psi[b]);
  }
  return acc;
}

inline void density_row(const Eigen::VectorXcd& psi, const ShiftKernel& sk, double var_p,
                        double step, Eigen::Index i, Eigen::MatrixXcd& rho) {
  for (Eigen::Index j = 0; j < psi.size(); ++j) {
    const double d = static_cast<double>(i - j) * step;
    rho(i, j) = std::exp(-0.5 * var_p * d * d) * density_element(psi, sk, i, j);
  }
}

inline void wigner_row(const Eigen::MatrixXcd& rho, double step, const Eigen::VectorXd& p,
                       Eigen::Index i, Eigen::MatrixXd& w) {
  const Eigen::Index n = rho.rows();
  const Eigen::Index kmax = std::min(i, n - 1 - i);
  for (Eigen::Index m = 0; m < p.size(); ++m) {
    double acc = rho(i, i).real();
    for (Eigen::Index k = 1; k <= kmax; ++k) {
      const double phase = -2.0 * p[m] * static_cast<double>(k) * step;
      acc += 2.0 * (rho(i + k, i - k) * std::complex<double>(std::cos(phase), std::sin(phase))).real();
    }
    w(i, m) = acc * step / M_PI;
  }
}

}  // namespace

namespace serial {

void spmv(const SparseMatrix& a, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  y.resize(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) spmv_row(a, x, y, r);
}

void spmv(const SparseMatrix& a, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  y.resize(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) spmv_row(a, x, y, r);
}

Eigen::MatrixXcd noisy_density(const Eigen::VectorXcd& psi, const ShiftKernel& shifts,
                               double var_p, double step) {
  Eigen::MatrixXcd rho(psi.size(), psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) density_row(psi, shifts, var_p, step, i, rho);
  return rho;
}

Eigen::MatrixXd wigner(const Eigen::MatrixXcd& rho, double step, const Eigen::VectorXd& p) {
  Eigen::MatrixXd w(rho.rows(), p.size());
  for (Eigen::Index i = 0; i < rho.rows(); ++i) wigner_row(rho, step, p, i, w);
  return w;
}

}  // namespace serial

namespace parallel {

void spmv(const SparseMatrix& a, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  y.resize(a.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < a.rows(); ++r) spmv_row(a, x, y, r);
}

void spmv(const SparseMatrix& a, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  y.resize(a.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < a.rows(); ++r) spmv_row(a, x, y, r);
}

Eigen::MatrixXcd noisy_density(const Eigen::VectorXcd& psi, const ShiftKernel& shifts,
                               double var_p, double step) {
  Eigen::MatrixXcd rho(psi.size(), psi.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < psi.size(); ++i) density_row(psi, shifts, var_p, step, i, rho);
  return rho;
}

Eigen::MatrixXd wigner(const Eigen::MatrixXcd& rho, double step, const Eigen::VectorXd& p) {
  Eigen::MatrixXd w(rho.rows(), p.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < rho.rows(); ++i) wigner_row(rho, step, p, i, w);
  return w;
}

}  // namespace parallel

int worker_count() { return omp_get_max_threads(); }

void set_worker_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace jjepr::kernels
