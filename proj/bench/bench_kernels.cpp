// Serial reference kernels against their OpenMP counterparts.
//
//   ./build/bench/bench_kernels --benchmark_filter=Spmv
//
// Worker count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "jjepr/hamiltonian.hpp"
#include "jjepr/kernels.hpp"

using namespace jjepr;

namespace {

const HamiltonianOperator& lab_operator(std::size_t n) {
  static std::map<std::size_t, HamiltonianOperator> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    const JunctionSystem sys(1.0, 100.0, 0.9);
    const Grid2D g{Grid1D(-3.0, 3.0, n), Grid1D(-3.0, 3.0, n), Frame::lab};
    it = cache.emplace(n, build_h_2d_lab(g, sys)).first;
  }
  return it->second;
}

Eigen::VectorXcd random_state(Eigen::Index n) {
  std::mt19937 rng(42);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {g(rng), g(rng)};
  return v;
}

kernels::ShiftKernel box_kernel(int radius) {
  kernels::ShiftKernel k;
  k.radius = radius;
  k.weights.assign(static_cast<std::size_t>(2 * radius + 1), 1.0 / (2 * radius + 1));
  return k;
}

template <bool Parallel>
void BM_Spmv(benchmark::State& state) {
  const auto& h = lab_operator(static_cast<std::size_t>(state.range(0)));
  const Eigen::VectorXcd x = random_state(h.dimension());
  Eigen::VectorXcd y;
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::spmv(h.matrix, x, y);
    else kernels::serial::spmv(h.matrix, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_NoisyDensity(benchmark::State& state) {
  const Eigen::VectorXcd psi = random_state(state.range(0));
  const auto k = box_kernel(8);
  for (auto _ : state) {
    auto rho = Parallel ? kernels::parallel::noisy_density(psi, k, 1.0, 0.03)
                        : kernels::serial::noisy_density(psi, k, 1.0, 0.03);
    benchmark::DoNotOptimize(rho.data());
  }
}

template <bool Parallel>
void BM_Wigner(benchmark::State& state) {
  const Eigen::VectorXcd psi = random_state(state.range(0));
  const Eigen::MatrixXcd rho = psi * psi.adjoint();
  const Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(257, -20.0, 20.0);
  for (auto _ : state) {
    auto w = Parallel ? kernels::parallel::wigner(rho, 0.03, p) : kernels::serial::wigner(rho, 0.03, p);
    benchmark::DoNotOptimize(w.data());
  }
}

}  // namespace

BENCHMARK_TEMPLATE(BM_Spmv, false)->Arg(128)->Arg(256);
BENCHMARK_TEMPLATE(BM_Spmv, true)->Arg(128)->Arg(256);
BENCHMARK_TEMPLATE(BM_NoisyDensity, false)->Arg(256)->Arg(512);
BENCHMARK_TEMPLATE(BM_NoisyDensity, true)->Arg(256)->Arg(512);
BENCHMARK_TEMPLATE(BM_Wigner, false)->Arg(256);
BENCHMARK_TEMPLATE(BM_Wigner, true)->Arg(256);

BENCHMARK_MAIN();
