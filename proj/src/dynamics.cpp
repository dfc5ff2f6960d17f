#include "jjepr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jjepr/error.hpp"
#include "jjepr/spectra.hpp"

namespace jjepr {

namespace {

double inverse_m_minus(const JunctionSystem& sys, double zeta) {
  return 8.0 * sys.e_c() * (1.0 - zeta) / (1.0 + zeta);
}

// <psi|H|psi> for a real symmetric H with the grid measure
double energy(const SparseMatrix& h, const WaveFunction2D& psi) {
  Eigen::VectorXcd hpsi;
  kernels::parallel::spmv(h, psi.amplitudes, hpsi);
  return psi.amplitudes.dot(hpsi).real() * psi.grid.cell();
}

cplx bilinear(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return (a.array() * b.array()).sum(); }

// COCG for (I + i a H) x = b with H applied by `apply_h` and Jacobi preconditioning.
template <typename ApplyH>
int cocg(ApplyH&& apply_h, const Eigen::VectorXd& h_diag, double a, const Eigen::VectorXcd& b, Eigen::VectorXcd& x,
         double tolerance, int max_iterations) {
  const cplx ia(0.0, a);
  const Eigen::VectorXcd inv_diag = (Eigen::VectorXcd::Ones(b.size()) + ia * h_diag.cast<cplx>()).cwiseInverse();
  Eigen::VectorXcd hx;
  auto apply = [&](const Eigen::VectorXcd& v, Eigen::VectorXcd& out) {
    apply_h(v, hx);
    out = v + ia * hx;
  };
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    return 0;
  }
  Eigen::VectorXcd r, q;
  apply(x, q);
  r = b - q;
  Eigen::VectorXcd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXcd p = z;
  cplx rho = bilinear(r, z);
  for (int it = 0; it < max_iterations; ++it) {
    if (r.norm() <= tolerance * bnorm) return it;
    apply(p, q);
    const cplx pq = bilinear(p, q);
    if (std::abs(pq) == 0.0) throw NumericalError("cocg: breakdown");
    const cplx alpha = rho / pq;
    x += alpha * p;
    r -= alpha * q;
    z = inv_diag.cwiseProduct(r);
    const cplx rho_next = bilinear(r, z);
    p = z + (rho_next / rho) * p;
    rho = rho_next;
  }
  if (r.norm() <= tolerance * bnorm) return max_iterations;
  std::ostringstream msg;
  msg << "cocg: no convergence in " << max_iterations << " iterations (residual " << r.norm() / bnorm << ")";
  throw NumericalError(msg.str());
}

}  // namespace

void RampSchedule::validate() const {
  require(std::isfinite(zeta_start) && std::isfinite(zeta_end), "ramp: zeta values must be finite");
  require(zeta_start >= 0.0 && zeta_start <= zeta_end && zeta_end < 1.0,
          "ramp: need 0 <= zeta_start <= zeta_end < 1");
  require(duration > 0.0 && std::isfinite(duration), "ramp: duration must be positive");
}

double RampSchedule::zeta_at(double t) const {
  const double x = std::clamp(t / duration, 0.0, 1.0);
  const double f = shape == RampShape::linear ? x : x * x * (3.0 - 2.0 * x);
  return zeta_start + (zeta_end - zeta_start) * f;
}

double slow_frequency(const JunctionSystem& sys) { return bo_levels_analytic(sys, 0, 0).Omega_n; }

double max_time_step(const JunctionSystem& sys) { return 0.1 / harmonic_reference(sys).omega0; }

Grid2D ramp_grid(const JunctionSystem& sys_template, const RampSchedule& schedule, std::size_t points_plus,
                 std::size_t points_minus, double widths) {
  schedule.validate();
  require(points_plus >= 16 && points_minus >= 16, "ramp_grid: at least 16 points per axis");
  require(widths > 0.0, "ramp_grid: widths must be positive");
  const auto wide = harmonic_reference(sys_template.with_zeta(schedule.zeta_start));
  const auto [c_plus, c_minus] = to_collective(std::asin(sys_template.j1()), std::asin(sys_template.j2()));
  const double limit = kPi * kSqrt2;
  const double hp = std::min(widths * std::sqrt(wide.var_theta_plus), limit);
  const double hm = std::min(widths * std::sqrt(wide.var_theta_minus), limit);
  return {Grid1D(c_plus - hp, c_plus + hp, points_plus), Grid1D(c_minus - hm, c_minus + hm, points_minus),
          Frame::collective};
}

WaveFunction2D instantaneous_ground_state(const JunctionSystem& sys_template, double zeta, const Grid2D& grid) {
  const auto parts = build_collective_parts(grid, sys_template);
  return eigensolve(parts.hamiltonian(inverse_m_minus(sys_template, zeta)), 1).state_2d(0);
}

int solve_cocg(const SparseMatrix& h, double a, const Eigen::VectorXcd& b, Eigen::VectorXcd& x, double tolerance,
               int max_iterations) {
  return cocg([&](const Eigen::VectorXcd& v, Eigen::VectorXcd& out) { kernels::parallel::spmv(h, v, out); },
              h.diagonal(), a, b, x, tolerance, max_iterations);
}

RampResult evolve_ramp(const WaveFunction2D& psi0, const JunctionSystem& sys_template, const RampSchedule& schedule,
                       double dt, const RampOptions& options) {
  schedule.validate();
  require(psi0.grid.frame == Frame::collective, "evolve_ramp: state must live on a collective grid");
  require(std::abs(psi0.norm() - 1.0) <= 1e-6, "evolve_ramp: initial state must be normalized");
  const auto sys_end = sys_template.with_zeta(schedule.zeta_end);
  const double dt_max = max_time_step(sys_end);
  if (!(dt > 0.0) || dt > dt_max * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "evolve_ramp: dt must lie in (0, " << dt_max << "] (0.1/omega_0)";
    throw ValidationError(msg.str());
  }

  const auto parts = build_collective_parts(psi0.grid, sys_template);
  const auto steps = static_cast<std::size_t>(std::ceil(schedule.duration / dt - 1e-9));
  const double h = schedule.duration / static_cast<double>(steps);

  RampResult out{psi0, {}, 0.0, steps, h, 0.0, schedule.duration * harmonic_reference(sys_end).omega0, 0};
  auto record = [&](std::size_t n, bool last) {
    const double t = static_cast<double>(n) * h;
    const double zeta = schedule.zeta_at(t);
    double overlap = std::numeric_limits<double>::quiet_NaN();
    if (last || options.instantaneous_overlap) {
      const auto ground = eigensolve(parts.hamiltonian(inverse_m_minus(sys_template, zeta)), 1).state_2d(0);
      overlap = std::norm(ground.inner(out.psi_final));
    }
    // <H(zeta)> = <F> + c(zeta) <K>
    const double f = energy(parts.fixed, out.psi_final);
    const double k = energy(parts.unit_kinetic_minus, out.psi_final);
    const double dz = 1e-6;
    const double lo = std::max(0.0, zeta - dz), hi = std::min(1.0 - 1e-9, zeta + dz);
    const double sens = k * (inverse_m_minus(sys_template, hi) - inverse_m_minus(sys_template, lo)) / (hi - lo);
    out.fidelity_trace.push_back(
        {t, zeta, overlap, out.psi_final.norm(), f + inverse_m_minus(sys_template, zeta) * k, sens});
    if (last) out.final_overlap = overlap;
  };
  record(0, steps == 0);

  // energies are measured from the initial one: a global phase that keeps the
  // Crank-Nicolson phase error and the warm start small
  const double e_ref = out.fidelity_trace.front().energy;
  const Eigen::VectorXd fixed_diag = parts.fixed.diagonal().array() - e_ref;
  const Eigen::VectorXd kinetic_diag = parts.unit_kinetic_minus.diagonal();
  Eigen::VectorXcd rhs, hpsi, kpsi, previous = out.psi_final.amplitudes;
  const cplx half_i(0.0, 0.5 * h);
  for (std::size_t n = 0; n < steps; ++n) {
    const double c = inverse_m_minus(sys_template, schedule.zeta_at((static_cast<double>(n) + 0.5) * h));
    auto apply_h = [&](const Eigen::VectorXcd& v, Eigen::VectorXcd& out_v) {
      kernels::parallel::spmv(parts.fixed, v, out_v);
      kernels::parallel::spmv(parts.unit_kinetic_minus, v, kpsi);
      out_v += c * kpsi - e_ref * v;
    };
    auto& psi = out.psi_final.amplitudes;
    apply_h(psi, hpsi);
    rhs = psi - half_i * hpsi;
    Eigen::VectorXcd next = 2.0 * psi - previous;
    const int iters = cocg(apply_h, fixed_diag + c * kinetic_diag, 0.5 * h, rhs, next, options.solver_tolerance,
                           options.max_iterations);
    out.max_solver_iterations = std::max(out.max_solver_iterations, iters);
    previous = std::move(psi);
    psi = std::move(next);

    const double drift = std::abs(out.psi_final.norm() - 1.0);
    out.max_norm_drift = std::max(out.max_norm_drift, drift);
    if (drift > 1e-6) {
      std::ostringstream msg;
      msg << "evolve_ramp: norm drift " << drift << " at step " << n + 1 << " (t = " << (n + 1) * h
          << ", zeta = " << schedule.zeta_at((n + 1) * h) << ")";
      throw NumericalError(msg.str());
    }
    const bool last = n + 1 == steps;
    if (last || (options.trace_stride > 0 && (n + 1) % options.trace_stride == 0)) record(n + 1, last);
  }
  return out;
}

std::vector<RampResult> duration_ladder(const WaveFunction2D& psi0, const JunctionSystem& sys_template,
                                        const RampSchedule& schedule, const std::vector<double>& durations,
                                        double dt, const RampOptions& options) {
  std::vector<RampResult> results(durations.size(), RampResult{psi0, {}, 0.0, 0, 0.0, 0.0, 0.0, 0});
  std::string failure;
  const auto count = static_cast<long>(durations.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      RampSchedule s = schedule;
      s.duration = durations[static_cast<std::size_t>(i)];
      results[static_cast<std::size_t>(i)] = evolve_ramp(psi0, sys_template, s, dt, options);
    } catch (const std::exception& e) {
#pragma omp critical
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw NumericalError("duration_ladder: " + failure);
  return results;
}

}  // namespace jjepr
