#pragma once

// Time-dependent coupling: quasi-adiabatic zeta ramps in the collective frame.

#include <cstddef>
#include <vector>

#include "jjepr/eigensolver.hpp"

namespace jjepr {

enum class RampShape { linear, smoothstep };

struct RampSchedule {
  double zeta_start = 0.0;
  double zeta_end = 0.9;
  double duration = 1.0;  // in 1/E_C
  RampShape shape = RampShape::smoothstep;

  void validate() const;
  double zeta_at(double t) const;
};

/// Slow-mode BO frequency Omega_0 at the system's zeta.
double slow_frequency(const JunctionSystem& sys);
/// Largest admissible time step, 0.1 / omega_0.
double max_time_step(const JunctionSystem& sys);

/// Collective grid that holds the ground state at both ends of the ramp:
/// the box follows the widest zeta and the theta_minus resolution the narrowest.
Grid2D ramp_grid(const JunctionSystem& sys_template, const RampSchedule& schedule, std::size_t points_plus = 48,
                 std::size_t points_minus = 64, double widths = 7.0);

/// Ground state at coupling `zeta` on `grid`.
WaveFunction2D instantaneous_ground_state(const JunctionSystem& sys_template, double zeta, const Grid2D& grid);

struct TraceRow {
  double t;
  double zeta;
  double overlap;  // |<ground(t)|psi(t)>|^2, NaN when not sampled
  double norm;
  double energy;   // <psi|H(t)|psi>
  double sensitivity;  // d<psi|H|psi>/d zeta at fixed psi, central difference
};

struct RampOptions {
  std::size_t trace_stride = 0;     // 0: first and last step only
  bool instantaneous_overlap = true;  // eigensolve at every traced step
  double solver_tolerance = 1e-12;  // relative residual of each Crank-Nicolson solve
  int max_iterations = 1000;
};

struct RampResult {
  WaveFunction2D psi_final;
  std::vector<TraceRow> fidelity_trace;
  double final_overlap = 0.0;
  std::size_t steps = 0;
  double dt = 0.0;
  double max_norm_drift = 0.0;
  double duration_in_inverse_omega0 = 0.0;
  int max_solver_iterations = 0;
};

/// Crank-Nicolson propagation with the midpoint Hamiltonian. The step count is
/// ceil(duration / dt), so the effective step never exceeds dt. Throws
/// NumericalError when the norm drifts by more than 1e-6.
RampResult evolve_ramp(const WaveFunction2D& psi0, const JunctionSystem& sys_template, const RampSchedule& schedule,
                       double dt, const RampOptions& options = {});

/// Runs one ramp per duration in parallel, results in input order.
std::vector<RampResult> duration_ladder(const WaveFunction2D& psi0, const JunctionSystem& sys_template,
                                        const RampSchedule& schedule, const std::vector<double>& durations,
                                        double dt, const RampOptions& options = {});

/// Preconditioned conjugate orthogonal CG for complex symmetric A = I + i a H.
/// Returns the iteration count; x holds the warm start on entry.
int solve_cocg(const SparseMatrix& h, double a, const Eigen::VectorXcd& b, Eigen::VectorXcd& x, double tolerance,
               int max_iterations);

}  // namespace jjepr
