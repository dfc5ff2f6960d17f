#include "jjepr/epr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "jjepr/error.hpp"

namespace jjepr {

namespace {

using MatC = Eigen::MatrixXcd;

// S * M for a real sparse S and complex dense M.
MatC left(const SparseMatrix& s, const MatC& m) {
  MatC out(s.rows(), m.cols());
  out.real() = s * Eigen::MatrixXd(m.real());
  out.imag() = s * Eigen::MatrixXd(m.imag());
  return out;
}

// M * S^T
MatC right(const MatC& m, const SparseMatrix& s) {
  MatC out(m.rows(), s.rows());
  out.real() = (s * Eigen::MatrixXd(m.real().transpose())).transpose();
  out.imag() = (s * Eigen::MatrixXd(m.imag().transpose())).transpose();
  return out;
}

double expect(const MatC& psi, const MatC& op_psi, double cell) {
  return (psi.conjugate().cwiseProduct(op_psi)).sum().real() * cell;
}

}  // namespace

CovarianceReport covariance(const WaveFunction2D& psi) {
  const double norm = psi.norm();
  if (std::abs(norm - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "covariance: state is not normalized (norm " << norm << ")";
    throw ValidationError(msg.str());
  }
  const auto& g = psi.grid;
  const auto na = static_cast<Eigen::Index>(g.axis_plus.size());
  const auto nb = static_cast<Eigen::Index>(g.axis_minus.size());
  const double cell = g.cell();
  // column i holds the theta_b slice at theta_a = a_i
  const MatC m = Eigen::Map<const MatC>(psi.amplitudes.data(), nb, na);
  const Eigen::VectorXd a = g.axis_plus.points();
  const Eigen::VectorXd b = g.axis_minus.points();

  const Eigen::MatrixXd prob = m.cwiseAbs2() * cell;
  const Eigen::VectorXd pa = prob.colwise().sum().transpose();
  const Eigen::VectorXd pb = prob.rowwise().sum();
  const double mean_a = pa.dot(a), mean_b = pb.dot(b);
  const double var_a = pa.dot(a.cwiseAbs2()) - mean_a * mean_a;
  const double var_b = pb.dot(b.cwiseAbs2()) - mean_b * mean_b;
  const double cov_ab = (b.transpose() * prob * a).value() - mean_a * mean_b;

  const SparseMatrix da = derivative_1d(g.axis_plus), db = derivative_1d(g.axis_minus);
  const SparseMatrix la = laplacian_1d(g.axis_plus), lb = laplacian_1d(g.axis_minus);
  const MatC da_m = right(m, da);
  const MatC db_m = left(db, m);
  const cplx minus_i(0.0, -1.0);
  const double mean_pa = expect(m, minus_i * da_m, cell);
  const double mean_pb = expect(m, minus_i * db_m, cell);
  const double pa2 = expect(m, right(m, la), cell);
  const double pb2 = expect(m, left(lb, m), cell);
  const double papb = -expect(m, left(db, da_m), cell);

  const double var_pa = pa2 - mean_pa * mean_pa;
  const double var_pb = pb2 - mean_pb * mean_pb;
  const double cov_p = papb - mean_pa * mean_pb;

  CovarianceReport r;
  const Covariance2 theta_native{var_a, var_b, cov_ab};
  const Covariance2 p_native{var_pa, var_pb, cov_p};
  Covariance2 theta_coll = theta_native, p_coll = p_native, theta_lab = theta_native, p_lab = p_native;
  double mtp = mean_a, mtm = mean_b, mpp = mean_pa, mpm = mean_pb;
  if (g.frame == Frame::collective) {
    theta_lab = rotate_covariance(theta_native);
    p_lab = rotate_covariance(p_native);
  } else {
    theta_coll = rotate_covariance(theta_native);
    p_coll = rotate_covariance(p_native);
    std::tie(mtp, mtm) = to_collective(mean_a, mean_b);
    std::tie(mpp, mpm) = to_collective(mean_pa, mean_pb);
  }
  r.mean_theta_plus = mtp;
  r.mean_theta_minus = mtm;
  r.mean_p_plus = mpp;
  r.mean_p_minus = mpm;
  r.var_theta_plus = theta_coll.var_first;
  r.var_theta_minus = theta_coll.var_second;
  r.cov_theta = theta_coll.cov;
  r.var_p_plus = p_coll.var_first;
  r.var_p_minus = p_coll.var_second;
  r.cov_p = p_coll.cov;
  r.var_theta1 = theta_lab.var_first;
  r.var_theta2 = theta_lab.var_second;
  r.cross_theta = theta_lab.cov;
  r.var_p1 = p_lab.var_first;
  r.var_p2 = p_lab.var_second;
  r.cross_p = p_lab.cov;
  if (!(r.var_theta_minus > 0.0 && r.var_p_plus > 0.0))
    throw NumericalError("covariance: non-positive variance");
  r.s = 1.0 / (2.0 * std::sqrt(r.var_theta_minus * r.var_p_plus));
  return r;
}

double normalized_cross_theta(const JunctionSystem& sys, double cross_theta) {
  return std::sqrt(sys.e_j() / (2.0 * sys.e_c())) * cross_theta;
}

double heisenberg_violation(const CovarianceReport& r) {
  const double plus = 0.25 - r.var_theta_plus * r.var_p_plus;
  const double minus = 0.25 - r.var_theta_minus * r.var_p_minus;
  return std::max({0.0, plus, minus});
}

std::optional<Grid2D> policy_grid(const JunctionSystem& sys, const GridPolicy& policy) {
  require(policy.widths > 0.0, "grid policy: widths must be positive");
  require(policy.points >= 16, "grid policy: at least 16 points per axis");
  const double limit = kPi * kSqrt2;
  const auto [c_plus, c_minus] = to_collective(std::asin(sys.j1()), std::asin(sys.j2()));
  const auto r = harmonic_reference(sys);
  const double sp = std::sqrt(r.var_theta_plus), sm = std::sqrt(r.var_theta_minus);

  if (policy.mode == DomainMode::adaptive) {
    const double hp = std::min(policy.widths * sp, limit);
    const double hm = std::min(policy.widths * sm, limit);
    Grid2D g{Grid1D(c_plus - hp, c_plus + hp, policy.points), Grid1D(c_minus - hm, c_minus + hm, policy.points),
             Frame::collective};
    if (g.size() > policy.grid_cap) return std::nullopt;
    return g;
  }
  require(policy.points_per_sigma > 0.0, "grid policy: points_per_sigma must be positive");
  const auto r0 = harmonic_reference(sys.with_zeta(0.0));
  const double half = std::min(policy.widths * std::sqrt(r0.var_theta_plus), limit);
  const auto nm = static_cast<std::size_t>(std::ceil(2.0 * half / sm * policy.points_per_sigma)) + 1;
  if (policy.points * std::max<std::size_t>(nm, 16) > policy.grid_cap) return std::nullopt;
  return Grid2D{Grid1D(c_plus - half, c_plus + half, policy.points),
                Grid1D(c_minus - half, c_minus + half, std::max<std::size_t>(nm, 16)), Frame::collective};
}

GroundState ground_state(const JunctionSystem& sys, const GridPolicy& policy, bool use_bo) {
  auto grid = policy_grid(sys, policy);
  std::string method;
  if (!grid || use_bo) {
    method = grid ? "bo" : "bo-fallback";
    if (!grid) {
      GridPolicy adaptive = policy;
      adaptive.mode = DomainMode::adaptive;
      adaptive.grid_cap = std::max(policy.grid_cap, policy.points * policy.points);
      grid = policy_grid(sys, adaptive);
    }
    auto bo = bo_ground_state(sys, *grid);
    return {std::move(bo.psi), bo.energy, method, bo.boundary_ratio};
  }
  Build2DOptions opt;
  opt.grid_cap = policy.grid_cap;
  const auto spec = eigensolve(build_h_2d_collective(*grid, collective_masses(sys), sys, opt), 1);
  return {spec.state_2d(0), spec.eigenvalues[0], "exact-" + spec.method, spec.boundary_ratio};
}

CovarianceReport bo_state_report(const JunctionSystem& sys, int n, int nu, const GridPolicy& policy) {
  GridPolicy adaptive = policy;
  adaptive.mode = DomainMode::adaptive;
  const auto grid = policy_grid(sys, adaptive);
  require(grid.has_value(), "bo_state_report: grid exceeds the cap");
  const auto state = bo_state(sys, *grid, n, nu);
  if (!state.bound) {
    std::ostringstream msg;
    msg << "bo_state_report: state (" << n << ", " << nu << ") is not bound";
    throw ValidationError(msg.str());
  }
  auto r = covariance(state.psi);
  r.n = n;
  r.nu = nu;
  return r;
}

std::vector<SweepRow> zeta_sweep(const JunctionSystem& sys_template, const std::vector<double>& zetas,
                                 const GridPolicy& policy) {
  std::vector<SweepRow> rows(zetas.size());
  const auto count = static_cast<long>(zetas.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    SweepRow& row = rows[static_cast<std::size_t>(i)];
    row.zeta = zetas[static_cast<std::size_t>(i)];
    try {
      const auto sys = sys_template.with_zeta(row.zeta);
      row.log10_inv_one_minus_zeta = -std::log10(1.0 - row.zeta);
      const auto ref = harmonic_reference(sys);
      row.s_harmonic = ref.s_harmonic;
      row.cross_theta_norm_harmonic = ref.cross_theta_norm;
      const auto gs = ground_state(sys, policy);
      row.method_flag = gs.method;
      row.report = covariance(gs.psi);
      row.cross_theta_norm_numeric = normalized_cross_theta(sys, row.report->cross_theta);
    } catch (const std::exception& e) {
      row.error = e.what();
      if (row.method_flag.empty()) row.method_flag = "failed";
    }
  }
  return rows;
}

}  // namespace jjepr
