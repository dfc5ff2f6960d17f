#include "jjepr/teleport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "jjepr/error.hpp"

namespace jjepr {

namespace {

double canonical(std::uint64_t& state) {
  // splitmix64; the stream is fixed by the seed on every platform
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

std::size_t sample(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> to_cdf(const std::vector<double>& weights) {
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += std::max(weights[i], 0.0);
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw NumericalError("teleport: outcome distribution has no weight");
  for (auto& c : cdf) c /= acc;
  return cdf;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

void require_normalized(const WaveFunction1D& psi, const char* who) {
  const double norm = psi.norm();
  if (std::abs(norm - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << who << ": state is not normalized (norm " << norm << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

void NoiseBudget::validate() const {
  for (double v : {var_theta_epr, var_theta_meas, var_p_epr, var_p_meas}) {
    require(std::isfinite(v), "noise budget: components must be finite");
    require(v >= 0.0, "noise budget: components must be non-negative");
  }
}

NoiseBudget NoiseBudget::totals_only(double var_theta_total, double var_p_total) {
  NoiseBudget b{0.0, var_theta_total, 0.0, var_p_total};
  b.validate();
  return b;
}

NoiseBudget reference_budget() { return NoiseBudget::totals_only(kReferenceVarTheta, kReferenceVarP); }

NoiseBudget noise_budget_from_epr(const CovarianceReport& report, double meas_var_theta, double meas_var_p) {
  NoiseBudget b{2.0 * report.var_theta_minus, meas_var_theta, 2.0 * report.var_p_plus, meas_var_p};
  b.validate();
  return b;
}

NoiseBudget matched_budget(const CovarianceReport& report) {
  const double epr_p = 2.0 * report.var_p_plus;
  return noise_budget_from_epr(report, 0.0, std::max(0.0, kReferenceVarP - epr_p));
}

DensityMatrix1D DensityMatrix1D::pure(const WaveFunction1D& psi) {
  return {psi.grid, psi.amplitudes * psi.amplitudes.adjoint(), 0.0};
}

double DensityMatrix1D::trace() const { return matrix.diagonal().real().sum() * grid.step(); }

double DensityMatrix1D::hermiticity_error() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix1D::min_eigenvalue() const {
  const Eigen::MatrixXcd op = 0.5 * (matrix + matrix.adjoint()) * grid.step();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix1D::validate() const {
  std::ostringstream msg;
  if (hermiticity_error() > 1e-10) msg << "density matrix is not hermitian (" << hermiticity_error() << ")";
  else if (std::abs(trace() - 1.0) > 1e-8) msg << "density matrix trace is " << trace();
  else if (min_eigenvalue() < -1e-8) msg << "density matrix has eigenvalue " << min_eigenvalue();
  else return;
  throw NumericalError(msg.str());
}

SpectrumResult input_spectrum(double e_c, double e_j, double j, std::size_t points, std::size_t count) {
  return washboard_spectrum(e_c, e_j, j, count, points);
}

std::vector<cplx> two_term_coefficients() {
  const double a = 1.0 / std::sqrt(2.0);
  return {0.0, a, 0.0, cplx(0.0, -a)};
}

std::vector<cplx> three_term_coefficients() {
  const double a = 1.0 / std::sqrt(3.0);
  return {a, 0.0, cplx(0.0, -a), 0.0, cplx(0.0, a)};
}

InputState build_input_state(const std::vector<cplx>& coeffs, const SpectrumResult& spectrum) {
  require(!coeffs.empty(), "input state: no coefficients");
  const auto* grid = std::get_if<Grid1D>(&spectrum.grid);
  require(grid != nullptr, "input state: basis must be one-dimensional");
  double norm2 = 0.0;
  for (const auto& c : coeffs) {
    require(std::isfinite(c.real()) && std::isfinite(c.imag()), "input state: coefficients must be finite");
    norm2 += std::norm(c);
  }
  require(norm2 > 0.0, "input state: coefficients are all zero");
  InputState out{{}, spectrum, {*grid, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid->size()))}};
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const cplx c = coeffs[j] / std::sqrt(norm2);
    out.coefficients.push_back(c);
    if (c == cplx(0.0, 0.0)) continue;
    if (j >= spectrum.size() || !spectrum.bound[j]) {
      std::ostringstream msg;
      msg << "input state: level " << j << (j >= spectrum.size() ? " was not computed" : " is not bound");
      throw ValidationError(msg.str());
    }
    out.psi.amplitudes += c * spectrum.eigenvectors.col(static_cast<Eigen::Index>(j)).cast<cplx>();
  }
  out.psi = out.psi.normalized();
  return out;
}

kernels::ShiftKernel gaussian_shift_kernel(double var, double step) {
  require(std::isfinite(var) && var >= 0.0, "shift kernel: variance must be non-negative");
  if (var == 0.0) return {};
  const double sigma = std::sqrt(var);
  if (step > sigma) {
    std::ostringstream msg;
    msg << "channel: grid step " << step << " does not resolve the theta noise (std " << sigma << ")";
    throw ValidationError(msg.str());
  }
  kernels::ShiftKernel k;
  k.radius = static_cast<int>(std::ceil(8.0 * sigma / step));
  k.weights.resize(static_cast<std::size_t>(2 * k.radius + 1));
  double sum = 0.0;
  for (int s = -k.radius; s <= k.radius; ++s) {
    const double x = s * step;
    sum += k.weights[static_cast<std::size_t>(s + k.radius)] = std::exp(-0.5 * x * x / var);
  }
  for (auto& w : k.weights) w /= sum;
  return k;
}

DensityMatrix1D apply_channel(const WaveFunction1D& psi, const NoiseBudget& budget) {
  budget.validate();
  require_normalized(psi, "apply_channel");
  const double h = psi.grid.step();
  const auto kernel = gaussian_shift_kernel(budget.var_theta_total(), h);
  DensityMatrix1D rho{psi.grid, kernels::parallel::noisy_density(psi.amplitudes, kernel, budget.var_p_total(), h),
                      0.0};
  const double tr = rho.trace();
  rho.clipped_weight = 1.0 - tr;
  rho.matrix /= tr;
  return rho;
}

DensityMatrix1D apply_channel(const InputState& input, const NoiseBudget& budget) {
  return apply_channel(input.psi, budget);
}

double fidelity(const WaveFunction1D& psi, const DensityMatrix1D& rho) {
  require(psi.grid == rho.grid, "fidelity: state and density matrix live on different grids");
  const double h = psi.grid.step();
  return psi.amplitudes.dot(rho.matrix * psi.amplitudes).real() * h * h;
}

double fidelity(const InputState& input, const DensityMatrix1D& rho) { return fidelity(input.psi, rho); }

double trace_distance(const DensityMatrix1D& a, const DensityMatrix1D& b) {
  require(a.grid == b.grid, "trace_distance: grids differ");
  const Eigen::MatrixXcd d = a.matrix - b.matrix;
  const Eigen::MatrixXcd op = 0.5 * (d + d.adjoint()) * a.grid.step();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

WaveFunction2D harmonic_epr_resource(const JunctionSystem& sys, const Grid1D& axis) {
  require(sys.unbiased(), "harmonic resource: system must be unbiased");
  const auto r = harmonic_reference(sys);
  const Grid2D g{axis, axis, Frame::lab};
  WaveFunction2D psi{g, Eigen::VectorXcd(static_cast<Eigen::Index>(g.size()))};
  for (std::size_t i = 0; i < axis.size(); ++i)
    for (std::size_t l = 0; l < axis.size(); ++l) {
      const auto [xp, xm] = to_collective(axis.point(i), axis.point(l));
      psi.amplitudes[static_cast<Eigen::Index>(g.index(i, l))] =
          std::exp(-0.25 * (xp * xp / r.var_theta_plus + xm * xm / r.var_theta_minus));
    }
  return psi.normalized();
}

WaveFunction2D ideal_epr_resource(const Grid1D& axis) {
  const Grid2D g{axis, axis, Frame::lab};
  WaveFunction2D psi{g, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.size()))};
  const double a = 1.0 / (axis.step() * std::sqrt(static_cast<double>(axis.size())));
  for (std::size_t i = 0; i < axis.size(); ++i) psi.amplitudes[static_cast<Eigen::Index>(g.index(i, i))] = a;
  return psi;
}

WaveFunction2D lab_resource(const WaveFunction2D& state, const Grid1D& axis) {
  return resample(state, Grid2D{axis, axis, Frame::lab}).normalized();
}

WaveFunction1D displace(const WaveFunction1D& psi, long shift_steps, double p, ShiftMode mode) {
  return correct(psi, -shift_steps, p, mode);
}

WaveFunction1D correct(const WaveFunction1D& psi, long shift_steps, double p, ShiftMode mode) {
  const auto n = static_cast<long>(psi.grid.size());
  WaveFunction1D out{psi.grid, Eigen::VectorXcd::Zero(n)};
  for (long i = 0; i < n; ++i) {
    long src = i + shift_steps;
    if (mode == ShiftMode::cyclic) src = ((src % n) + n) % n;
    if (src < 0 || src >= n) continue;
    const double phase = p * psi.grid.point(static_cast<std::size_t>(i));
    out.amplitudes[i] = psi.amplitudes[src] * cplx(std::cos(phase), std::sin(phase));
  }
  return out;
}

TeleportSampler::TeleportSampler(const InputState& input, const WaveFunction2D& resource, ShiftMode mode)
    : grid_(input.psi.grid), psi_(input.psi.amplitudes), mode_(mode), n_(input.psi.grid.size()) {
  require(resource.grid.frame == Frame::lab, "teleport: resource must live on a lab-frame grid");
  require(resource.grid.axis_plus == grid_ && resource.grid.axis_minus == grid_,
          "teleport: resource axes must equal the input grid");
  require_normalized(input.psi, "teleport input");
  const double rnorm = resource.norm();
  require(std::abs(rnorm - 1.0) <= 1e-6, "teleport: resource is not normalized");

  const auto n = static_cast<Eigen::Index>(n_);
  const double h = grid_.step();
  resource_ = Eigen::Map<const Eigen::MatrixXcd>(resource.amplitudes.data(), n, n).transpose();
  reduced_ = (resource_.transpose() * resource_.conjugate()) * h;

  if (mode_ == ShiftMode::bounded) {
    m_ = next_pow2(2 * n_ - 1);
    k_min_ = -(static_cast<long>(n_) - 1);
    k_max_ = static_cast<long>(n_) - 1;
  } else {
    m_ = n_;
    k_min_ = 0;
    k_max_ = static_cast<long>(n_) - 1;
  }
  std::vector<double> weights(static_cast<std::size_t>(k_max_ - k_min_ + 1), 0.0);
  for (long k = k_min_; k <= k_max_; ++k) {
    double acc = 0.0;
    for (long j = 0; j < n; ++j) {
      long l = j + k;
      if (mode_ == ShiftMode::cyclic) l %= n;
      if (l < 0 || l >= n) continue;
      acc += std::norm(psi_[j]) * reduced_(l, l).real();
    }
    weights[static_cast<std::size_t>(k - k_min_)] = acc * h * h;
  }
  shift_cdf_ = to_cdf(weights);
}

double TeleportSampler::shift_probability(long k) const {
  if (k < k_min_ || k > k_max_) return 0.0;
  const auto i = static_cast<std::size_t>(k - k_min_);
  return shift_cdf_[i] - (i == 0 ? 0.0 : shift_cdf_[i - 1]);
}

double TeleportSampler::momentum_value(std::size_t m) const {
  const auto mm = static_cast<double>(m), big = static_cast<double>(m_);
  const double centered = m < (m_ + 1) / 2 ? mm : mm - big;
  return 2.0 * kPi * centered / (big * grid_.step());
}

std::vector<double> TeleportSampler::momentum_cdf(long k) const {
  // sum_i |F(i, m)|^2 is the DFT of g(d) = sum_j psi(j) psi*(j-d) C(j+k, j-d+k)
  const auto n = static_cast<long>(n_);
  const bool cyclic = mode_ == ShiftMode::cyclic;
  std::vector<cplx> g(m_, cplx(0.0, 0.0));
  for (long d = cyclic ? 0 : -(n - 1); d <= n - 1; ++d) {
    cplx acc(0.0, 0.0);
    for (long j = 0; j < n; ++j) {
      long j2 = j - d, l = j + k, l2 = j - d + k;
      if (cyclic) {
        j2 = ((j2 % n) + n) % n;
        l %= n;
        l2 = ((l2 % n) + n) % n;
      } else if (j2 < 0 || j2 >= n || l < 0 || l >= n || l2 < 0 || l2 >= n) {
        continue;
      }
      acc += psi_[j] * std::conj(psi_[j2]) * reduced_(l, l2);
    }
    g[static_cast<std::size_t>(((d % static_cast<long>(m_)) + static_cast<long>(m_)) % static_cast<long>(m_))] = acc;
  }
  Eigen::FFT<double> fft;
  std::vector<cplx> spectrum;
  fft.fwd(spectrum, g);
  std::vector<double> w(m_);
  for (std::size_t m = 0; m < m_; ++m) w[m] = spectrum[m].real();
  return to_cdf(w);
}

TeleportSampler::Draw TeleportSampler::draw(std::uint64_t seed, const std::vector<double>* cached_cdf) const {
  std::uint64_t state = seed;
  const double u1 = canonical(state);
  const double u2 = canonical(state);
  const long k = k_min_ + static_cast<long>(sample(shift_cdf_, u1));
  if (cached_cdf) return {k, sample(*cached_cdf, u2)};
  return {k, sample(momentum_cdf(k), u2)};
}

WaveFunction1D TeleportSampler::collapse(long k, std::size_t m, double& lost) const {
  const auto n = static_cast<long>(n_);
  const double v = momentum_value(m);
  Eigen::VectorXcd phase(n);
  for (long j = 0; j < n; ++j) {
    const double a = -v * grid_.point(static_cast<std::size_t>(j));
    phase[j] = psi_[j] * cplx(std::cos(a), std::sin(a));
  }
  WaveFunction1D phi{grid_, Eigen::VectorXcd::Zero(n)};
  for (long i = 0; i < n; ++i) {
    cplx acc(0.0, 0.0);
    for (long j = 0; j < n; ++j) {
      long l = j + k;
      if (mode_ == ShiftMode::cyclic) l %= n;
      else if (l < 0 || l >= n) continue;
      acc += resource_(i, l) * phase[j];
    }
    phi.amplitudes[i] = acc;
  }
  const double before = phi.amplitudes.squaredNorm();
  if (!(before > 0.0)) throw NumericalError("teleport: sampled outcome has zero amplitude");
  auto out = correct(phi, k, v, mode_);
  lost = 1.0 - out.amplitudes.squaredNorm() / before;
  return out.normalized();
}

ShotResult TeleportSampler::shot(std::uint64_t seed) const {
  const auto d = draw(seed, nullptr);
  double lost = 0.0;
  auto out = collapse(d.k, d.m, lost);
  return {static_cast<double>(d.k) * grid_.step(), momentum_value(d.m), d.k, std::move(out), lost};
}

EnsembleResult TeleportSampler::ensemble(std::size_t shots, std::uint64_t seed) const {
  require(shots > 0, "ensemble: need at least one shot");
  std::vector<long> ks(shots);
  std::vector<double> u2(shots);
  for (std::size_t s = 0; s < shots; ++s) {
    std::uint64_t state = seed + s;
    ks[s] = k_min_ + static_cast<long>(sample(shift_cdf_, canonical(state)));
    u2[s] = canonical(state);
  }
  std::vector<long> unique = ks;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<std::vector<double>> cdfs(unique.size());
  const auto nu = static_cast<long>(unique.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < nu; ++i) cdfs[static_cast<std::size_t>(i)] = momentum_cdf(unique[static_cast<std::size_t>(i)]);

  EnsembleResult out{{grid_, {}, 0.0}, std::vector<double>(shots), std::vector<double>(shots), 0.0, seed, shots};
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXcd outputs(n, static_cast<Eigen::Index>(shots));
  std::vector<double> lost(shots, 0.0);
  const auto count = static_cast<long>(shots);
#pragma omp parallel for schedule(dynamic, 16)
  for (long s = 0; s < count; ++s) {
    const auto su = static_cast<std::size_t>(s);
    const auto idx = static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), ks[su]) - unique.begin());
    const std::size_t m = sample(cdfs[idx], u2[su]);
    outputs.col(s) = collapse(ks[su], m, lost[su]).amplitudes;
    out.measured_theta[su] = static_cast<double>(ks[su]) * grid_.step();
    out.measured_p[su] = momentum_value(m);
  }
  out.max_lost_norm = *std::max_element(lost.begin(), lost.end());
  out.rho.matrix = (outputs * outputs.adjoint()) / static_cast<double>(shots);
  return out;
}

ShotResult single_shot(const InputState& input, const WaveFunction2D& resource, std::uint64_t seed, ShiftMode mode) {
  return TeleportSampler(input, resource, mode).shot(seed);
}

std::vector<CalibrationRow> calibrate(const std::vector<double>& ej_over_ec, const NoiseBudget& budget, double j,
                                      std::size_t points) {
  budget.validate();
  for (double e : ej_over_ec) require(std::isfinite(e) && e > 0.0, "calibrate: E_J/E_C must be positive");
  std::vector<CalibrationRow> rows(ej_over_ec.size());
  const auto count = static_cast<long>(rows.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    row.ej_over_ec = ej_over_ec[static_cast<std::size_t>(i)];
    row.fidelity_two = row.fidelity_three = nan;
    try {
      const auto spectrum = input_spectrum(1.0, row.ej_over_ec, j, points, 8);
      row.bound_levels = spectrum.bound_count();
      auto run = [&](const std::vector<cplx>& coeffs, double& f, std::string& err) {
        try {
          const auto input = build_input_state(coeffs, spectrum);
          f = fidelity(input, apply_channel(input, budget));
        } catch (const std::exception& e) {
          err = e.what();
        }
      };
      run(two_term_coefficients(), row.fidelity_two, row.error_two);
      run(three_term_coefficients(), row.fidelity_three, row.error_three);
    } catch (const std::exception& e) {
      row.error_two = row.error_three = e.what();
    }
  }
  return rows;
}

}  // namespace jjepr
