#include "jjepr/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "jjepr/dynamics.hpp"
#include "jjepr/error.hpp"
#include "jjepr/io.hpp"
#include "jjepr/wigner.hpp"

namespace jjepr::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---- configuration -----------------------------------------------------------

json system_defaults() { return {{"e_c", 1.0}, {"e_j", 100.0}, {"zeta", 0.0}, {"j1", 0.0}, {"j2", 0.0}}; }

json policy_defaults() {
  return {{"domain", "adaptive"},
          {"points", 128},
          {"widths", 10.0},
          {"points_per_sigma", 6.0},
          {"grid_cap", kDefaultGridCap}};
}

json state_defaults() {
  return {{"preset", "two_term"}, {"e_c", 1.0}, {"e_j", 100.0}, {"j", 0.0}, {"points", 401}, {"levels", 8}};
}

JunctionSystem system_from(const json& c) {
  return {c.at("e_c").get<double>(), c.at("e_j").get<double>(), c.at("zeta").get<double>(),
          c.at("j1").get<double>(), c.at("j2").get<double>()};
}

GridPolicy policy_from(const json& c) {
  GridPolicy p;
  const auto domain = c.at("domain").get<std::string>();
  if (domain == "adaptive") {
    p.mode = DomainMode::adaptive;
  } else if (domain == "fixed") {
    p.mode = DomainMode::fixed;
  } else {
    throw ConfigError("grid.domain must be \"adaptive\" or \"fixed\", got \"" + domain + "\"");
  }
  p.points = c.at("points").get<std::size_t>();
  p.widths = c.at("widths").get<double>();
  p.points_per_sigma = c.at("points_per_sigma").get<double>();
  p.grid_cap = c.at("grid_cap").get<std::size_t>();
  require(p.points >= 8, "grid.points must be at least 8");
  require(p.widths > 0.0 && p.points_per_sigma > 0.0, "grid.widths and grid.points_per_sigma must be positive");
  return p;
}

std::vector<cplx> preset_coefficients(const std::string& preset) {
  if (preset == "two_term") return two_term_coefficients();
  if (preset == "three_term") return three_term_coefficients();
  throw ConfigError("preset must be \"two_term\" or \"three_term\", got \"" + preset + "\"");
}

NoiseBudget totals_from(const json& c) {
  auto b = NoiseBudget::totals_only(c.at("var_theta_T").get<double>(), c.at("var_p_T").get<double>());
  b.validate();
  return b;
}

ShiftMode shift_mode_from(const std::string& s) {
  if (s == "bounded") return ShiftMode::bounded;
  if (s == "cyclic") return ShiftMode::cyclic;
  throw ConfigError("monte_carlo.shift_mode must be \"bounded\" or \"cyclic\", got \"" + s + "\"");
}

RampShape shape_from(const std::string& s) {
  if (s == "linear") return RampShape::linear;
  if (s == "smoothstep") return RampShape::smoothstep;
  throw ConfigError("schedule.shape must be \"linear\" or \"smoothstep\", got \"" + s + "\"");
}

std::vector<double> doubles(const json& a) { return a.get<std::vector<double>>(); }

bool same_kind(const json& base, const json& value) {
  if (base.is_number_float()) return value.is_number();
  // every integer option is a count or a seed
  if (base.is_number_integer()) {
    if (value.is_number_unsigned()) return true;
    if (value.is_number_integer()) return value.get<long long>() >= 0;
    return value.is_number_float() && value.get<double>() >= 0.0 && std::floor(value.get<double>()) == value.get<double>();
  }
  if (base.is_boolean()) return value.is_boolean();
  if (base.is_string()) return value.is_string();
  if (base.is_array()) {
    if (!value.is_array()) return false;
    for (const auto& v : value)
      if (!v.is_number()) return false;  // every list option is numeric
    return true;
  }
  return false;
}

// ---- output ---------------------------------------------------------------------

struct Context {
  std::string command;
  json config;
  fs::path output;
  std::vector<std::string> written;

  void write(const std::string& name, const std::string& content) {
    write_atomic(output / name, content);
    written.push_back((output / name).string());
  }
  std::string metadata() const { return std::string(kVersion) + " " + command + " " + config.dump(); }
  bool svg() const { return config.at("svg").get<bool>(); }
};

json report_json(const CovarianceReport& r) {
  return {{"var_theta_plus", r.var_theta_plus}, {"var_theta_minus", r.var_theta_minus},
          {"var_p_plus", r.var_p_plus},         {"var_p_minus", r.var_p_minus},
          {"cross_theta", r.cross_theta},       {"s", r.s}};
}

json budget_json(const NoiseBudget& b) {
  return {{"var_theta_epr", b.var_theta_epr}, {"var_theta_meas", b.var_theta_meas},
          {"var_p_epr", b.var_p_epr},         {"var_p_meas", b.var_p_meas},
          {"var_theta_T", b.var_theta_total()}, {"var_p_T", b.var_p_total()}};
}

// ---- subcommands ------------------------------------------------------------------

void cmd_spectrum(Context& ctx) {
  const auto& c = ctx.config;
  const auto sys = system_from(c.at("system"));
  const auto dim = c.at("dimension").get<std::string>();
  const auto count = c.at("count").get<std::size_t>();
  require(count >= 1, "count must be at least 1");
  const auto asym = doubles(c.at("asymptotics").at("ej_m_plus"));
  const auto asym_levels = c.at("asymptotics").at("levels").get<std::size_t>();
  for (double v : asym) require(v > 0.0, "asymptotics.ej_m_plus values must be positive");

  if (dim != "1d" && dim != "2d") throw ConfigError("dimension must be \"1d\" or \"2d\", got \"" + dim + "\"");
  const SpectrumResult spec = [&] {
    if (dim == "1d") return washboard_spectrum(sys.e_c(), sys.e_j(), sys.j1(), count, c.at("points").get<std::size_t>());
    const auto grid = policy_grid(sys, policy_from(c.at("grid")));
    if (!grid) throw ValidationError("spectrum: the fixed domain needs more than grid.grid_cap points");
    Build2DOptions opt;
    opt.grid_cap = c.at("grid").at("grid_cap").get<std::size_t>();
    return eigensolve(build_h_2d_collective(*grid, collective_masses(sys), sys, opt), count);
  }();
  json summary;
  if (dim == "2d") {
    const auto& grid = std::get<Grid2D>(spec.grid);
    const auto bo = bo_ground_state(sys, grid);
    const auto m = collective_masses(sys);
    const double exact = spec.eigenvalues[0];
    summary["bo"] = {{"energy", bo.energy},
                     {"exact_energy", exact},
                     {"relative_gap", std::abs(exact - bo.energy) / std::abs(exact)},
                     {"gap_bound", 5.0 * std::sqrt(m.m_plus / m.m_minus)},
                     {"overlap", std::norm(bo.psi.inner(spec.state_2d(0)))},
                     {"bound", bo.bound}};
    summary["grid"] = {{"points_plus", grid.axis_plus.size()}, {"points_minus", grid.axis_minus.size()}};
  }
  CsvTable levels{{"level", "energy", "bound", "residual", "bo_estimate"}, {}};
  for (std::size_t i = 0; i < spec.size(); ++i) {
    double estimate = std::numeric_limits<double>::quiet_NaN();
    if (dim == "2d" && sys.unbiased()) {
      const auto lv = bo_levels_analytic(sys, 0, static_cast<int>(i));
      estimate = lv.epsilon_n0 + lv.E_n_nu;
    }
    levels.add_row({cell(static_cast<long>(i)), cell(spec.eigenvalues[static_cast<Eigen::Index>(i)]),
                    cell(static_cast<long>(spec.bound[i])), cell(spec.residuals[static_cast<Eigen::Index>(i)]),
                    cell(estimate)});
  }
  ctx.write("spectrum.csv", render_csv(levels, ctx.command, c));

  CsvTable table{{"ej_m_plus", "n", "numeric", "formula_printed", "formula_collective", "residual_printed_over_spacing",
                  "residual_collective_over_spacing", "scaled_residual_printed", "scaled_residual_collective"},
                 {}};
  for (double ejm : asym) {
    const JunctionSystem pend(sys.e_c(), ejm * 8.0 * sys.e_c(), 0.0);
    const auto e = pendulum_levels(pend, asym_levels);
    for (std::size_t n = 0; n < asym_levels; ++n) {
      const auto lv = bo_levels_analytic(pend, static_cast<int>(n), 0);
      const double x = e[static_cast<Eigen::Index>(n)];
      const double rp = std::abs(x - lv.epsilon_n0) / lv.omega0, rc = std::abs(x - lv.epsilon_n0_collective) / lv.omega0;
      table.add_row({cell(ejm), cell(static_cast<long>(n)), cell(x), cell(lv.epsilon_n0), cell(lv.epsilon_n0_collective),
                     cell(rp), cell(rc), cell(rp * ejm), cell(rc * ejm)});
    }
  }
  ctx.write("asymptotics.csv", render_csv(table, ctx.command, c));

  summary["method"] = spec.method;
  summary["bound_count"] = spec.bound_count();
  summary["barrier"] = json_number(spec.barrier);
  summary["boundary_ratio"] = spec.boundary_ratio;
  summary["domain_too_small"] = spec.domain_too_small();
  ctx.write("spectrum.json", render_json(ctx.command, c, summary));
}

void cmd_sweep(Context& ctx) {
  const auto& c = ctx.config;
  const auto sys = system_from(c.at("system"));
  const auto policy = policy_from(c.at("grid"));
  const auto zetas = doubles(c.at("zetas"));
  require(!zetas.empty(), "zetas must not be empty");
  const auto rows = zeta_sweep(sys, zetas, policy);
  CsvTable t{{"zeta", "log10_inv_one_minus_zeta", "s", "s_harmonic", "var_theta_minus", "var_p_plus",
              "cross_theta_norm", "cross_theta_norm_harmonic", "method", "error"},
             {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SvgSeries s_num{"s (numeric)", {}, {}}, s_harm{"s (harmonic)", {}, {}};
  SvgSeries x_num{"cross (numeric)", {}, {}}, x_harm{"cross (harmonic)", {}, {}};
  for (const auto& r : rows) {
    const bool ok = r.report.has_value();
    const double s = ok ? r.report->s : nan;
    t.add_row({cell(r.zeta), cell(r.log10_inv_one_minus_zeta), cell(s), cell(r.s_harmonic),
               cell(ok ? r.report->var_theta_minus : nan), cell(ok ? r.report->var_p_plus : nan),
               cell(ok ? r.cross_theta_norm_numeric : nan), cell(r.cross_theta_norm_harmonic), cell(r.method_flag),
               cell(r.error)});
    const double x = r.log10_inv_one_minus_zeta;
    s_num.x.push_back(x), s_num.y.push_back(s);
    s_harm.x.push_back(x), s_harm.y.push_back(r.s_harmonic);
    x_num.x.push_back(x), x_num.y.push_back(ok ? r.cross_theta_norm_numeric : nan);
    x_harm.x.push_back(x), x_harm.y.push_back(r.cross_theta_norm_harmonic);
  }
  ctx.write("sweep.csv", render_csv(t, ctx.command, c));
  if (ctx.svg()) {
    ctx.write("sweep_s.svg", svg_lines({s_num, s_harm}, "squeezing factor", "log10 1/(1-zeta)", "s", ctx.metadata()));
    ctx.write("sweep_cross.svg", svg_lines({x_num, x_harm}, "normalized <d theta1 d theta2>", "log10 1/(1-zeta)",
                                           "cross", ctx.metadata()));
  }
}

void cmd_ramp(Context& ctx) {
  const auto& c = ctx.config;
  const auto& sc = c.at("schedule");
  const auto sys = system_from(c.at("system"));
  RampSchedule schedule{sc.at("zeta_start").get<double>(), sc.at("zeta_end").get<double>(), 1.0,
                        shape_from(sc.at("shape").get<std::string>())};
  schedule.validate();
  const double slow = slow_frequency(sys.with_zeta(schedule.zeta_end));
  schedule.duration = sc.at("duration_slow_units").get<double>() / slow;
  schedule.validate();
  const auto ladder = doubles(c.at("ladder_slow_units"));
  for (double d : ladder) require(d > 0.0, "ladder_slow_units values must be positive");

  const auto& gc = c.at("grid");
  const auto grid = ramp_grid(sys, schedule, gc.at("points_plus").get<std::size_t>(),
                              gc.at("points_minus").get<std::size_t>(), gc.at("widths").get<double>());
  RampOptions opt;
  opt.trace_stride = c.at("trace_stride").get<std::size_t>();
  opt.instantaneous_overlap = c.at("instantaneous_overlap").get<bool>();
  opt.solver_tolerance = c.at("solver_tolerance").get<double>();
  const double fraction = c.at("dt_fraction").get<double>();
  require(fraction > 0.0 && fraction <= 1.0, "dt_fraction must lie in (0, 1]");
  const double dt = fraction * max_time_step(sys.with_zeta(schedule.zeta_end));

  const auto psi0 = instantaneous_ground_state(sys, schedule.zeta_start, grid);
  const auto r = evolve_ramp(psi0, sys, schedule, dt, opt);

  CsvTable t{{"t", "zeta", "overlap", "norm", "energy", "sensitivity"}, {}};
  SvgSeries ov{"overlap", {}, {}};
  for (const auto& row : r.fidelity_trace) {
    t.add_row({cell(row.t), cell(row.zeta), cell(row.overlap), cell(row.norm), cell(row.energy), cell(row.sensitivity)});
    if (std::isfinite(row.overlap)) ov.x.push_back(row.t), ov.y.push_back(row.overlap);
  }
  ctx.write("ramp.csv", render_csv(t, ctx.command, c));

  json summary{{"final_overlap", r.final_overlap},
               {"steps", r.steps},
               {"dt", r.dt},
               {"duration", schedule.duration},
               {"slow_frequency", slow},
               {"duration_in_inverse_omega0", r.duration_in_inverse_omega0},
               {"max_norm_drift", r.max_norm_drift},
               {"max_solver_iterations", r.max_solver_iterations},
               {"grid", {{"points_plus", grid.axis_plus.size()}, {"points_minus", grid.axis_minus.size()}}}};
  if (!ladder.empty()) {
    std::vector<double> durations;
    for (double d : ladder) durations.push_back(d / slow);
    RampOptions lo = opt;
    lo.trace_stride = 0;
    lo.instantaneous_overlap = false;
    const auto rungs = duration_ladder(psi0, sys, schedule, durations, dt, lo);
    CsvTable lt{{"duration_slow_units", "duration", "final_overlap", "steps", "max_norm_drift"}, {}};
    json lj = json::array();
    for (std::size_t i = 0; i < rungs.size(); ++i) {
      lt.add_row({cell(ladder[i]), cell(durations[i]), cell(rungs[i].final_overlap),
                  cell(static_cast<long>(rungs[i].steps)), cell(rungs[i].max_norm_drift)});
      lj.push_back({{"duration_slow_units", ladder[i]}, {"final_overlap", rungs[i].final_overlap}});
    }
    ctx.write("ladder.csv", render_csv(lt, ctx.command, c));
    summary["ladder"] = lj;
  }
  ctx.write("ramp.json", render_json(ctx.command, c, summary));
  if (ctx.svg() && !ov.x.empty())
    ctx.write("ramp.svg", svg_lines({ov}, "instantaneous ground-state overlap", "t", "overlap", ctx.metadata()));
}

InputState input_from(const json& s) {
  const auto spectrum = input_spectrum(s.at("e_c").get<double>(), s.at("e_j").get<double>(), s.at("j").get<double>(),
                                       s.at("points").get<std::size_t>(), s.at("levels").get<std::size_t>());
  return build_input_state(preset_coefficients(s.at("preset").get<std::string>()), spectrum);
}

WaveFunction2D resource_from(const json& r, const Grid1D& axis) {
  const auto kind = r.at("kind").get<std::string>();
  if (kind == "ideal") return ideal_epr_resource(axis);
  const JunctionSystem sys(r.at("e_c").get<double>(), r.at("e_j").get<double>(), r.at("zeta").get<double>());
  if (kind == "harmonic") return harmonic_epr_resource(sys, axis);
  if (kind == "exact") return lab_resource(ground_state(sys, policy_from(r.at("grid"))).psi, axis);
  throw ConfigError("resource.kind must be \"harmonic\", \"exact\" or \"ideal\", got \"" + kind + "\"");
}

void cmd_teleport(Context& ctx) {
  const auto& c = ctx.config;
  const auto& bc = c.at("budget");
  const auto source = bc.at("source").get<std::string>();
  if (source != "totals" && source != "resource" && source != "matched")
    throw ConfigError("budget.source must be \"totals\", \"resource\" or \"matched\", got \"" + source + "\"");
  const auto shots = c.at("monte_carlo").at("shots").get<std::size_t>();
  const auto mode = shift_mode_from(c.at("monte_carlo").at("shift_mode").get<std::string>());
  const auto seed = c.at("seed").get<std::uint64_t>();
  if (source == "totals") totals_from(bc);
  preset_coefficients(c.at("input").at("preset").get<std::string>());

  const auto input = input_from(c.at("input"));
  std::optional<WaveFunction2D> resource;
  if (source != "totals" || shots > 0) resource = resource_from(c.at("resource"), input.psi.grid);

  NoiseBudget budget;
  json result;
  if (source == "totals") {
    budget = totals_from(bc);
  } else {
    const auto report = covariance(*resource);
    result["resource"] = report_json(report);
    budget = source == "matched"
                 ? matched_budget(report)
                 : noise_budget_from_epr(report, bc.at("meas_var_theta").get<double>(), bc.at("meas_var_p").get<double>());
  }
  budget.validate();
  const auto rho = apply_channel(input, budget);
  rho.validate();
  result["budget"] = budget_json(budget);
  result["fidelity"] = fidelity(input, rho);
  result["clipped_weight"] = rho.clipped_weight;
  result["bound_levels"] = input.basis.bound_count();

  if (shots > 0) {
    const auto ens = TeleportSampler(input, *resource, mode).ensemble(shots, seed);
    result["monte_carlo"] = {{"shots", shots},
                             {"seed", seed},
                             {"fidelity", fidelity(input, ens.rho)},
                             {"trace_distance_to_channel", trace_distance(ens.rho, rho)},
                             {"max_lost_norm", ens.max_lost_norm}};
    CsvTable t{{"shot", "measured_theta", "measured_p"}, {}};
    for (std::size_t i = 0; i < shots; ++i)
      t.add_row({cell(static_cast<long>(i)), cell(ens.measured_theta[i]), cell(ens.measured_p[i])});
    ctx.write("outcomes.csv", render_csv(t, ctx.command, c));
  }
  ctx.write("teleport.json", render_json(ctx.command, c, result));
}

void cmd_wigner(Context& ctx) {
  const auto& c = ctx.config;
  preset_coefficients(c.at("state").at("preset").get<std::string>());
  const bool channel = c.at("channel").at("apply").get<bool>();
  const auto budget = totals_from(c.at("channel"));
  const auto points = c.at("p_axis").at("points").get<std::size_t>();
  const auto sigmas = c.at("p_axis").at("sigmas").get<double>();

  const auto input = input_from(c.at("state"));
  const auto rho_in = DensityMatrix1D::pure(input.psi);
  const auto rho = channel ? apply_channel(input, budget) : rho_in;
  const auto axis = default_p_axis(rho, points, sigmas);
  const auto w = wigner_of_density(rho, axis);

  const double marginal_error = (w.theta_marginal() - rho.matrix.diagonal().real()).cwiseAbs().maxCoeff();
  double negative_volume = 0.0;
  const Eigen::VectorXd pw = w.p_weights();
  for (Eigen::Index i = 0; i < w.values.rows(); ++i)
    for (Eigen::Index m = 0; m < w.values.cols(); ++m)
      negative_volume += std::min(w.values(i, m), 0.0) * pw[m] * w.theta_axis.step();
  json result{{"min_w", w.values.minCoeff()},
              {"min_w_times_pi", w.values.minCoeff() * kPi},
              {"max_w", w.values.maxCoeff()},
              {"integral", w.integral()},
              {"marginal_error", marginal_error},
              {"negative_volume", negative_volume},
              {"p_axis", {{"min", axis.min()}, {"max", axis.max()}, {"points", axis.size()}}}};
  if (channel) {
    const auto w_in = wigner_of_density(rho_in, axis);
    result["fidelity"] = fidelity(input, rho);
    result["overlap_fidelity"] = wigner_overlap_fidelity(w_in, w);
  } else {
    result["overlap_fidelity"] = wigner_overlap_fidelity(w, w);
  }
  ctx.write("wigner.csv",
            render_matrix_csv(w.theta_axis.points(), axis.points(), w.values, "theta", "p", ctx.command, c));
  ctx.write("wigner.json", render_json(ctx.command, c, result));
  if (ctx.svg())
    ctx.write("wigner.svg", svg_heatmap(w.theta_axis.points(), axis.points(), w.values, "Wigner function", "theta",
                                        "p", ctx.metadata()));
}

void cmd_calibrate(Context& ctx) {
  const auto& c = ctx.config;
  const auto budget = totals_from(c.at("budget"));
  const auto ej = doubles(c.at("ej_over_ec"));
  require(!ej.empty(), "ej_over_ec must not be empty");
  const auto rows = calibrate(ej, budget, c.at("j").get<double>(), c.at("points").get<std::size_t>());
  CsvTable t{{"ej_over_ec", "bound_levels", "fidelity_two", "fidelity_three", "error_two", "error_three"}, {}};
  SvgSeries two{"two-term", {}, {}}, three{"three-term", {}, {}};
  double best_two = -1.0, best_ej = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows) {
    t.add_row({cell(r.ej_over_ec), cell(static_cast<long>(r.bound_levels)), cell(r.fidelity_two),
               cell(r.fidelity_three), cell(r.error_two), cell(r.error_three)});
    two.x.push_back(r.ej_over_ec), two.y.push_back(r.fidelity_two);
    three.x.push_back(r.ej_over_ec), three.y.push_back(r.fidelity_three);
    if (std::isfinite(r.fidelity_two) && r.fidelity_two > best_two) best_two = r.fidelity_two, best_ej = r.ej_over_ec;
  }
  ctx.write("calibrate.csv", render_csv(t, ctx.command, c));
  json result{{"budget", budget_json(budget)},
              {"best_fidelity_two", best_two < 0 ? json(nullptr) : json(best_two)},
              {"best_ej_over_ec", json_number(best_ej)}};
  ctx.write("calibrate.json", render_json(ctx.command, c, result));
  if (ctx.svg())
    ctx.write("calibrate.svg", svg_lines({two, three}, "fidelity under the noise budget", "E_J / E_C", "fidelity",
                                         ctx.metadata()));
}

// ---- driver ---------------------------------------------------------------------

struct Command {
  std::string name, description;
  void (*run)(Context&);
};

const std::vector<Command>& registry() {
  static const std::vector<Command> r{
      {"spectrum", "1D washboard or 2D collective eigensolve plus the pendulum asymptotics table", cmd_spectrum},
      {"sweep-zeta", "ground-state squeezing and cross-correlation against zeta", cmd_sweep},
      {"ramp", "Crank-Nicolson zeta ramp with the instantaneous ground-state overlap", cmd_ramp},
      {"teleport", "noise budget, Gaussian channel, fidelity and optional Monte Carlo shots", cmd_teleport},
      {"wigner", "Wigner function of a preset state, optionally after the channel", cmd_wigner},
      {"calibrate", "fidelity of both preset inputs against E_J/E_C", cmd_calibrate},
  };
  return r;
}

const char* kind_of(int code) {
  switch (code) {
    case kConfigError: return "config";
    case kValidationError: return "validation";
    case kNumericalError: return "numerical";
    case kIoError: return "io";
    default: return "internal";
  }
}

int fail(int code, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind_of(code)}, {"exit_code", code}, {"message", message}}}}.dump() << "\n";
  return code;
}

const char* kFooter = R"(Configuration: a JSON object with the subcommand's keys (see README); unknown keys
and type mismatches are rejected. --set key.path=value overrides it (value parsed as JSON,
else taken as a string); flags win over the file.

Workers: --workers, else JJEPR_WORKERS, else the OpenMP default.

Exit codes:
  0  success
  2  configuration error (bad flag, unknown key, wrong type, unreadable config)
  3  validation error (parameters rejected by the model before computing)
  4  numerical failure (solver did not converge, check failed)
  5  I/O failure (output could not be written))";

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : registry()) v.push_back(c.name);
    return v;
  }();
  return names;
}

json default_config(const std::string& command) {
  if (command == "spectrum")
    return {{"system", system_defaults()},
            {"dimension", "1d"},
            {"count", 6},
            {"points", 401},
            {"grid", policy_defaults()},
            {"asymptotics", {{"ej_m_plus", {12.5, 50.0, 200.0}}, {"levels", 2}}},
            {"svg", false}};
  if (command == "sweep-zeta")
    return {{"system", system_defaults()},
            {"zetas", {0.0, 0.3, 0.6, 0.9, 0.97, 0.976, 0.98, 0.99}},
            {"grid", policy_defaults()},
            {"svg", false}};
  if (command == "ramp")
    return {{"system", system_defaults()},
            {"schedule", {{"zeta_start", 0.0}, {"zeta_end", 0.9}, {"duration_slow_units", 200.0}, {"shape", "smoothstep"}}},
            {"grid", {{"points_plus", 48}, {"points_minus", 96}, {"widths", 7.0}}},
            {"dt_fraction", 1.0},
            {"trace_stride", 100},
            {"instantaneous_overlap", false},
            {"solver_tolerance", 1e-12},
            {"ladder_slow_units", json::array()},
            {"svg", false}};
  if (command == "teleport")
    return {{"input", state_defaults()},
            {"budget",
             {{"source", "totals"},
              {"var_theta_T", kReferenceVarTheta},
              {"var_p_T", kReferenceVarP},
              {"meas_var_theta", 0.0},
              {"meas_var_p", 0.0}}},
            {"resource",
             {{"kind", "harmonic"}, {"e_c", 1.0}, {"e_j", 100.0}, {"zeta", 0.9995}, {"grid", policy_defaults()}}},
            {"monte_carlo", {{"shots", 0}, {"shift_mode", "bounded"}}},
            {"seed", 0},
            {"svg", false}};
  if (command == "wigner")
    return {{"state", state_defaults()},
            {"channel", {{"apply", false}, {"var_theta_T", kReferenceVarTheta}, {"var_p_T", kReferenceVarP}}},
            {"p_axis", {{"points", 257}, {"sigmas", 10.0}}},
            {"svg", false}};
  if (command == "calibrate")
    return {{"ej_over_ec", {25.0, 50.0, 100.0, 200.0, 400.0}},
            {"budget", {{"var_theta_T", kReferenceVarTheta}, {"var_p_T", kReferenceVarP}}},
            {"j", 0.0},
            {"points", 401},
            {"svg", false}};
  throw ConfigError("unknown command \"" + command + "\"");
}

void merge_strict(json& base, const json& overrides, const std::string& path) {
  if (!overrides.is_object()) throw ConfigError("config" + (path.empty() ? "" : " at " + path) + " must be an object");
  for (const auto& [key, value] : overrides.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key \"" + here + "\"");
    json& slot = base[key];
    if (slot.is_object()) {
      merge_strict(slot, value, here);
      continue;
    }
    if (!same_kind(slot, value))
      throw ConfigError("config key \"" + here + "\" expects " + std::string(slot.type_name()) + ", got " +
                        value.dump());
    if (slot.is_number_float()) {
      slot = value.get<double>();
    } else if (slot.is_number_integer()) {
      slot = value.is_number_float() ? static_cast<std::uint64_t>(value.get<double>()) : value.get<std::uint64_t>();
    } else if (slot.is_array()) {
      slot = json(value.get<std::vector<double>>());
    } else {
      slot = value;
    }
  }
}

json parse_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key.path=value, got \"" + assignment + "\"");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError("--set: empty component in \"" + key + "\"");
    parts.push_back(part);
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) value = json{{*it, value}};
  return value;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  CLI::App app{"jjepr: EPR squeezing and teleportation with two coupled Josephson junctions"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, output = "jjepr-out";
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int workers = 0;
  bool svg = false;
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : registry()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.description);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--set", sets, "override key.path=value (repeatable)");
    sub->add_option("-o,--output", output, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "random seed (teleport)");
    sub->add_option("--workers", workers, "OpenMP worker count")->check(CLI::PositiveNumber);
    sub->add_flag("--svg", svg, "also write SVG plots");
    sub->footer(kFooter);
    subs.emplace_back(sub, &cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return kOk;
    }
    return fail(kConfigError, e.what());
  }

  const Command* cmd = nullptr;
  CLI::App* sub = nullptr;
  for (const auto& [s, c] : subs)
    if (s->parsed()) sub = s, cmd = c;

  try {
    Context ctx{cmd->name, default_config(cmd->name), output, {}};
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config file " + config_path);
      json file = json::parse(in, nullptr, false);
      if (file.is_discarded()) throw ConfigError("config file " + config_path + " is not valid JSON");
      merge_strict(ctx.config, file);
    }
    for (const auto& s : sets) merge_strict(ctx.config, parse_assignment(s));
    if (sub->count("--seed") > 0) {
      if (!ctx.config.contains("seed")) throw ConfigError(cmd->name + " makes no random draws; --seed does not apply");
      ctx.config["seed"] = seed;
    }
    if (svg) ctx.config["svg"] = true;

    if (sub->count("--workers") == 0) {
      if (const char* env = std::getenv("JJEPR_WORKERS"); env && *env) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (*end != '\0' || n <= 0) throw ConfigError(std::string("JJEPR_WORKERS must be a positive integer, got ") + env);
        workers = static_cast<int>(n);
      }
    }
    if (workers > 0) kernels::set_worker_count(workers);

    cmd->run(ctx);
    std::cout << json{{"command", cmd->name}, {"outputs", ctx.written}}.dump() << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    return fail(kConfigError, e.what());
  } catch (const json::exception& e) {
    return fail(kConfigError, e.what());
  } catch (const ValidationError& e) {
    return fail(kValidationError, e.what());
  } catch (const NumericalError& e) {
    return fail(kNumericalError, e.what());
  } catch (const IoError& e) {
    return fail(kIoError, e.what());
  } catch (const std::exception& e) {
    return fail(kNumericalError, e.what());
  }
}

}  // namespace jjepr::cli
