// Command-line front end: convergence studies, quadrature checks, single
// steps, and trajectory integration with CSV/SVG reports.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "galint/analysis.hpp"
#include "galint/errors.hpp"

using namespace galint;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitSlope = 2;

struct StudyOptions {
    std::string system = "harmonic_oscillator";
    std::vector<std::string> params;
    int degree = 2;
    std::string grid = "lobatto";
    std::string quadrature = "gauss:2";
    std::vector<double> h_values = {0.2, 0.1, 0.05, 0.025, 0.0125};
    double t_end = 1.0;
    std::vector<double> q0 = {1.0};
    std::vector<double> p0 = {0.0};
    int dense = 16;
    double newton_tol = 1e-12;
    double slope_tol = 0.25;
    std::string csv;
    std::string svg;
    std::string config_path;
};

std::string trim(const std::string& s) {
    const auto lo = s.find_first_not_of(" \t\r");
    if (lo == std::string::npos) return "";
    const auto hi = s.find_last_not_of(" \t\r");
    return s.substr(lo, hi - lo + 1);
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(trim(item)));
    return out;
}

// plain key = value file; keys mirror the study options, '#' starts a
// comment, system parameters are written as param.<name> = <value>.
// Values given on the command line win over file values.
void apply_config_file(const CLI::App* cmd, StudyOptions& opt) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path);
    if (!in) throw IoFailure("cannot open config file '" + opt.config_path + "'");
    const auto cli_set = [cmd](const std::string& flag) {
        const CLI::Option* o = cmd->get_option_no_throw(flag);
        return o && o->count() > 0;
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(opt.config_path + ":" + std::to_string(lineno) +
                        ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        for (auto& c : key)
            if (c == '-') c = '_';
        if (key.rfind("param.", 0) == 0) {
            opt.params.push_back(key.substr(6) + "=" + value);
        } else if (key == "param") {
            opt.params.push_back(value);
        } else if (key == "system") {
            if (!cli_set("--system")) opt.system = value;
        } else if (key == "degree") {
            if (!cli_set("--degree")) opt.degree = std::stoi(value);
        } else if (key == "grid") {
            if (!cli_set("--grid")) opt.grid = value;
        } else if (key == "quadrature") {
            if (!cli_set("--quadrature")) opt.quadrature = value;
        } else if (key == "h_values") {
            if (!cli_set("--h-values")) opt.h_values = parse_double_list(value);
        } else if (key == "t_end") {
            if (!cli_set("--t-end")) opt.t_end = std::stod(value);
        } else if (key == "q0") {
            if (!cli_set("--q0")) opt.q0 = parse_double_list(value);
        } else if (key == "p0") {
            if (!cli_set("--p0")) opt.p0 = parse_double_list(value);
        } else if (key == "dense") {
            if (!cli_set("--dense")) opt.dense = std::stoi(value);
        } else if (key == "newton_tol") {
            if (!cli_set("--newton-tol")) opt.newton_tol = std::stod(value);
        } else if (key == "slope_tol") {
            if (!cli_set("--slope-tol")) opt.slope_tol = std::stod(value);
        } else if (key == "csv") {
            if (!cli_set("--csv")) opt.csv = value;
        } else if (key == "svg") {
            if (!cli_set("--svg")) opt.svg = value;
        } else {
            throw Error(opt.config_path + ":" + std::to_string(lineno) + ": unknown key '" +
                        key + "'");
        }
    }
}

ParamMap parse_params(const std::vector<std::string>& kv) {
    ParamMap out;
    for (const auto& item : kv) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw Error("--param expects key=value, got '" + item + "'");
        out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
    return out;
}

Vec to_vec(const std::vector<double>& v) {
    Vec out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
    return out;
}

StudyConfig to_config(const StudyOptions& opt) {
    StudyConfig cfg;
    cfg.system_label = opt.system;
    cfg.params = parse_params(opt.params);
    cfg.degree = opt.degree;
    cfg.grid_kind = parse_grid_kind(opt.grid);
    cfg.quadrature = opt.quadrature;
    cfg.h_values = opt.h_values;
    cfg.t_end = opt.t_end;
    cfg.q0 = to_vec(opt.q0);
    cfg.p0 = to_vec(opt.p0);
    cfg.dense_samples = opt.dense;
    cfg.newton.tolerance = opt.newton_tol;
    cfg.csv_path = opt.csv;
    cfg.svg_path = opt.svg;
    return cfg;
}

void add_common_options(CLI::App* cmd, StudyOptions& opt) {
    std::string labels;
    for (const auto& l : system_labels()) labels += (labels.empty() ? "" : ", ") + l;
    cmd->add_option("--config", opt.config_path, "plain-text key = value configuration file");
    cmd->add_option("--system", opt.system, "system label (" + labels + ")");
    cmd->add_option("--param", opt.params, "system parameter key=value (repeatable)");
    cmd->add_option("--degree", opt.degree, "polynomial degree s");
    cmd->add_option("--grid", opt.grid, "control grid: lobatto|chebyshev-lobatto|equispaced");
    cmd->add_option("--quadrature", opt.quadrature, "quadrature rule gauss:<r> or lobatto:<r>");
    cmd->add_option("--newton-tol", opt.newton_tol, "stage solver residual tolerance");
}

void add_study_options(CLI::App* cmd, StudyOptions& opt) {
    add_common_options(cmd, opt);
    cmd->add_option("--h-values", opt.h_values, "step sizes, decreasing")->delimiter(',');
    cmd->add_option("--t-end", opt.t_end, "integration horizon per run");
    cmd->add_option("--q0", opt.q0, "initial position")->delimiter(',');
    cmd->add_option("--p0", opt.p0, "initial momentum")->delimiter(',');
    cmd->add_option("--csv", opt.csv, "write the report as CSV");
    cmd->add_option("--svg", opt.svg, "write the report as a log-log SVG plot");
    cmd->add_option("--slope-tol", opt.slope_tol, "allowed deviation from the expected slope");
}

void print_report(const ConvergenceReport& rep) {
    std::printf("%s\n", rep.title.c_str());
    std::printf("%12s", "h");
    for (const auto& m : rep.metrics) std::printf("  %14s", m.name.c_str());
    std::printf("\n");
    for (std::size_t i = 0; i < rep.h_values.size(); ++i) {
        std::printf("%12.6g", rep.h_values[i]);
        for (const auto& m : rep.metrics)
            std::printf("  %14.6e%s", m.errors[i], m.excluded[i] ? "*" : " ");
        std::printf("\n");
    }
    for (const auto& m : rep.metrics) {
        if (m.fit_ok)
            std::printf("slope %-12s = %7.4f (expected %g, fit residual %.2g)\n",
                        m.name.c_str(), m.slope, m.expected_order, m.fit_residual);
        else
            std::printf("slope %-12s = n/a (%s)\n", m.name.c_str(), m.note.c_str());
    }
    bool excluded = false;
    for (const auto& m : rep.metrics)
        for (const bool e : m.excluded) excluded |= e;
    if (excluded) std::printf("(* = below the error floor, excluded from the fit)\n");
    for (const auto& note : rep.notes) std::printf("note: %s\n", note.c_str());
}

void emit_outputs(const ConvergenceReport& rep, const StudyOptions& opt) {
    if (!opt.csv.empty()) emit_report(rep, ReportFormat::csv, opt.csv);
    if (!opt.svg.empty()) emit_report(rep, ReportFormat::svg, opt.svg);
}

int slope_status(const ConvergenceReport& rep, double tol) {
    for (const auto& m : rep.metrics) {
        if (!m.fit_ok) return kExitSlope;
        if (std::abs(m.slope - m.expected_order) > tol) return kExitSlope;
    }
    return kExitOk;
}

int run_order_study(const StudyOptions& opt) {
    const ConvergenceReport rep = mesh_error_study(to_config(opt));
    print_report(rep);
    emit_outputs(rep, opt);
    return slope_status(rep, opt.slope_tol);
}

int run_curve_study(const StudyOptions& opt) {
    const ConvergenceReport rep = curve_error_study(to_config(opt));
    print_report(rep);
    emit_outputs(rep, opt);
    return slope_status(rep, opt.slope_tol);
}

int run_forced_study(const StudyOptions& opt) {
    const ConvergenceReport rep = forced_order_study(to_config(opt));
    print_report(rep);
    emit_outputs(rep, opt);
    // the proven bound is order s; superconvergence is reported above
    const MetricColumn& m = rep.metrics.front();
    if (!m.fit_ok || m.slope < opt.degree - opt.slope_tol) return kExitSlope;
    return kExitOk;
}

int run_energy_study(const StudyOptions& opt, double h, int steps) {
    StudyOptions local = opt;
    local.h_values = {h};
    StudyConfig cfg = to_config(local);
    cfg.t_end = h * steps;
    const EnergyReport rep = energy_drift_study(cfg);
    std::printf("energy drift over %d steps at h = %g\n", steps, h);
    std::printf("first-decile max |dH| = %.6e\n", rep.first_decile_max);
    std::printf("last-decile  max |dH| = %.6e\n", rep.last_decile_max);
    if (!opt.csv.empty()) emit_energy_csv(rep, opt.csv);
    const bool ok = rep.last_decile_max <= 2.0 * rep.first_decile_max + 1e-12;
    std::printf("secular drift: %s\n", ok ? "none detected" : "detected");
    return ok ? kExitOk : kExitSlope;
}

int run_quadrature_check(const std::string& spec) {
    int status = kExitOk;
    const auto check = [&status](const Quadrature& rule) {
        try {
            const int measured = verify_order(rule);
            std::printf("%-12s declared %2d  verified %2d\n", rule.label.c_str(), rule.order,
                        measured);
        } catch (const OrderMismatch& e) {
            std::printf("%-12s MISMATCH: %s\n", rule.label.c_str(), e.what());
            status = kExitSlope;
        }
    };
    if (!spec.empty()) {
        check(parse_quadrature(spec));
    } else {
        for (int r = 1; r <= kMaxRulePoints; ++r) check(gauss_legendre(r));
        for (int r = 2; r <= kMaxRulePoints; ++r) check(gauss_lobatto(r));
    }
    return status;
}

int run_step_command(const StudyOptions& opt, double h) {
    const LagrangianSystem system = make_system(opt.system, parse_params(opt.params));
    const GalerkinScheme scheme(make_grid(opt.degree, parse_grid_kind(opt.grid)),
                                parse_quadrature(opt.quadrature));
    NewtonConfig newton;
    newton.tolerance = opt.newton_tol;
    const StepState state{to_vec(opt.q0), to_vec(opt.p0), 0.0};
    const StepResult res = system.has_force()
                               ? forced_step(scheme, system, state, h, newton)
                               : step(scheme, system, state, h, newton);
    std::printf("t = %g\n", res.state.t);
    std::printf("q =");
    for (int i = 0; i < res.state.q.size(); ++i) std::printf(" %.16g", res.state.q[i]);
    std::printf("\np =");
    for (int i = 0; i < res.state.p.size(); ++i) std::printf(" %.16g", res.state.p[i]);
    std::printf("\nH = %.16g\n", hamiltonian(system, res.state.q, res.state.p, newton));
    std::printf("newton iterations = %d, residual = %.3e\n", res.newton_iterations,
                res.residual);
    return kExitOk;
}

int run_integrate(const StudyOptions& opt, double h, int steps, int dense,
                  const std::string& csv) {
    const LagrangianSystem system = make_system(opt.system, parse_params(opt.params));
    const GalerkinScheme scheme(make_grid(opt.degree, parse_grid_kind(opt.grid)),
                                parse_quadrature(opt.quadrature));
    NewtonConfig newton;
    newton.tolerance = opt.newton_tol;
    const StepState initial{to_vec(opt.q0), to_vec(opt.p0), 0.0};
    const auto traj = integrate_trajectory(scheme, system, initial, h, steps, newton);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!csv.empty()) {
        file.open(csv);
        if (!file) throw IoFailure("cannot open '" + csv + "' for writing");
        out = &file;
    }
    const int n = system.dim;
    *out << "t";
    for (int i = 0; i < n; ++i) *out << ",q" << i;
    for (int i = 0; i < n; ++i) *out << ",p" << i;
    *out << ",H\n";
    const auto write_row = [&](double t, const Vec& q, const Vec& p) {
        *out << std::setprecision(16) << t;
        for (int i = 0; i < n; ++i) *out << "," << q[i];
        for (int i = 0; i < n; ++i) *out << "," << p[i];
        *out << "," << (p.dot(velocity_from_momentum(system, q, p, newton)) -
                        system.lagrangian(q, velocity_from_momentum(system, q, p, newton)))
             << "\n";
    };
    write_row(0.0, initial.q, initial.p);
    for (const auto& res : traj) {
        for (int j = 1; j < dense; ++j) {
            const double t = res.segment.t_start + res.segment.h * j / dense;
            const SegmentEval ev = res.segment.eval(t);
            const Vec p_curve = momentum(system, ev.q, ev.qdot);
            write_row(t, ev.q, p_curve);
        }
        write_row(res.state.t, res.state.q, res.state.p);
    }
    if (!csv.empty())
        std::printf("wrote %d steps (%d rows) to %s\n", steps,
                    steps * std::max(1, dense) + 1, csv.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Galerkin variational integrators: symplectic integration of Lagrangian "
                 "systems and empirical convergence-order studies"};
    app.require_subcommand(1);

    StudyOptions order_opt, curve_opt, forced_opt, energy_opt, step_opt, integ_opt;
    curve_opt.slope_tol = 0.35;
    double energy_h = 0.1, step_h = 0.1, integ_h = 0.1;
    int energy_steps = 10000, integ_steps = 100, integ_dense = 0;
    std::string quad_spec, integ_csv;

    CLI::App* order = app.add_subcommand(
        "order-study", "mesh-point convergence order, expected min(2s, u)");
    add_study_options(order, order_opt);

    CLI::App* curve = app.add_subcommand(
        "curve-study", "dense-output convergence: curve order s, first-step order min(s,u/2)+1");
    add_study_options(curve, curve_opt);
    curve->add_option("--dense", curve_opt.dense, "dense samples per step (>= 16)");

    CLI::App* forced = app.add_subcommand(
        "forced-study", "mesh convergence of the forced integrator");
    add_study_options(forced, forced_opt);

    CLI::App* energy = app.add_subcommand(
        "energy-study", "Hamiltonian deviation along one trajectory");
    energy->set_help_flag("--help", "print help");  // frees -h for --h
    add_common_options(energy, energy_opt);
    energy->add_option("--q0", energy_opt.q0, "initial position")->delimiter(',');
    energy->add_option("--p0", energy_opt.p0, "initial momentum")->delimiter(',');
    energy->add_option("--h", energy_h, "step size");
    energy->add_option("--steps", energy_steps, "number of steps");
    energy->add_option("--csv", energy_opt.csv, "write per-step deviations as CSV");

    CLI::App* quad = app.add_subcommand(
        "quadrature-check", "verify declared quadrature orders empirically");
    quad->add_option("--quadrature", quad_spec, "single rule to check (default: all built-ins)");

    CLI::App* single = app.add_subcommand("step", "advance one step and print the new state");
    single->set_help_flag("--help", "print help");
    add_common_options(single, step_opt);
    single->add_option("--q0", step_opt.q0, "initial position")->delimiter(',');
    single->add_option("--p0", step_opt.p0, "initial momentum")->delimiter(',');
    single->add_option("--h", step_h, "step size");

    CLI::App* integ = app.add_subcommand(
        "integrate", "integrate a trajectory and emit t, q, p, H rows as CSV");
    integ->set_help_flag("--help", "print help");
    add_common_options(integ, integ_opt);
    integ->add_option("--q0", integ_opt.q0, "initial position")->delimiter(',');
    integ->add_option("--p0", integ_opt.p0, "initial momentum")->delimiter(',');
    integ->add_option("--h", integ_h, "step size");
    integ->add_option("--steps", integ_steps, "number of steps");
    integ->add_option("--dense", integ_dense, "dense samples per step in the output");
    integ->add_option("--csv", integ_csv, "output path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (order->parsed()) {
            apply_config_file(order, order_opt);
            return run_order_study(order_opt);
        }
        if (curve->parsed()) {
            apply_config_file(curve, curve_opt);
            return run_curve_study(curve_opt);
        }
        if (forced->parsed()) {
            apply_config_file(forced, forced_opt);
            return run_forced_study(forced_opt);
        }
        if (energy->parsed()) {
            apply_config_file(energy, energy_opt);
            return run_energy_study(energy_opt, energy_h, energy_steps);
        }
        if (quad->parsed()) return run_quadrature_check(quad_spec);
        if (single->parsed()) {
            apply_config_file(single, step_opt);
            return run_step_command(step_opt, step_h);
        }
        if (integ->parsed()) {
            apply_config_file(integ, integ_opt);
            return run_integrate(integ_opt, integ_h, integ_steps, integ_dense, integ_csv);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}
