#include "galint/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "galint/errors.hpp"

namespace galint {

namespace {

const GalerkinScheme& reference_scheme() {
    static const GalerkinScheme scheme(make_grid(4, GridKind::lobatto), gauss_legendre(5));
    return scheme;
}

NewtonConfig reference_newton() {
    NewtonConfig cfg;
    cfg.tolerance = 1e-13;  // stage residuals floor out near 1e-14 |v|
    return cfg;
}

}  // namespace

std::pair<Vec, Vec> reference_solution(const LagrangianSystem& system, const Vec& q0,
                                       const Vec& p0, double t, double h_ref) {
    if (t < 0.0) throw Error("reference_solution: t must be non-negative");
    if (t == 0.0) return {q0, p0};
    if (system.has_exact_flow()) return system.exact_flow(q0, p0, t);
    const int n_steps = static_cast<int>(std::ceil(t / h_ref - 1e-12));
    const double h = t / n_steps;
    const auto traj = integrate_trajectory(reference_scheme(), system, StepState{q0, p0, 0.0},
                                           h, n_steps, reference_newton());
    return {traj.back().state.q, traj.back().state.p};
}

std::vector<std::pair<Vec, Vec>> reference_path(const LagrangianSystem& system, const Vec& q0,
                                                const Vec& p0, double delta, int count,
                                                double h_ref) {
    std::vector<std::pair<Vec, Vec>> out;
    out.reserve(count + 1);
    out.emplace_back(q0, p0);
    if (system.has_exact_flow()) {
        for (int i = 1; i <= count; ++i) out.push_back(system.exact_flow(q0, p0, i * delta));
        return out;
    }
    // one fine march whose mesh contains every multiple of delta
    const int n_sub = std::max(1, static_cast<int>(std::ceil(delta / h_ref - 1e-12)));
    const double h = delta / n_sub;
    const auto traj = integrate_trajectory(reference_scheme(), system, StepState{q0, p0, 0.0},
                                           h, count * n_sub, reference_newton());
    for (int i = 1; i <= count; ++i) {
        const auto& st = traj[i * n_sub - 1].state;
        out.emplace_back(st.q, st.p);
    }
    return out;
}

double composite_gauss5(const std::function<double(double)>& fn, double a, double b, int nsub) {
    static const Quadrature g5 = gauss_legendre(5);
    const double h = (b - a) / nsub;
    double total = 0.0;
    for (int i = 0; i < nsub; ++i) total += integrate(g5, fn, a + i * h, h);
    return total;
}

double exact_discrete_lagrangian_oracle(const LagrangianSystem& system, const Vec& q0,
                                        const Vec& q1, double h, double h_ref) {
    if (system.has_force())
        throw Error("exact_discrete_lagrangian_oracle: conservative systems only");
    const int n = system.dim;

    // shoot on the initial momentum so that q(h) = q1
    Vec p = momentum(system, q0, (q1 - q0) / h);
    const double tol = 1e-12 * std::max(1.0, q1.lpNorm<Eigen::Infinity>());
    bool converged = false;
    for (int it = 0; it < 30; ++it) {
        const Vec qh = reference_solution(system, q0, p, h, h_ref).first;
        const Vec r = qh - q1;
        if (r.lpNorm<Eigen::Infinity>() <= tol) {
            converged = true;
            break;
        }
        Mat J(n, n);
        for (int j = 0; j < n; ++j) {
            const double dp = 1e-6 * std::max(1.0, std::abs(p[j]));
            Vec pp = p, pm = p;
            pp[j] += dp;
            pm[j] -= dp;
            J.col(j) = (reference_solution(system, q0, pp, h, h_ref).first -
                        reference_solution(system, q0, pm, h, h_ref).first) /
                       (2 * dp);
        }
        Eigen::FullPivLU<Mat> lu(J);
        if (!lu.isInvertible())
            throw ShootingDivergence("singular shooting Jacobian");
        p -= lu.solve(r);
        if (!p.allFinite()) throw ShootingDivergence("shooting produced non-finite momentum");
    }
    if (!converged)
        throw ShootingDivergence("boundary value solve did not reach tolerance");

    // action along the solution by composite Gauss-5 on 64 subintervals;
    // the fine mesh is aligned so every quadrature node lies inside one
    // stored segment
    constexpr int kSubintervals = 64;
    const double h_sub = h / kSubintervals;
    const int per = std::max(1, static_cast<int>(std::ceil(h_sub / h_ref - 1e-12)));
    const double h_fine = h_sub / per;
    const std::vector<StepResult> traj =
        integrate_trajectory(reference_scheme(), system, StepState{q0, p, 0.0}, h_fine,
                             kSubintervals * per, reference_newton());
    auto lagrangian_on_path = [&](double t) {
        int idx = std::min(static_cast<int>(t / h_fine), static_cast<int>(traj.size()) - 1);
        // guard roundoff at segment boundaries
        if (t < traj[idx].segment.t_start) idx = std::max(0, idx - 1);
        const SegmentEval ev = traj[idx].segment.eval(t);
        return system.lagrangian(ev.q, ev.qdot);
    };
    return composite_gauss5(lagrangian_on_path, 0.0, h, kSubintervals);
}

OrderFit fit_order(const std::vector<std::pair<double, double>>& rows) {
    std::vector<double> x, y;
    for (const auto& [h, err] : rows) {
        if (err > 0.0) {
            x.push_back(std::log(h));
            y.push_back(std::log(err));
        }
    }
    if (rows.empty() || x.empty())
        throw ZeroError("fit_order: no rows with positive error");
    if (x.size() < 3)
        throw InsufficientData("fit_order: need at least 3 rows with positive error, got " +
                               std::to_string(x.size()));
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    OrderFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - fit.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = y[i] - (fit.slope * x[i] + intercept);
        ss += d * d;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

GalerkinScheme scheme_from_config(const StudyConfig& cfg) {
    return GalerkinScheme(make_grid(cfg.degree, cfg.grid_kind), parse_quadrature(cfg.quadrature));
}

void validate_study(const StudyConfig& cfg, const LagrangianSystem& system) {
    if (cfg.h_values.size() < 1) throw Error("study needs at least one step size");
    for (std::size_t i = 0; i + 1 < cfg.h_values.size(); ++i)
        if (!(cfg.h_values[i] > cfg.h_values[i + 1]))
            throw Error("h_values must be strictly decreasing");
    for (const double h : cfg.h_values) {
        if (!(h > 0)) throw Error("step sizes must be positive");
        const double steps = cfg.t_end / h;
        if (std::abs(steps - std::round(steps)) > 1e-12 * std::max(1.0, steps))
            throw Error("t_end must be an integer multiple of every h (got h = " +
                        std::to_string(h) + ")");
    }
    if (cfg.q0.size() != system.dim || cfg.p0.size() != system.dim)
        throw Error("initial state dimension does not match the system");
}

double error_floor(const StudyConfig& cfg, const LagrangianSystem& system, double h) {
    // a stage residual of size tol moves the step by about h * tol (the
    // stage Jacobian scales like 1/h), so the accumulated solver error
    // over t_end/h steps is of order t_end * tol, plus the accuracy of
    // the reference itself
    (void)h;
    const double ref_floor = system.has_exact_flow() ? 1e-15 : 1e-13;
    return cfg.t_end * cfg.newton.tolerance + ref_floor;
}

namespace {

void fit_metric(MetricColumn& metric, const std::vector<double>& h_values) {
    std::vector<std::pair<double, double>> kept;
    for (std::size_t i = 0; i < h_values.size(); ++i)
        if (!metric.excluded[i]) kept.emplace_back(h_values[i], metric.errors[i]);
    try {
        const OrderFit fit = fit_order(kept);
        metric.slope = fit.slope;
        metric.fit_residual = fit.residual;
        metric.fit_ok = true;
    } catch (const Error& e) {
        metric.fit_ok = false;
        metric.note = e.what();
    }
}

void apply_floor(MetricColumn& metric, const StudyConfig& cfg, const LagrangianSystem& system) {
    metric.excluded.assign(cfg.h_values.size(), false);
    for (std::size_t i = 0; i < cfg.h_values.size(); ++i)
        if (metric.errors[i] < 100.0 * error_floor(cfg, system, cfg.h_values[i]))
            metric.excluded[i] = true;
}

double phase_distance(const StepState& state, const std::pair<Vec, Vec>& ref) {
    const double dq = (state.q - ref.first).squaredNorm();
    const double dp = (state.p - ref.second).squaredNorm();
    return std::sqrt(dq + dp);
}

ConvergenceReport mesh_study_impl(const StudyConfig& cfg, const std::string& metric_name) {
    const LagrangianSystem system = make_system(cfg.system_label, cfg.params);
    validate_study(cfg, system);
    const GalerkinScheme scheme = scheme_from_config(cfg);
    const int s = scheme.degree();
    const int u = scheme.rule().order;

    ConvergenceReport report;
    report.title = cfg.system_label + " " + metric_name + " error, s=" + std::to_string(s) +
                   ", " + scheme.rule().label;
    report.h_values = cfg.h_values;
    MetricColumn metric;
    metric.name = metric_name;
    metric.expected_order = std::min(2 * s, u);

    for (const double h : cfg.h_values) {
        const int n_steps = static_cast<int>(std::round(cfg.t_end / h));
        const auto traj = integrate_trajectory(scheme, system, StepState{cfg.q0, cfg.p0, 0.0},
                                               h, n_steps, cfg.newton);
        const auto refs = reference_path(system, cfg.q0, cfg.p0, h, n_steps, cfg.h_ref);
        double err = 0.0;
        for (int i = 0; i < n_steps; ++i)
            err = std::max(err, phase_distance(traj[i].state, refs[i + 1]));
        metric.errors.push_back(err);
    }
    apply_floor(metric, cfg, system);
    fit_metric(metric, cfg.h_values);
    report.metrics.push_back(std::move(metric));
    return report;
}

}  // namespace

ConvergenceReport mesh_error_study(const StudyConfig& cfg) {
    const LagrangianSystem probe = make_system(cfg.system_label, cfg.params);
    if (probe.has_force())
        throw Error("mesh_error_study: system carries a force, use forced_order_study");
    return mesh_study_impl(cfg, "mesh");
}

ConvergenceReport forced_order_study(const StudyConfig& cfg) {
    const LagrangianSystem probe = make_system(cfg.system_label, cfg.params);
    if (!probe.has_force()) throw Error("forced_order_study: system carries no force");
    ConvergenceReport report = mesh_study_impl(cfg, "forced_mesh");
    MetricColumn& metric = report.metrics.front();
    const int s = cfg.degree;
    if (metric.fit_ok) {
        const double conjectured = metric.expected_order;
        std::string support;
        if (std::abs(metric.slope - conjectured) <= 0.35)
            support = "superconvergence min(2s,u) = " + std::to_string((int)conjectured);
        else if (metric.slope >= s - 0.35)
            support = "provable bound s = " + std::to_string(s);
        else
            support = "neither bound";
        report.notes.push_back("provable order s = " + std::to_string(s) +
                               ", conjectured min(2s,u) = " +
                               std::to_string((int)metric.expected_order) +
                               "; data supports " + support);
    }
    return report;
}

ConvergenceReport curve_error_study(const StudyConfig& cfg) {
    const LagrangianSystem system = make_system(cfg.system_label, cfg.params);
    validate_study(cfg, system);
    if (cfg.dense_samples < 16)
        throw Error("curve_error_study: need at least 16 dense samples per step");
    const GalerkinScheme scheme = scheme_from_config(cfg);
    const int s = scheme.degree();
    const int u = scheme.rule().order;
    const int m = cfg.dense_samples;

    ConvergenceReport report;
    report.title = cfg.system_label + " curve error, s=" + std::to_string(s) + ", " +
                   scheme.rule().label;
    report.h_values = cfg.h_values;
    MetricColumn global;
    global.name = "curve";
    global.expected_order = s;
    MetricColumn local;
    local.name = "curve_local";
    local.expected_order = std::min(static_cast<double>(s), u / 2.0) + 1.0;

    for (const double h : cfg.h_values) {
        const int n_steps = static_cast<int>(std::round(cfg.t_end / h));
        const auto traj = integrate_trajectory(scheme, system, StepState{cfg.q0, cfg.p0, 0.0},
                                               h, n_steps, cfg.newton);
        const double delta = h / m;
        const auto refs = reference_path(system, cfg.q0, cfg.p0, delta, n_steps * m, cfg.h_ref);
        double eg = 0.0, el = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            for (int j = 0; j <= m; ++j) {
                const int ridx = std::min(i * m + j, n_steps * m);
                const double t = ridx * delta;
                const SegmentEval ev = traj[i].segment.eval(t);
                const auto& [qr, pr] = refs[ridx];
                const Vec vr = velocity_from_momentum(system, qr, pr, cfg.newton);
                const double dq = (ev.q - qr).lpNorm<Eigen::Infinity>();
                const double dv = (ev.qdot - vr).lpNorm<Eigen::Infinity>();
                eg = std::max({eg, dq, dv});
                if (i == 0) el = std::max(el, dq);
            }
        }
        global.errors.push_back(eg);
        local.errors.push_back(el);
    }
    apply_floor(global, cfg, system);
    apply_floor(local, cfg, system);
    fit_metric(global, cfg.h_values);
    fit_metric(local, cfg.h_values);
    report.metrics.push_back(std::move(global));
    report.metrics.push_back(std::move(local));
    return report;
}

EnergyReport energy_drift_study(const StudyConfig& cfg) {
    const LagrangianSystem system = make_system(cfg.system_label, cfg.params);
    if (system.has_force())
        throw Error("energy_drift_study: conservative systems only");
    validate_study(cfg, system);
    const GalerkinScheme scheme = scheme_from_config(cfg);
    const double h = cfg.h_values.front();
    const int n_steps = static_cast<int>(std::round(cfg.t_end / h));
    const auto traj = integrate_trajectory(scheme, system, StepState{cfg.q0, cfg.p0, 0.0}, h,
                                           n_steps, cfg.newton);
    EnergyReport report;
    const double h0 = hamiltonian(system, cfg.q0, cfg.p0, cfg.newton);
    report.deviations.reserve(n_steps);
    for (const auto& res : traj)
        report.deviations.push_back(hamiltonian(system, res.state.q, res.state.p, cfg.newton) -
                                    h0);
    const int decile = std::max(1, n_steps / 10);
    for (int i = 0; i < decile; ++i)
        report.first_decile_max = std::max(report.first_decile_max,
                                           std::abs(report.deviations[i]));
    for (int i = n_steps - decile; i < n_steps; ++i)
        report.last_decile_max = std::max(report.last_decile_max,
                                          std::abs(report.deviations[i]));
    return report;
}

}  // namespace galint
