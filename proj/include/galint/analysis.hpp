#pragma once

#include <string>
#include <utility>
#include <vector>

#include "galint/galerkin.hpp"
#include "galint/systems.hpp"

namespace galint {

// Default fine step of the integrated reference. The degree-4 / gauss:5
// reference converges at order 8, so truncation is negligible here; the
// accumulated per-step roundoff, which grows with the step count, is what
// limits the reference accuracy, and it favors the larger step.
inline constexpr double kDefaultRefStep = 5e-3;

// Phase point at time t under the system's dynamics: the closed-form flow
// when available, otherwise a fine integration with the library's own
// degree-4 / gauss:5 scheme at step t / ceil(t / h_ref).
std::pair<Vec, Vec> reference_solution(const LagrangianSystem& system, const Vec& q0,
                                       const Vec& p0, double t,
                                       double h_ref = kDefaultRefStep);

// Phase points at times t0 + i*delta for i = 0..count, marched with one
// fine trajectory whose mesh contains every requested time.
std::vector<std::pair<Vec, Vec>> reference_path(const LagrangianSystem& system,
                                                const Vec& q0, const Vec& p0, double delta,
                                                int count, double h_ref = kDefaultRefStep);

// Action of the exact boundary value solution from q0 to q1 over [0, h]:
// shoots on the initial momentum, then evaluates the action along the
// solution with composite 5-point Gauss quadrature on 64 subintervals.
// Conservative systems only.
double exact_discrete_lagrangian_oracle(const LagrangianSystem& system, const Vec& q0,
                                        const Vec& q1, double h,
                                        double h_ref = kDefaultRefStep);

// Composite 5-point Gauss quadrature of fn on [a, b] with nsub subintervals.
double composite_gauss5(const std::function<double(double)>& fn, double a, double b,
                        int nsub = 64);

struct OrderFit {
    double slope = 0.0;
    double residual = 0.0;  // RMS deviation of the log-log fit
};

// Least-squares slope of log(error) against log(h). Requires at least
// three rows with positive error.
OrderFit fit_order(const std::vector<std::pair<double, double>>& rows);

struct StudyConfig {
    std::string system_label = "harmonic_oscillator";
    ParamMap params;
    int degree = 2;
    GridKind grid_kind = GridKind::lobatto;
    std::string quadrature = "gauss:2";
    std::vector<double> h_values = {0.2, 0.1, 0.05, 0.025, 0.0125};
    double t_end = 1.0;
    Vec q0;
    Vec p0;
    int dense_samples = 16;
    NewtonConfig newton;
    double h_ref = kDefaultRefStep;
    std::string csv_path;
    std::string svg_path;
};

// Throws on inconsistent configs (h not dividing t_end, bad sizes, ...).
void validate_study(const StudyConfig& cfg, const LagrangianSystem& system);

GalerkinScheme scheme_from_config(const StudyConfig& cfg);

struct MetricColumn {
    std::string name;
    std::vector<double> errors;   // one per h
    std::vector<bool> excluded;   // floor rule, per h
    double slope = 0.0;
    double fit_residual = 0.0;
    double expected_order = 0.0;
    bool fit_ok = false;
    std::string note;
};

struct ConvergenceReport {
    std::string title;
    std::vector<double> h_values;
    std::vector<MetricColumn> metrics;
    std::vector<std::string> notes;
};

// Estimated error floor of a trajectory study cell: accumulated stage
// tolerance plus the reference accuracy. Rows below 100x this are excluded
// from slope fits.
double error_floor(const StudyConfig& cfg, const LagrangianSystem& system, double h);

// Sup over mesh points of the phase-space distance to the reference;
// slope compared against min(2s, u).
ConvergenceReport mesh_error_study(const StudyConfig& cfg);

// Dense-output study. Metric "curve": sup over dense samples of the curve
// state error max(|q - q_ref|, |qdot - v_ref|), slope compared against s.
// Metric "curve_local": position error over the first step only, slope
// compared against min(s, u/2) + 1.
ConvergenceReport curve_error_study(const StudyConfig& cfg);

// Mesh-error study for a forced system. The expected order is the
// conjectured min(2s, u); the notes record the provable bound s and which
// bound the measured slope supports.
ConvergenceReport forced_order_study(const StudyConfig& cfg);

struct EnergyReport {
    std::vector<double> deviations;  // H_i - H_0 per step
    double first_decile_max = 0.0;
    double last_decile_max = 0.0;
};

// Hamiltonian deviation along one trajectory at cfg.h_values.front().
EnergyReport energy_drift_study(const StudyConfig& cfg);

enum class ReportFormat { csv, svg };

void emit_report(const ConvergenceReport& report, ReportFormat format,
                 const std::string& path);
void emit_energy_csv(const EnergyReport& report, const std::string& path);

}  // namespace galint
