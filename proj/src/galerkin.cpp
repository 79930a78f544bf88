#include "galint/galerkin.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "galint/errors.hpp"

namespace galint {

GalerkinScheme::GalerkinScheme(ControlGrid grid, Quadrature rule)
    : grid_(std::move(grid)), rule_(std::move(rule)) {
    const int r = rule_.size();
    const int s = grid_.degree();
    basis_.resize(r, s + 1);
    dbasis_.resize(r, s + 1);
    for (int i = 0; i < r; ++i) {
        basis_.row(i) = basis_values(grid_, rule_.points[i]).transpose();
        dbasis_.row(i) = basis_derivatives(grid_, rule_.points[i]).transpose();
    }
}

namespace {

// values of the stage polynomial at one quadrature point
struct StagePoint {
    Vec q;
    Vec v;
};

// Values of the stage polynomial at quadrature point i. Velocities are
// formed from node deviations (the derivative rows annihilate constants,
// so subtracting the base row avoids O(|X|/h) cancellation noise) and the
// sums run in extended precision: the per-step roundoff of these sums is
// what accumulates over the 10^3..10^4 steps of a fine reference march.
StagePoint stage_point(const GalerkinScheme& scheme, const Mat& X, double h, int i) {
    const int n = static_cast<int>(X.cols());
    const int rows = static_cast<int>(X.rows());
    const Mat& B = scheme.basis_at_nodes();
    const Mat& Bd = scheme.dbasis_at_nodes();
    StagePoint sp;
    sp.q.resize(n);
    sp.v.resize(n);
    for (int a = 0; a < n; ++a) {
        long double qa = 0.0L, va = 0.0L;
        const double base = X(0, a);
        for (int j = 0; j < rows; ++j) {
            qa += static_cast<long double>(B(i, j)) * X(j, a);
            va += static_cast<long double>(Bd(i, j)) * (X(j, a) - base);
        }
        sp.q[a] = static_cast<double>(qa);
        sp.v[a] = static_cast<double>(va / h);
    }
    return sp;
}

constexpr double kForceFdStep = 1e-7;

// Jacobian blocks of the force at a stage point by central differences
void force_jacobian(const LagrangianSystem& system, const Vec& q, const Vec& v,
                    Mat& fq, Mat& fv) {
    const int n = system.dim;
    fq.resize(n, n);
    fv.resize(n, n);
    for (int j = 0; j < n; ++j) {
        Vec qp = q, qm = q, vp = v, vm = v;
        const double hq = kForceFdStep * std::max(1.0, std::abs(q[j]));
        const double hv = kForceFdStep * std::max(1.0, std::abs(v[j]));
        qp[j] += hq;
        qm[j] -= hq;
        vp[j] += hv;
        vm[j] -= hv;
        fq.col(j) = (system.force(qp, v) - system.force(qm, v)) / (2 * hq);
        fv.col(j) = (system.force(q, vp) - system.force(q, vm)) / (2 * hv);
    }
}

}  // namespace

double internal_action(const GalerkinScheme& scheme, const LagrangianSystem& system,
                       const Mat& node_values, double h) {
    long double action = 0.0L;
    for (int i = 0; i < scheme.rule().size(); ++i) {
        const StagePoint sp = stage_point(scheme, node_values, h, i);
        action += static_cast<long double>(scheme.rule().weights[i]) *
                  system.lagrangian(sp.q, sp.v);
    }
    return static_cast<double>(h * action);
}

Mat internal_gradient(const GalerkinScheme& scheme, const LagrangianSystem& system,
                      const Mat& node_values, double h) {
    const int s = scheme.degree();
    const int n = system.dim;
    const Mat& B = scheme.basis_at_nodes();
    const Mat& Bd = scheme.dbasis_at_nodes();
    std::vector<long double> acc((s + 1) * n, 0.0L);
    for (int i = 0; i < scheme.rule().size(); ++i) {
        const long double bi = scheme.rule().weights[i];
        const StagePoint sp = stage_point(scheme, node_values, h, i);
        const Vec gq = system.grad_q(sp.q, sp.v);
        const Vec gv = system.grad_v(sp.q, sp.v);
        for (int k = 0; k <= s; ++k) {
            const long double bq = bi * h * B(i, k);
            const long double bv = bi * Bd(i, k);
            for (int a = 0; a < n; ++a) acc[k * n + a] += bq * gq[a] + bv * gv[a];
        }
    }
    Mat g(s + 1, n);
    for (int k = 0; k <= s; ++k)
        for (int a = 0; a < n; ++a) g(k, a) = static_cast<double>(acc[k * n + a]);
    return g;
}

Mat internal_hessian(const GalerkinScheme& scheme, const LagrangianSystem& system,
                     const Mat& node_values, double h) {
    const int s = scheme.degree();
    const int n = system.dim;
    Mat H = Mat::Zero((s + 1) * n, (s + 1) * n);
    const Mat& B = scheme.basis_at_nodes();
    const Mat& Bd = scheme.dbasis_at_nodes();
    for (int i = 0; i < scheme.rule().size(); ++i) {
        const double bi = scheme.rule().weights[i];
        const StagePoint sp = stage_point(scheme, node_values, h, i);
        const Mat hqq = system.hess_qq(sp.q, sp.v);
        const Mat hvq = system.hess_qv(sp.q, sp.v);  // d(grad_v)/dq
        const Mat hvv = system.hess_vv(sp.q, sp.v);
        for (int k = 0; k <= s; ++k) {
            for (int l = 0; l <= s; ++l) {
                Mat block = bi * (h * B(i, k) * B(i, l) * hqq +
                                  B(i, k) * Bd(i, l) * hvq.transpose() +
                                  Bd(i, k) * B(i, l) * hvq +
                                  Bd(i, k) * Bd(i, l) / h * hvv);
                H.block(k * n, l * n, n, n) += block;
            }
        }
    }
    return H;
}

Mat force_virtual_work(const GalerkinScheme& scheme, const LagrangianSystem& system,
                       const Mat& node_values, double h) {
    const int s = scheme.degree();
    const int n = system.dim;
    if (!system.has_force()) return Mat::Zero(s + 1, n);
    const Mat& B = scheme.basis_at_nodes();
    std::vector<long double> acc((s + 1) * n, 0.0L);
    for (int i = 0; i < scheme.rule().size(); ++i) {
        const long double bi = scheme.rule().weights[i];
        const StagePoint sp = stage_point(scheme, node_values, h, i);
        const Vec f = system.force(sp.q, sp.v);
        for (int k = 0; k <= s; ++k) {
            const long double c = bi * h * B(i, k);
            for (int a = 0; a < n; ++a) acc[k * n + a] += c * f[a];
        }
    }
    Mat w(s + 1, n);
    for (int k = 0; k <= s; ++k)
        for (int a = 0; a < n; ++a) w(k, a) = static_cast<double>(acc[k * n + a]);
    return w;
}

namespace {

// Jacobian of the force virtual-work rows with respect to the node values
Mat force_virtual_work_jacobian(const GalerkinScheme& scheme, const LagrangianSystem& system,
                                const Mat& X, double h) {
    const int s = scheme.degree();
    const int n = system.dim;
    Mat J = Mat::Zero((s + 1) * n, (s + 1) * n);
    if (!system.has_force()) return J;
    const Mat& B = scheme.basis_at_nodes();
    const Mat& Bd = scheme.dbasis_at_nodes();
    Mat fq, fv;
    for (int i = 0; i < scheme.rule().size(); ++i) {
        const double bi = scheme.rule().weights[i];
        const StagePoint sp = stage_point(scheme, X, h, i);
        force_jacobian(system, sp.q, sp.v, fq, fv);
        for (int k = 0; k <= s; ++k)
            for (int l = 0; l <= s; ++l)
                J.block(k * n, l * n, n, n) +=
                    bi * B(i, k) * (h * B(i, l) * fq + Bd(i, l) * fv);
    }
    return J;
}

// Shared description of a stage system: the unknowns are node rows
// [var_lo, var_hi], the equations are rows [eq_lo, eq_hi] of the (possibly
// forced) gradient, with the incoming momentum added to the first equation
// row when present.
struct StageProblem {
    const GalerkinScheme& scheme;
    const LagrangianSystem& system;
    double h;
    bool forced;
    int eq_lo, eq_hi;      // equation rows of G (+W)
    int var_lo, var_hi;    // free node rows
    const Vec* momentum_in;  // added to equation row eq_lo when non-null
};

Vec stage_residual(const StageProblem& prob, const Mat& X) {
    const int n = prob.system.dim;
    Mat G = internal_gradient(prob.scheme, prob.system, X, prob.h);
    if (prob.forced) G += force_virtual_work(prob.scheme, prob.system, X, prob.h);
    const int m = prob.eq_hi - prob.eq_lo + 1;
    Vec r(m * n);
    for (int k = 0; k < m; ++k) r.segment(k * n, n) = G.row(prob.eq_lo + k).transpose();
    if (prob.momentum_in) r.head(n) += *prob.momentum_in;
    return r;
}

Mat stage_jacobian(const StageProblem& prob, const Mat& X) {
    const int n = prob.system.dim;
    Mat H = internal_hessian(prob.scheme, prob.system, X, prob.h);
    if (prob.forced) H += force_virtual_work_jacobian(prob.scheme, prob.system, X, prob.h);
    const int m = prob.eq_hi - prob.eq_lo + 1;
    const int v = prob.var_hi - prob.var_lo + 1;
    return H.block(prob.eq_lo * n, prob.var_lo * n, m * n, v * n);
}

// Newton with a halving line search (engaged only after the full step
// raises the residual norm). X is updated in place; returns iterations.
// Converges on the residual tolerance, or on stagnation at the floating
// point resolution of the iterate, where the residual cannot drop further
// because the required correction is below one ulp of the node values.
int stage_newton(const StageProblem& prob, Mat& X, const NewtonConfig& cfg,
                 double& final_residual) {
    const int n = prob.system.dim;
    const int m = prob.var_hi - prob.var_lo + 1;
    Vec r = stage_residual(prob, X);
    double rnorm = r.lpNorm<Eigen::Infinity>();
    for (int it = 1; it <= cfg.max_iter; ++it) {
        if (!std::isfinite(rnorm))
            throw NewtonDivergence("stage solve produced non-finite residual");
        if (rnorm <= cfg.tolerance) {
            final_residual = rnorm;
            return it - 1;
        }
        const Mat J = stage_jacobian(prob, X);
        Eigen::FullPivLU<Mat> lu(J);
        if (!lu.isInvertible())
            throw DegenerateHessian("stage Jacobian numerically singular (h too large?)");
        const Vec dx = lu.solve(-r);
        const double x_scale =
            X.middleRows(prob.var_lo, m).cwiseAbs().maxCoeff();
        if (dx.lpNorm<Eigen::Infinity>() <=
            4.0 * std::numeric_limits<double>::epsilon() * (1.0 + x_scale)) {
            // stalled at the resolution of the iterate; apply the last
            // correction anyway and report the residual there
            for (int k = 0; k < m; ++k)
                X.row(prob.var_lo + k) += dx.segment(k * n, n).transpose();
            final_residual = stage_residual(prob, X).lpNorm<Eigen::Infinity>();
            return it;
        }
        double lambda = 1.0;
        Mat Xtrial = X;
        Vec rtrial;
        double rtrial_norm = std::numeric_limits<double>::infinity();
        for (int halve = 0; halve <= (cfg.line_search ? 14 : 0); ++halve) {
            for (int k = 0; k < m; ++k)
                Xtrial.row(prob.var_lo + k) =
                    X.row(prob.var_lo + k) + lambda * dx.segment(k * n, n).transpose();
            rtrial = stage_residual(prob, Xtrial);
            rtrial_norm = rtrial.lpNorm<Eigen::Infinity>();
            if (!cfg.line_search || rtrial_norm < rnorm || rtrial_norm <= cfg.tolerance) break;
            lambda *= 0.5;
        }
        if (cfg.line_search && rtrial_norm >= rnorm && rtrial_norm > cfg.tolerance)
            throw NewtonDivergence("stage line search failed to reduce the residual");
        X = Xtrial;
        r = rtrial;
        rnorm = rtrial_norm;
    }
    throw NewtonDivergence("stage solve did not converge: residual " + std::to_string(rnorm) +
                           " after " + std::to_string(cfg.max_iter) + " iterations");
}

Mat straight_line_nodes(const ControlGrid& grid, const Vec& q0, const Vec& qs) {
    const int s = grid.degree();
    Mat X(s + 1, q0.size());
    for (int j = 0; j <= s; ++j) {
        const double d = grid.nodes()[j];
        X.row(j) = ((1.0 - d) * q0 + d * qs).transpose();
    }
    return X;
}

bool interior_block_positive_definite(const GalerkinScheme& scheme,
                                      const LagrangianSystem& system, const Mat& X, double h) {
    const int s = scheme.degree();
    const int n = system.dim;
    if (s < 2) return true;
    const Mat H = internal_hessian(scheme, system, X, h);
    const Mat interior = H.block(n, n, (s - 1) * n, (s - 1) * n);
    Eigen::SelfAdjointEigenSolver<Mat> es(interior);
    return es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

Mat solve_interior(const GalerkinScheme& scheme, const LagrangianSystem& system,
                   const Vec& q0, const Vec& qs, double h, const NewtonConfig& cfg) {
    validate_newton(cfg);
    const int s = scheme.degree();
    const int n = system.dim;
    if (s < 2) return Mat(0, n);
    Mat X = straight_line_nodes(scheme.grid(), q0, qs);
    StageProblem prob{scheme, system, h, system.has_force(), 1, s - 1, 1, s - 1, nullptr};
    double residual = 0.0;
    stage_newton(prob, X, cfg, residual);
    return X.middleRows(1, s - 1);
}

double discrete_lagrangian(const GalerkinScheme& scheme, const LagrangianSystem& system,
                           const Vec& q0, const Vec& qs, double h, const NewtonConfig& cfg) {
    const int s = scheme.degree();
    Mat X = straight_line_nodes(scheme.grid(), q0, qs);
    if (s >= 2) X.middleRows(1, s - 1) = solve_interior(scheme, system, q0, qs, h, cfg);
    return internal_action(scheme, system, X, h);
}

std::pair<Vec, Vec> boundary_momenta(const GalerkinScheme& scheme,
                                     const LagrangianSystem& system,
                                     const Mat& node_values, double h) {
    const Mat g = internal_gradient(scheme, system, node_values, h);
    return {(-g.row(0)).transpose(), g.row(scheme.degree()).transpose()};
}

std::pair<Vec, Vec> discrete_forces(const GalerkinScheme& scheme,
                                    const LagrangianSystem& system,
                                    const Mat& node_values, double h) {
    const int s = scheme.degree();
    const int n = system.dim;
    if (!system.has_force()) return {Vec::Zero(n), Vec::Zero(n)};
    const Mat& B = scheme.basis_at_nodes();

    // boundary sensitivities of the interior nodes: dX_int/dq0 and
    // dX_int/dqs from the implicit function theorem on the interior rows
    Mat S0 = Mat::Zero((s - 1 > 0 ? s - 1 : 0) * n, n);
    Mat Ss = S0;
    if (s >= 2) {
        Mat J = internal_hessian(scheme, system, node_values, h) +
                force_virtual_work_jacobian(scheme, system, node_values, h);
        const Mat Jint = J.block(n, n, (s - 1) * n, (s - 1) * n);
        const Mat J0 = J.block(n, 0, (s - 1) * n, n);
        const Mat Js = J.block(n, s * n, (s - 1) * n, n);
        Eigen::FullPivLU<Mat> lu(Jint);
        if (!lu.isInvertible())
            throw DegenerateHessian("interior Jacobian singular in discrete_forces");
        S0 = lu.solve(-J0);
        Ss = lu.solve(-Js);
    }

    Vec fm = Vec::Zero(n), fp = Vec::Zero(n);
    for (int i = 0; i < scheme.rule().size(); ++i) {
        const double bi = scheme.rule().weights[i];
        const StagePoint sp = stage_point(scheme, node_values, h, i);
        const Vec f = system.force(sp.q, sp.v);
        fm += h * bi * B(i, 0) * f;
        fp += h * bi * B(i, s) * f;
        for (int k = 1; k <= s - 1; ++k) {
            // chain through interior node k: (dX_k/dq)^T f
            fm += h * bi * B(i, k) * S0.block((k - 1) * n, 0, n, n).transpose() * f;
            fp += h * bi * B(i, k) * Ss.block((k - 1) * n, 0, n, n).transpose() * f;
        }
    }
    return {fm, fp};
}

namespace {

StepResult run_step(const GalerkinScheme& scheme, const LagrangianSystem& system,
                    const StepState& state, double h, const NewtonConfig& cfg,
                    const Mat* initial_guess, bool forced) {
    if (!(h > 0.0)) throw Error("step size must be positive");
    validate_newton(cfg);
    if (!state.q.allFinite() || !state.p.allFinite())
        throw Error("step state carries non-finite entries");
    const int s = scheme.degree();
    const int n = system.dim;
    Mat X;
    if (initial_guess) {
        X = *initial_guess;
        X.row(0) = state.q.transpose();
    } else {
        const Vec v0 = velocity_from_momentum(system, state.q, state.p, cfg);
        X.resize(s + 1, n);
        for (int j = 0; j <= s; ++j)
            X.row(j) = (state.q + h * scheme.grid().nodes()[j] * v0).transpose();
    }
    StageProblem prob{scheme, system, h, forced, 0, s - 1, 1, s, &state.p};
    StepResult result;
    result.newton_iterations = stage_newton(prob, X, cfg, result.residual);
    Mat G = internal_gradient(scheme, system, X, h);
    if (forced) G += force_virtual_work(scheme, system, X, h);
    result.state.q = X.row(s).transpose();
    result.state.p = G.row(s).transpose();
    result.state.t = state.t + h;
    result.segment = CurveSegment{scheme.grid(), X, h, state.t};
    if (cfg.certify_minimizer)
        result.interior_minimizer = interior_block_positive_definite(scheme, system, X, h);
    return result;
}

}  // namespace

StepResult step(const GalerkinScheme& scheme, const LagrangianSystem& system,
                const StepState& state, double h, const NewtonConfig& cfg,
                const Mat* initial_guess) {
    if (system.has_force())
        throw Error("step: system carries a force, use forced_step");
    return run_step(scheme, system, state, h, cfg, initial_guess, false);
}

StepResult forced_step(const GalerkinScheme& scheme, const LagrangianSystem& system,
                       const StepState& state, double h, const NewtonConfig& cfg,
                       const Mat* initial_guess) {
    if (!system.has_force())
        throw Error("forced_step: system carries no force, use step");
    return run_step(scheme, system, state, h, cfg, initial_guess, true);
}

std::vector<StepResult> integrate_trajectory(const GalerkinScheme& scheme,
                                             const LagrangianSystem& system,
                                             const StepState& initial, double h, int n_steps,
                                             const NewtonConfig& cfg) {
    const bool forced = system.has_force();
    const int s = scheme.degree();
    std::vector<StepResult> out;
    out.reserve(n_steps);
    StepState state = initial;
    for (int i = 0; i < n_steps; ++i) {
        state.t = initial.t + i * h;  // avoid accumulation drift
        const StepResult* prev = out.empty() ? nullptr : &out.back();
        StepResult res;
        if (prev) {
            // warm start from the extrapolated previous segment
            Mat guess(s + 1, system.dim);
            for (int j = 0; j <= s; ++j)
                guess.row(j) =
                    prev->segment.eval(state.t + h * scheme.grid().nodes()[j]).q.transpose();
            try {
                res = run_step(scheme, system, state, h, cfg, &guess, forced);
            } catch (const NewtonDivergence&) {
                res = run_step(scheme, system, state, h, cfg, nullptr, forced);
            }
        } else {
            res = run_step(scheme, system, state, h, cfg, nullptr, forced);
        }
        state = res.state;
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace galint
