#include "galint/mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "galint/errors.hpp"

namespace galint {

namespace {

// smallest/largest singular value ratio; robust for the small matrices here
double rcond(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
    return sv(sv.size() - 1) / sv(0);
}

Mat checked_hess_vv(const LagrangianSystem& system, const Vec& q, const Vec& v) {
    Mat h = system.hess_vv(q, v);
    if (rcond(h) < system.degeneracy_threshold)
        throw DegenerateHessian(system.label + ": hess_vv numerically singular");
    return h;
}

}  // namespace

void validate_newton(const NewtonConfig& cfg) {
    if (cfg.tolerance < 1e-14)
        throw Error("Newton tolerance must be at least 1e-14");
    if (cfg.max_iter < 1) throw Error("Newton max_iter must be at least 1");
}


Vec momentum(const LagrangianSystem& system, const Vec& q, const Vec& v) {
    return system.grad_v(q, v);
}

Vec velocity_from_momentum(const LagrangianSystem& system, const Vec& q, const Vec& p,
                           const NewtonConfig& cfg) {
    validate_newton(cfg);
    Vec v = Vec::Zero(system.dim);
    double res = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.max_iter; ++it) {
        const Vec r = system.grad_v(q, v) - p;
        res = r.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(res)) break;
        if (res <= cfg.tolerance) return v;
        const Mat h = checked_hess_vv(system, q, v);
        v -= h.partialPivLu().solve(r);
    }
    throw NewtonDivergence(system.label + ": Legendre inversion stalled at residual " +
                           std::to_string(res));
}

double hamiltonian(const LagrangianSystem& system, const Vec& q, const Vec& p,
                   const NewtonConfig& cfg) {
    const Vec v = velocity_from_momentum(system, q, p, cfg);
    return p.dot(v) - system.lagrangian(q, v);
}

Vec euler_lagrange_rhs(const LagrangianSystem& system, const Vec& q, const Vec& v) {
    Vec rhs = system.grad_q(q, v) - system.hess_qv(q, v) * v;
    if (system.has_force()) rhs += system.force(q, v);
    const Mat h = checked_hess_vv(system, q, v);
    return h.partialPivLu().solve(rhs);
}

namespace {

constexpr double kFdStep = 1e-5;

void require_close(const std::string& what, double got, double want, double rel_tol) {
    const double scale = std::max({1.0, std::abs(got), std::abs(want)});
    if (std::abs(got - want) > rel_tol * scale)
        throw Error(what + ": analytic " + std::to_string(got) + " vs finite-difference " +
                    std::to_string(want));
}

}  // namespace

void check_derivatives(const LagrangianSystem& system, double lo, double hi,
                       int npoints, double rel_tol, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    const int n = system.dim;
    for (int pt = 0; pt < npoints; ++pt) {
        Vec q(n), v(n);
        for (int i = 0; i < n; ++i) {
            q[i] = dist(rng);
            v[i] = dist(rng);
        }
        const Vec gq = system.grad_q(q, v);
        const Vec gv = system.grad_v(q, v);
        const Mat hqq = system.hess_qq(q, v);
        const Mat hqv = system.hess_qv(q, v);
        const Mat hvv = system.hess_vv(q, v);
        for (int i = 0; i < n; ++i) {
            Vec qp = q, qm = q, vp = v, vm = v;
            qp[i] += kFdStep;
            qm[i] -= kFdStep;
            vp[i] += kFdStep;
            vm[i] -= kFdStep;
            require_close(system.label + " grad_q[" + std::to_string(i) + "]", gq[i],
                          (system.lagrangian(qp, v) - system.lagrangian(qm, v)) / (2 * kFdStep),
                          rel_tol);
            require_close(system.label + " grad_v[" + std::to_string(i) + "]", gv[i],
                          (system.lagrangian(q, vp) - system.lagrangian(q, vm)) / (2 * kFdStep),
                          rel_tol);
            const Vec dgq = (system.grad_q(qp, v) - system.grad_q(qm, v)) / (2 * kFdStep);
            const Vec dgv_dq = (system.grad_v(qp, v) - system.grad_v(qm, v)) / (2 * kFdStep);
            const Vec dgv_dv = (system.grad_v(q, vp) - system.grad_v(q, vm)) / (2 * kFdStep);
            for (int j = 0; j < n; ++j) {
                require_close(system.label + " hess_qq", hqq(j, i), dgq[j], rel_tol);
                require_close(system.label + " hess_qv", hqv(j, i), dgv_dq[j], rel_tol);
                require_close(system.label + " hess_vv", hvv(j, i), dgv_dv[j], rel_tol);
            }
        }
    }
}

}  // namespace galint
