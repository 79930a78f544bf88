#pragma once

#include <functional>
#include <string>
#include <utility>

#include "galint/types.hpp"

namespace galint {

// A Lagrangian L(q, v) on R^n with analytic first and second derivatives.
//
// hess_qv is the Jacobian of grad_v with respect to q, entry (i,j) =
// d^2L / (dv_i dq_j), so the second-order form of the Euler-Lagrange
// equation reads
//
//   hess_vv * a = grad_q + force - hess_qv * v .
//
// force, when present, is the external covector f(q, v) entering the
// Lagrange-d'Alembert principle. exact_flow, when present, maps an initial
// phase point (q, p) to the phase point at time t under the (possibly
// forced) dynamics.
// reciprocal condition number of hess_vv below this raises DegenerateHessian
inline constexpr double kDegeneracyThreshold = 1e-12;

struct LagrangianSystem {
    int dim = 1;
    std::function<double(const Vec&, const Vec&)> lagrangian;
    std::function<Vec(const Vec&, const Vec&)> grad_q;
    std::function<Vec(const Vec&, const Vec&)> grad_v;
    std::function<Mat(const Vec&, const Vec&)> hess_qq;
    std::function<Mat(const Vec&, const Vec&)> hess_qv;
    std::function<Mat(const Vec&, const Vec&)> hess_vv;
    std::function<Vec(const Vec&, const Vec&)> force;
    std::function<std::pair<Vec, Vec>(const Vec&, const Vec&, double)> exact_flow;
    std::string label;
    double degeneracy_threshold = kDegeneracyThreshold;

    bool has_force() const { return static_cast<bool>(force); }
    bool has_exact_flow() const { return static_cast<bool>(exact_flow); }
};

// Legendre transform p = dL/dv(q, v).
Vec momentum(const LagrangianSystem& system, const Vec& q, const Vec& v);

// Inverts the Legendre transform by Newton iteration: returns v with
// |grad_v(q,v) - p| below cfg.tolerance.
Vec velocity_from_momentum(const LagrangianSystem& system, const Vec& q, const Vec& p,
                           const NewtonConfig& cfg = {});

// H(q,p) = p . v - L(q, v) with v recovered from the momentum.
double hamiltonian(const LagrangianSystem& system, const Vec& q, const Vec& p,
                   const NewtonConfig& cfg = {});

// Acceleration of the second-order (forced) Euler-Lagrange equation.
Vec euler_lagrange_rhs(const LagrangianSystem& system, const Vec& q, const Vec& v);

// Validates the NewtonConfig invariants (tolerance >= 1e-14, max_iter >= 1).
void validate_newton(const NewtonConfig& cfg);

// Cross-checks the analytic derivatives against central finite differences
// of the Lagrangian at npoints random points of the box [lo, hi]^dim.
// Throws Error on relative mismatch beyond rel_tol.
void check_derivatives(const LagrangianSystem& system, double lo, double hi,
                       int npoints, double rel_tol = 1e-6, unsigned seed = 1234);

}  // namespace galint
