#pragma once

#include <utility>
#include <vector>

#include "galint/mechanics.hpp"
#include "galint/polynomials.hpp"
#include "galint/quadrature.hpp"

namespace galint {

// A control grid paired with a quadrature rule, with the cardinal basis and
// its derivative tabulated at the quadrature points:
//   basis_at_nodes(i,j)  = l_j(c_i)
//   dbasis_at_nodes(i,j) = l'_j(c_i)
class GalerkinScheme {
  public:
    GalerkinScheme(ControlGrid grid, Quadrature rule);

    const ControlGrid& grid() const { return grid_; }
    const Quadrature& rule() const { return rule_; }
    int degree() const { return grid_.degree(); }
    const Mat& basis_at_nodes() const { return basis_; }
    const Mat& dbasis_at_nodes() const { return dbasis_; }

  private:
    ControlGrid grid_;
    Quadrature rule_;
    Mat basis_;
    Mat dbasis_;
};

struct StepState {
    Vec q;
    Vec p;
    double t = 0.0;
};

struct StepResult {
    StepState state;
    CurveSegment segment;
    int newton_iterations = 0;
    double residual = 0.0;
    // meaningful only when cfg.certify_minimizer was set and degree >= 2
    bool interior_minimizer = true;
};

// Quadrature approximation of the action of the polynomial through
// node_values (rows = control points) over a step of size h:
//   h sum_i b_i L(q(h c_i), qdot(h c_i)).
double internal_action(const GalerkinScheme& scheme, const LagrangianSystem& system,
                       const Mat& node_values, double h);

// Gradient of internal_action with respect to the node values, same shape
// as node_values.
Mat internal_gradient(const GalerkinScheme& scheme, const LagrangianSystem& system,
                      const Mat& node_values, double h);

// Full second derivative of internal_action, blocked by control point:
// entry ((k,a),(l,b)) at row k*n+a, column l*n+b.
Mat internal_hessian(const GalerkinScheme& scheme, const LagrangianSystem& system,
                     const Mat& node_values, double h);

// Virtual-work rows of the external force: row k = h sum_i b_i l_k(c_i) f_i.
// Zero matrix when the system carries no force.
Mat force_virtual_work(const GalerkinScheme& scheme, const LagrangianSystem& system,
                       const Mat& node_values, double h);

// Solves the interior stationarity equations for the node values between
// the fixed endpoints q0, qs; returns the (s-1) x n interior block. When
// the system carries a force the interior equations include its virtual
// work. Initial guess is the straight line from q0 to qs.
Mat solve_interior(const GalerkinScheme& scheme, const LagrangianSystem& system,
                   const Vec& q0, const Vec& qs, double h, const NewtonConfig& cfg = {});

// internal_action evaluated at (q0, solved interior nodes, qs).
double discrete_lagrangian(const GalerkinScheme& scheme, const LagrangianSystem& system,
                           const Vec& q0, const Vec& qs, double h,
                           const NewtonConfig& cfg = {});

// Boundary derivatives of the discrete Lagrangian at stationary node
// values: (-D1 L, D2 L) = (-row 0, row s) of the internal gradient.
std::pair<Vec, Vec> boundary_momenta(const GalerkinScheme& scheme,
                                     const LagrangianSystem& system,
                                     const Mat& node_values, double h);

// Left/right discrete forces F-+ = h sum_i b_i f_i . dq(h c_i)/dq_{0|s}.
// The boundary sensitivity of the curve includes the chain through the
// interior nodes, computed via the implicit function theorem on the
// interior equations (node_values must solve them).
std::pair<Vec, Vec> discrete_forces(const GalerkinScheme& scheme,
                                    const LagrangianSystem& system,
                                    const Mat& node_values, double h);

// One step of the symplectic map defined by the discrete Lagrangian:
// solves {interior stationarity, p + D1 L = 0} for the free node values,
// then p_out = D2 L. Requires a force-free system. An initial guess for
// the full (s+1) x n node matrix may be supplied.
StepResult step(const GalerkinScheme& scheme, const LagrangianSystem& system,
                const StepState& state, double h, const NewtonConfig& cfg = {},
                const Mat* initial_guess = nullptr);

// One step of the discrete Lagrange-d'Alembert map: interior equations and
// boundary conditions gain the force's virtual-work terms,
//   p + D1 L + F- = 0,   p_out = D2 L + F+.
// Requires a system with a force.
StepResult forced_step(const GalerkinScheme& scheme, const LagrangianSystem& system,
                       const StepState& state, double h, const NewtonConfig& cfg = {},
                       const Mat* initial_guess = nullptr);

// Marches n_steps steps of size h, dispatching on the presence of a force.
// Each step after the first is warm-started from the extrapolated previous
// segment, falling back to the default seed if that guess diverges.
std::vector<StepResult> integrate_trajectory(const GalerkinScheme& scheme,
                                             const LagrangianSystem& system,
                                             const StepState& initial, double h, int n_steps,
                                             const NewtonConfig& cfg = {});

}  // namespace galint
