#pragma once

#include <functional>
#include <string>
#include <vector>

namespace galint {

// Quadrature rule on [0,1]. A rule of order u integrates polynomials of
// degree <= u-1 exactly; the weights sum to one.
struct Quadrature {
    std::vector<double> points;
    std::vector<double> weights;
    int order = 0;
    std::string label;

    int size() const { return static_cast<int>(points.size()); }
};

inline constexpr int kMaxRulePoints = 16;

// r-point Gauss-Legendre rule on [0,1], order 2r. Nodes are computed by
// Newton iteration on the Legendre recurrence, 1 <= r <= kMaxRulePoints.
Quadrature gauss_legendre(int r);

// r-point Gauss-Lobatto rule on [0,1] including both endpoints, order 2r-2,
// 2 <= r <= kMaxRulePoints.
Quadrature gauss_lobatto(int r);

// h * sum_i b_i fn(a + h c_i)
double integrate(const Quadrature& rule, const std::function<double(double)>& fn,
                 double a, double h);

// Measures the exactness degree of the rule empirically and returns the
// resulting order. Probes are degree-k Legendre polynomials shifted to
// [0,1] (unit sup-norm), so the first inexact degree produces an O(1)
// signal regardless of rule size. Throws OrderMismatch if the measured
// order differs from rule.order.
int verify_order(const Quadrature& rule, double tol = 1e-10);

// Lobatto points on [0,1] (used for both quadrature and control grids).
std::vector<double> lobatto_points(int npts);

// Parses "gauss:<r>" or "lobatto:<r>".
Quadrature parse_quadrature(const std::string& spec);

}  // namespace galint
