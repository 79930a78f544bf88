#pragma once

#include <functional>
#include <string>
#include <vector>

#include "galint/types.hpp"

namespace galint {

enum class GridKind { lobatto, chebyshev_lobatto, equispaced };

GridKind parse_grid_kind(const std::string& name);
std::string to_string(GridKind kind);

inline constexpr int kMaxDegree = 12;

// s+1 control points d_0 = 0 < d_1 < ... < d_s = 1 together with the
// barycentric weights of the Lagrange cardinal basis on them.
class ControlGrid {
  public:
    ControlGrid() : ControlGrid(std::vector<double>{0.0, 1.0}) {}
    explicit ControlGrid(std::vector<double> nodes);

    int degree() const { return static_cast<int>(nodes_.size()) - 1; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& bary_weights() const { return weights_; }

  private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

ControlGrid make_grid(int s, GridKind kind = GridKind::lobatto);

// Cardinal values l_j(tau), l_j(d_k) = delta_jk. Evaluated in barycentric
// form; tau within 1e-13 of a node snaps to the exact cardinal vector.
Vec basis_values(const ControlGrid& grid, double tau);

// Cardinal derivatives dl_j/dtau(tau).
Vec basis_derivatives(const ControlGrid& grid, double tau);

struct SegmentEval {
    Vec q;
    Vec qdot;
    bool extrapolated = false;  // t fell outside [t_start, t_start + h]
};

// One step's polynomial curve, parameterized by its values at the control
// points: node_values row j holds q(t_start + h d_j).
struct CurveSegment {
    ControlGrid grid;
    Mat node_values;  // (s+1) x n
    double h = 1.0;
    double t_start = 0.0;

    double t_end() const { return t_start + h; }
    SegmentEval eval(double t) const;
};

inline SegmentEval eval_segment(const CurveSegment& segment, double t) {
    return segment.eval(t);
}

// Samples fn at the control times t_start + h d_j.
CurveSegment interpolate_function(const ControlGrid& grid,
                                  const std::function<Vec(double)>& fn,
                                  double t_start, double h);

}  // namespace galint
