#include "galint/polynomials.hpp"

#include <cmath>
#include <numbers>

#include "galint/errors.hpp"
#include "galint/quadrature.hpp"

namespace galint {

GridKind parse_grid_kind(const std::string& name) {
    if (name == "lobatto") return GridKind::lobatto;
    if (name == "chebyshev-lobatto" || name == "chebyshev_lobatto")
        return GridKind::chebyshev_lobatto;
    if (name == "equispaced") return GridKind::equispaced;
    throw Error("unknown grid kind '" + name + "'");
}

std::string to_string(GridKind kind) {
    switch (kind) {
        case GridKind::lobatto: return "lobatto";
        case GridKind::chebyshev_lobatto: return "chebyshev-lobatto";
        case GridKind::equispaced: return "equispaced";
    }
    return "?";
}

ControlGrid::ControlGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2)
        throw InvalidDegree("control grid needs at least two nodes");
    if (nodes_.front() != 0.0 || nodes_.back() != 1.0)
        throw Error("control grid must start at 0 and end at 1 exactly");
    for (std::size_t j = 0; j + 1 < nodes_.size(); ++j)
        if (!(nodes_[j] < nodes_[j + 1]))
            throw Error("control grid nodes must be strictly increasing");

    const std::size_t m = nodes_.size();
    weights_.assign(m, 1.0);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k)
            if (k != j) weights_[j] /= (nodes_[j] - nodes_[k]);
}

ControlGrid make_grid(int s, GridKind kind) {
    if (s < 1)
        throw InvalidDegree("polynomial degree must be at least 1");
    if (s > kMaxDegree)
        throw InvalidDegree("polynomial degree capped at " + std::to_string(kMaxDegree));
    std::vector<double> d(s + 1);
    switch (kind) {
        case GridKind::lobatto:
            if (s == 1) {
                d = {0.0, 1.0};
            } else {
                d = lobatto_points(s + 1);
            }
            break;
        case GridKind::chebyshev_lobatto:
            for (int j = 0; j <= s; ++j)
                d[j] = 0.5 * (1.0 - std::cos(std::numbers::pi * j / s));
            d[0] = 0.0;
            d[s] = 1.0;
            break;
        case GridKind::equispaced:
            for (int j = 0; j <= s; ++j)
                d[j] = static_cast<double>(j) / s;
            break;
    }
    return ControlGrid(std::move(d));
}

namespace {
constexpr double kNodeSnap = 1e-13;
}

Vec basis_values(const ControlGrid& grid, double tau) {
    const auto& d = grid.nodes();
    const auto& w = grid.bary_weights();
    const int m = static_cast<int>(d.size());
    Vec ell = Vec::Zero(m);
    for (int j = 0; j < m; ++j) {
        if (std::abs(tau - d[j]) < kNodeSnap) {
            ell[j] = 1.0;
            return ell;
        }
    }
    double denom = 0.0;
    for (int j = 0; j < m; ++j) {
        ell[j] = w[j] / (tau - d[j]);
        denom += ell[j];
    }
    ell /= denom;
    return ell;
}

Vec basis_derivatives(const ControlGrid& grid, double tau) {
    const auto& d = grid.nodes();
    const auto& w = grid.bary_weights();
    const int m = static_cast<int>(d.size());
    Vec out = Vec::Zero(m);
    for (int j = 0; j < m; ++j) {
        if (std::abs(tau - d[j]) < kNodeSnap) {
            // row j of the differentiation matrix
            double diag = 0.0;
            for (int k = 0; k < m; ++k) {
                if (k == j) continue;
                out[k] = (w[k] / w[j]) / (d[j] - d[k]);
                diag -= out[k];
            }
            out[j] = diag;
            return out;
        }
    }
    // derivative of the second barycentric form off the nodes
    double denom = 0.0, s2 = 0.0;
    Vec t1(m), t2(m);
    for (int j = 0; j < m; ++j) {
        const double dj = tau - d[j];
        t1[j] = w[j] / dj;
        t2[j] = t1[j] / dj;
        denom += t1[j];
        s2 += t2[j];
    }
    for (int j = 0; j < m; ++j)
        out[j] = ((t1[j] / denom) * s2 - t2[j]) / denom;
    return out;
}

SegmentEval CurveSegment::eval(double t) const {
    const double tau = (t - t_start) / h;
    SegmentEval ev;
    ev.extrapolated = (tau < -1e-12 || tau > 1.0 + 1e-12);
    const Vec ell = basis_values(grid, tau);
    const Vec dell = basis_derivatives(grid, tau);
    ev.q = node_values.transpose() * ell;
    // derivative from node deviations; dell annihilates constants, so this
    // avoids cancellation noise of order |q|/h
    const Mat dev = node_values.rowwise() - node_values.row(0);
    ev.qdot = dev.transpose() * dell / h;
    return ev;
}

CurveSegment interpolate_function(const ControlGrid& grid,
                                  const std::function<Vec(double)>& fn,
                                  double t_start, double h) {
    if (!(h > 0.0)) throw Error("interpolate_function: h must be positive");
    const auto& d = grid.nodes();
    const int s = grid.degree();
    Vec first = fn(t_start);
    Mat values(s + 1, first.size());
    values.row(0) = first.transpose();
    for (int j = 1; j <= s; ++j)
        values.row(j) = fn(t_start + h * d[j]).transpose();
    return CurveSegment{grid, std::move(values), h, t_start};
}

}  // namespace galint
