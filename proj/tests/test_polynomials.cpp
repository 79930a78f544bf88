#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "galint/analysis.hpp"
#include "galint/errors.hpp"
#include "galint/polynomials.hpp"
#include "test_helpers.hpp"

using namespace galint;

TEST_SUITE("polynomials") {

TEST_CASE("make_grid families") {
    for (const GridKind kind :
         {GridKind::lobatto, GridKind::chebyshev_lobatto, GridKind::equispaced}) {
        const ControlGrid g = make_grid(1, kind);
        CHECK(g.nodes() == std::vector<double>{0.0, 1.0});
    }
    const ControlGrid eq2 = make_grid(2, GridKind::equispaced);
    CHECK(eq2.nodes()[1] == doctest::Approx(0.5).epsilon(1e-15));

    const ControlGrid lob3 = make_grid(3, GridKind::lobatto);
    const double r5 = std::sqrt(5.0);
    CHECK(std::abs(lob3.nodes()[1] - (5.0 - r5) / 10.0) < 1e-14);
    CHECK(std::abs(lob3.nodes()[2] - (5.0 + r5) / 10.0) < 1e-14);

    const ControlGrid cheb4 = make_grid(4, GridKind::chebyshev_lobatto);
    CHECK(std::abs(cheb4.nodes()[1] - 0.5 * (1.0 - std::cos(std::numbers::pi / 4))) < 1e-14);
    CHECK(std::abs(cheb4.nodes()[2] - 0.5) < 1e-14);

    CHECK_THROWS_AS(make_grid(0), InvalidDegree);
    CHECK_THROWS_AS(make_grid(kMaxDegree + 1), InvalidDegree);
}

TEST_CASE("grid endpoints and monotonicity hold for every family and degree") {
    for (const GridKind kind :
         {GridKind::lobatto, GridKind::chebyshev_lobatto, GridKind::equispaced}) {
        for (int s = 1; s <= kMaxDegree; ++s) {
            const ControlGrid g = make_grid(s, kind);
            CHECK(g.nodes().front() == 0.0);
            CHECK(g.nodes().back() == 1.0);
            for (int j = 0; j < s; ++j) CHECK(g.nodes()[j] < g.nodes()[j + 1]);
        }
    }
}

TEST_CASE("basis values") {
    const ControlGrid lin = make_grid(1);
    const Vec v = basis_values(lin, 0.25);
    CHECK(v[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(v[1] == doctest::Approx(0.25).epsilon(1e-14));

    const ControlGrid quad = make_grid(2, GridKind::equispaced);
    const Vec w = basis_values(quad, 0.25);
    CHECK(w[0] == doctest::Approx(0.375).epsilon(1e-13));
    CHECK(w[1] == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(w[2] == doctest::Approx(-0.125).epsilon(1e-13));

    // cardinal property at the nodes
    for (int s = 1; s <= 6; ++s) {
        const ControlGrid g = make_grid(s);
        for (int k = 0; k <= s; ++k) {
            const Vec e = basis_values(g, g.nodes()[k]);
            for (int j = 0; j <= s; ++j)
                CHECK(std::abs(e[j] - (j == k ? 1.0 : 0.0)) < 1e-14);
        }
    }
}

TEST_CASE("basis derivatives") {
    const ControlGrid lin = make_grid(1);
    for (const double tau : {0.0, 0.3, 0.5, 1.0}) {
        const Vec d = basis_derivatives(lin, tau);
        CHECK(d[0] == doctest::Approx(-1.0).epsilon(1e-14));
        CHECK(d[1] == doctest::Approx(1.0).epsilon(1e-14));
    }
    const ControlGrid quad = make_grid(2, GridKind::equispaced);
    const Vec d = basis_derivatives(quad, 0.5);
    CHECK(std::abs(d[0] - (-1.0)) < 1e-13);
    CHECK(std::abs(d[1]) < 1e-13);
    CHECK(std::abs(d[2] - 1.0) < 1e-13);
}

TEST_CASE("partition of unity and derivative sum") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (const GridKind kind :
         {GridKind::lobatto, GridKind::chebyshev_lobatto, GridKind::equispaced}) {
        for (int s = 1; s <= 8; ++s) {
            const ControlGrid g = make_grid(s, kind);
            for (int trial = 0; trial < 1000; ++trial) {
                const double tau = dist(rng);
                CHECK(std::abs(basis_values(g, tau).sum() - 1.0) < 1e-13);
                CHECK(std::abs(basis_derivatives(g, tau).sum()) < 1e-11);
            }
        }
    }
}

TEST_CASE("basis_derivatives matches finite differences of basis_values") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(0.05, 0.95);
    for (int s = 1; s <= 6; ++s) {
        const ControlGrid g = make_grid(s);
        for (int trial = 0; trial < 50; ++trial) {
            const double tau = dist(rng);
            const double step = 1e-6;
            const Vec fd = (basis_values(g, tau + step) - basis_values(g, tau - step)) / (2 * step);
            const Vec an = basis_derivatives(g, tau);
            CHECK((fd - an).lpNorm<Eigen::Infinity>() < 1e-7);
        }
    }
}

TEST_CASE("polynomial reproduction up to the grid degree") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0), tdist(0.0, 1.0);
    for (int s = 1; s <= 8; ++s) {
        const ControlGrid g = make_grid(s);
        std::vector<double> c(s + 1);
        for (auto& ci : c) ci = coeff(rng);
        const auto poly = [&c](double t) {
            double acc = 0.0;
            for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) acc = acc * t + c[k];
            return acc;
        };
        const auto dpoly = [&c](double t) {
            double acc = 0.0;
            for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k)
                acc = acc * t + k * c[k];
            return acc;
        };
        const CurveSegment seg = interpolate_function(
            g, [&poly](double t) { return Vec::Constant(1, poly(t)); }, 0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            const double t = tdist(rng);
            const SegmentEval ev = seg.eval(t);
            CHECK(std::abs(ev.q[0] - poly(t)) < 1e-10 * std::max(1.0, std::abs(poly(t))));
            CHECK(std::abs(ev.qdot[0] - dpoly(t)) < 1e-10 * std::max(1.0, std::abs(dpoly(t))));
        }
    }
}

TEST_CASE("segment evaluation") {
    // linear segment: midpoint value and constant slope
    const ControlGrid lin = make_grid(1);
    Mat nodes(2, 2);
    nodes << 1.0, -2.0, 3.0, 4.0;
    const CurveSegment seg{lin, nodes, 0.5, 2.0};
    const SegmentEval mid = seg.eval(2.25);
    CHECK(mid.q[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(mid.q[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mid.qdot[0] == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(mid.qdot[1] == doctest::Approx(12.0).epsilon(1e-14));
    CHECK_FALSE(mid.extrapolated);
    CHECK(seg.eval(2.6).extrapolated);
    CHECK(seg.eval(1.9).extrapolated);

    // constants reproduce with zero slope
    const ControlGrid g3 = make_grid(3);
    const CurveSegment cseg = interpolate_function(
        g3, [](double) { return Vec::Constant(1, 4.2); }, 0.0, 0.7);
    const SegmentEval ev = cseg.eval(0.33);
    CHECK(std::abs(ev.q[0] - 4.2) < 1e-13);
    CHECK(std::abs(ev.qdot[0]) < 1e-12);

    // t^2 sampled on a degree-2 grid evaluates exactly
    const ControlGrid g2 = make_grid(2);
    const CurveSegment qseg = interpolate_function(
        g2, [](double t) { return Vec::Constant(1, t * t); }, 0.0, 1.0);
    for (const double t : {0.1, 0.37, 0.5, 0.99}) {
        const SegmentEval e2 = qseg.eval(t);
        CHECK(std::abs(e2.q[0] - t * t) < 1e-13);
        CHECK(std::abs(e2.qdot[0] - 2 * t) < 1e-12);
    }
}

TEST_CASE("dense evaluation reproduces the node values") {
    std::mt19937 rng(17);
    for (int s = 1; s <= 8; ++s) {
        const ControlGrid g = make_grid(s);
        Mat nodes(s + 1, 2);
        for (int j = 0; j <= s; ++j) nodes.row(j) = testutil::random_vec(rng, 2).transpose();
        const CurveSegment seg{g, nodes, 0.3, 1.7};
        for (int j = 0; j <= s; ++j) {
            const SegmentEval ev = seg.eval(1.7 + 0.3 * g.nodes()[j]);
            CHECK((ev.q - nodes.row(j).transpose()).lpNorm<Eigen::Infinity>() <
                  1e-13 * std::max(1.0, nodes.row(j).lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("interpolate_function samples at the control times") {
    const ControlGrid lin = make_grid(1);
    const CurveSegment seg = interpolate_function(
        lin, [](double t) { return Vec::Constant(1, t); }, 0.0, 0.5);
    CHECK(seg.node_values(0, 0) == doctest::Approx(0.0));
    CHECK(seg.node_values(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("interpolation error of sin scales at rates s+1 and s") {
    // step interval [0.7, 0.7+h]: away from t = 0, where the vanishing odd
    // derivatives of sin would inflate the measured rates
    const std::vector<double> hs = {0.4, 0.2, 0.1, 0.05, 0.025};
    const double t0 = 0.7;
    for (int s = 1; s <= 3; ++s) {
        const ControlGrid g = make_grid(s);
        std::vector<std::pair<double, double>> val_rows, der_rows;
        for (const double h : hs) {
            const CurveSegment seg = interpolate_function(
                g, [](double t) { return Vec::Constant(1, std::sin(t)); }, t0, h);
            double ev = 0.0, ed = 0.0;
            for (int i = 0; i <= 400; ++i) {
                const double t = t0 + h * i / 400.0;
                const SegmentEval e = seg.eval(t);
                ev = std::max(ev, std::abs(e.q[0] - std::sin(t)));
                ed = std::max(ed, std::abs(e.qdot[0] - std::cos(t)));
            }
            val_rows.emplace_back(h, ev);
            der_rows.emplace_back(h, ed);
        }
        CHECK(std::abs(fit_order(val_rows).slope - (s + 1)) < 0.2);
        CHECK(std::abs(fit_order(der_rows).slope - s) < 0.2);
    }
}

TEST_CASE("norm inequalities for curves vanishing at the endpoints") {
    // delta q(t) = t (h - t) (a + b t) on [0, h]. The L1 norms integrate
    // |f| with composite quadrature split at the sign changes of f, so the
    // near-equality cases of the bounds are resolved sharply.
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    const auto integral_abs = [](const std::function<double(double)>& fn, double h,
                                 std::vector<double> roots) {
        roots.push_back(0.0);
        roots.push_back(h);
        std::sort(roots.begin(), roots.end());
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
            const double lo = std::clamp(roots[i], 0.0, h);
            const double hi = std::clamp(roots[i + 1], 0.0, h);
            if (hi > lo)
                total += std::abs(composite_gauss5(fn, lo, hi));
        }
        return total;
    };
    for (int trial = 0; trial < 25; ++trial) {
        const double h = 0.1 + 1.5 * std::uniform_real_distribution<double>(0, 1)(rng);
        const double a = dist(rng), b = dist(rng);
        const auto dq = [=](double t) { return t * (h - t) * (a + b * t); };
        const auto ddq = [=](double t) {
            return (h - 2 * t) * (a + b * t) + t * (h - t) * b;
        };
        double sup = 0.0;
        for (int i = 0; i <= 2000; ++i) sup = std::max(sup, std::abs(dq(h * i / 2000.0)));
        // sign changes: dq vanishes at -a/b, ddq is an explicit quadratic
        std::vector<double> dq_roots;
        if (b != 0.0) dq_roots.push_back(-a / b);
        std::vector<double> ddq_roots;
        const double qa = -3 * b, qb = 2 * (h * b - a), qc = h * a;
        const double disc = qb * qb - 4 * qa * qc;
        if (qa != 0.0 && disc >= 0.0) {
            ddq_roots.push_back((-qb + std::sqrt(disc)) / (2 * qa));
            ddq_roots.push_back((-qb - std::sqrt(disc)) / (2 * qa));
        } else if (qa == 0.0 && qb != 0.0) {
            ddq_roots.push_back(-qc / qb);
        }
        const double l1_dq = integral_abs(dq, h, dq_roots);
        const double l1_ddq = integral_abs(ddq, h, ddq_roots);
        const double l2_dq =
            std::sqrt(composite_gauss5([&](double t) { return dq(t) * dq(t); }, 0, h));
        CHECK(sup <= 0.5 * l1_ddq * (1 + 1e-12));
        CHECK(l1_dq <= 0.5 * h * l1_ddq * (1 + 1e-12));
        CHECK(l1_dq <= std::sqrt(h) * l2_dq * (1 + 1e-12));
    }
}

}  // TEST_SUITE
