#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "galint/errors.hpp"
#include "galint/mechanics.hpp"
#include "galint/systems.hpp"
#include "test_helpers.hpp"

using namespace galint;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

// degenerate Lagrangian L = q . v, hess_vv = 0 everywhere
LagrangianSystem degenerate_system() {
    LagrangianSystem sys;
    sys.dim = 1;
    sys.label = "degenerate";
    sys.lagrangian = [](const Vec& q, const Vec& v) { return q[0] * v[0]; };
    sys.grad_q = [](const Vec&, const Vec& v) { return v; };
    sys.grad_v = [](const Vec& q, const Vec&) { return q; };
    sys.hess_qq = [](const Vec&, const Vec&) { return Mat::Zero(1, 1).eval(); };
    sys.hess_qv = [](const Vec&, const Vec&) { return Mat::Ones(1, 1).eval(); };
    sys.hess_vv = [](const Vec&, const Vec&) { return Mat::Zero(1, 1).eval(); };
    return sys;
}

}  // namespace

TEST_SUITE("mechanics") {

TEST_CASE("momentum is the velocity gradient of L") {
    const auto ho = make_system("harmonic_oscillator");
    CHECK(momentum(ho, v1(0.3), v1(0.7))[0] == doctest::Approx(0.7).epsilon(1e-14));

    const auto fp = make_system("free_particle", {{"dim", 2}});
    Vec v(2);
    v << 1.0, 2.0;
    const Vec p = momentum(fp, Vec::Zero(2), v);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(2.0));

    const auto pend = make_system("pendulum");
    CHECK(momentum(pend, v1(0.5), v1(-1.2))[0] == doctest::Approx(-1.2).epsilon(1e-14));
}

TEST_CASE("velocity_from_momentum inverts the Legendre transform") {
    const auto ho = make_system("harmonic_oscillator");
    CHECK(velocity_from_momentum(ho, v1(0.1), v1(2.0))[0] == doctest::Approx(2.0).epsilon(1e-12));

    const auto heavy = make_system("free_particle", {{"mass", 3.0}});
    CHECK(velocity_from_momentum(heavy, v1(0.0), v1(6.0))[0] ==
          doctest::Approx(2.0).epsilon(1e-12));

    const auto quartic = make_system("quartic_oscillator");
    CHECK(velocity_from_momentum(quartic, v1(1.0), v1(0.5))[0] ==
          doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(velocity_from_momentum(degenerate_system(), v1(0.0), v1(1.0)),
                    DegenerateHessian);
}

TEST_CASE("nonlinear Legendre transform inverts by iteration") {
    // L = cosh v - q^2/2: p = sinh v, a genuinely nonlinear momentum map
    LagrangianSystem sys;
    sys.dim = 1;
    sys.label = "cosh_kinetic";
    sys.lagrangian = [](const Vec& q, const Vec& v) {
        return std::cosh(v[0]) - 0.5 * q[0] * q[0];
    };
    sys.grad_q = [](const Vec& q, const Vec&) { return (-q).eval(); };
    sys.grad_v = [](const Vec&, const Vec& v) { return Vec::Constant(1, std::sinh(v[0])).eval(); };
    sys.hess_qq = [](const Vec&, const Vec&) { return Mat::Constant(1, 1, -1.0).eval(); };
    sys.hess_qv = [](const Vec&, const Vec&) { return Mat::Zero(1, 1).eval(); };
    sys.hess_vv = [](const Vec&, const Vec& v) {
        return Mat::Constant(1, 1, std::cosh(v[0])).eval();
    };
    CHECK_NOTHROW(check_derivatives(sys, -1.5, 1.5, 40));
    const Vec v = velocity_from_momentum(sys, v1(0.2), v1(std::sinh(1.3)));
    CHECK(std::abs(v[0] - 1.3) < 1e-11);
    // H = p v - L = p asinh p + q^2/2 - cosh(asinh p)
    const double p = 0.75, q = -0.4;
    const double expected = p * std::asinh(p) + 0.5 * q * q - std::cosh(std::asinh(p));
    CHECK(std::abs(hamiltonian(sys, v1(q), v1(p)) - expected) < 1e-12);
}

TEST_CASE("hamiltonian") {
    const auto ho = make_system("harmonic_oscillator");
    CHECK(hamiltonian(ho, v1(0.0), v1(1.0)) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(hamiltonian(ho, v1(1.0), v1(0.0)) == doctest::Approx(0.5).epsilon(1e-13));

    const auto pend = make_system("pendulum");
    CHECK(hamiltonian(pend, v1(0.0), v1(0.0)) == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("euler_lagrange_rhs") {
    const auto ho = make_system("harmonic_oscillator");
    CHECK(euler_lagrange_rhs(ho, v1(0.4), v1(3.3))[0] == doctest::Approx(-0.4).epsilon(1e-13));

    const auto fp = make_system("free_particle", {{"dim", 2}});
    Vec q(2), v(2);
    q << 0.3, -0.4;
    v << 1.0, 2.0;
    CHECK(euler_lagrange_rhs(fp, q, v).lpNorm<Eigen::Infinity>() < 1e-14);

    const auto damped = make_system("damped_oscillator", {{"gamma", 0.1}});
    CHECK(euler_lagrange_rhs(damped, v1(1.0), v1(2.0))[0] ==
          doctest::Approx(-1.2).epsilon(1e-13));

    CHECK_THROWS_AS(euler_lagrange_rhs(degenerate_system(), v1(1.0), v1(1.0)),
                    DegenerateHessian);
}

TEST_CASE("analytic derivatives of every built-in agree with finite differences") {
    for (const auto& label : system_labels()) {
        const auto sys = make_system(label);
        const double lo = (label == "kepler") ? 0.4 : -2.0;
        CHECK_NOTHROW(check_derivatives(sys, lo, 2.0, 100));
    }
    // the validate flag runs the same check at construction
    CHECK_NOTHROW(make_system("pendulum", {}, true));
}

TEST_CASE("Legendre-transform composition identities at random points") {
    std::mt19937 rng(31);
    for (const auto& label : {"harmonic_oscillator", "pendulum", "kepler"}) {
        const auto sys = make_system(label);
        for (int trial = 0; trial < 30; ++trial) {
            const double lo = (sys.label == "kepler") ? 0.4 : -1.5;
            const Vec q = testutil::random_vec(rng, sys.dim, lo, 1.5);
            const Vec v = testutil::random_vec(rng, sys.dim, -1.5, 1.5);
            const Vec p = momentum(sys, q, v);
            // H(q, p) = p.v - L(q, v) through the inverse Legendre map
            CHECK(std::abs(hamiltonian(sys, q, p) - (p.dot(v) - sys.lagrangian(q, v))) < 1e-12);
            const Vec v_back = velocity_from_momentum(sys, q, p);
            CHECK((v_back - v).lpNorm<Eigen::Infinity>() < 1e-10);
        }
    }
}

TEST_CASE("harmonic oscillator dynamics reproduce cos t") {
    const auto ho = make_system("harmonic_oscillator");
    const auto [q, v] = testutil::rk4_flow(ho, v1(1.0), v1(0.0), 1.0, 10000);
    CHECK(std::abs(q[0] - std::cos(1.0)) < 1e-12);
    CHECK(std::abs(v[0] + std::sin(1.0)) < 1e-12);
}

TEST_CASE("built-in exact flows match an independent integration") {
    std::mt19937 rng(37);
    const auto ho = make_system("harmonic_oscillator", {{"stiffness", 4.0}, {"mass", 2.0}});
    const auto damped = make_system("damped_oscillator", {{"gamma", 0.3}});
    for (const auto& sys : {ho, damped}) {
        REQUIRE(sys.has_exact_flow());
        const Vec q0 = testutil::random_vec(rng, 1), p0 = testutil::random_vec(rng, 1);
        const auto [qe, pe] = sys.exact_flow(q0, p0, 1.7);
        const Vec vstart = velocity_from_momentum(sys, q0, p0);
        const auto [qr, vr] = testutil::rk4_flow(sys, q0, vstart, 1.7, 20000);
        CHECK(std::abs(qe[0] - qr[0]) < 1e-11);
        CHECK(std::abs(pe[0] - momentum(sys, qr, vr)[0]) < 1e-11);
    }
    const auto ho1 = make_system("harmonic_oscillator");
    const auto [qq, pq] = ho1.exact_flow(v1(1.0), v1(0.0), std::numbers::pi / 2);
    CHECK(std::abs(qq[0]) < 1e-15);
    CHECK(std::abs(pq[0] + 1.0) < 1e-15);
}

TEST_CASE("registry") {
    CHECK_THROWS_AS(make_system("nonexistent"), UnknownSystem);
    CHECK_THROWS_AS(make_system("pendulum", {{"springiness", 2.0}}), Error);
    CHECK(system_labels().size() >= 7);
    CHECK_FALSE(system_description("kepler").empty());
    // overdamped configuration carries no closed-form flow
    CHECK_FALSE(make_system("damped_oscillator", {{"gamma", 5.0}}).has_exact_flow());
    CHECK(make_system("damped_oscillator").has_force());
}

TEST_CASE("driven oscillator clock coordinate tracks time") {
    // with (q[1], p[1]) = (0, 1) the second coordinate must advance as t
    const auto sys = make_system("driven_oscillator", {{"amplitude", 0.5}, {"omega", 2.0}});
    Vec q(2), v(2);
    q << 1.0, 0.0;
    v << 0.0, 1.0;
    const auto [qr, vr] = testutil::rk4_flow(sys, q, v, 2.0, 20000);
    CHECK(std::abs(qr[1] - 2.0) < 1e-10);
    CHECK(std::abs(vr[1] - 1.0) < 1e-10);
    // driven coordinate obeys x'' = -x + A sin(omega t)
    const auto rhs = euler_lagrange_rhs(sys, qr, vr);
    CHECK(std::abs(rhs[0] - (-qr[0] + 0.5 * std::sin(2.0 * qr[1]))) < 1e-12);
}

}  // TEST_SUITE
