#include "galint/systems.hpp"

#include <cmath>
#include <set>

#include "galint/errors.hpp"

namespace galint {

namespace {

double param(const ParamMap& p, const std::string& key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void reject_unknown(const ParamMap& p, const std::set<std::string>& known,
                    const std::string& label) {
    for (const auto& [key, value] : p)
        if (!known.contains(key))
            throw Error(label + ": unknown parameter '" + key + "'");
}

LagrangianSystem free_particle(const ParamMap& p) {
    reject_unknown(p, {"mass", "dim"}, "free_particle");
    const double m = param(p, "mass", 1.0);
    const int n = static_cast<int>(param(p, "dim", 1.0));
    if (n < 1) throw Error("free_particle: dim must be positive");
    LagrangianSystem sys;
    sys.dim = n;
    sys.label = "free_particle";
    sys.lagrangian = [m](const Vec&, const Vec& v) { return 0.5 * m * v.squaredNorm(); };
    sys.grad_q = [n](const Vec&, const Vec&) { return Vec::Zero(n).eval(); };
    sys.grad_v = [m](const Vec&, const Vec& v) { return (m * v).eval(); };
    sys.hess_qq = [n](const Vec&, const Vec&) { return Mat::Zero(n, n).eval(); };
    sys.hess_qv = [n](const Vec&, const Vec&) { return Mat::Zero(n, n).eval(); };
    sys.hess_vv = [m, n](const Vec&, const Vec&) { return (m * Mat::Identity(n, n)).eval(); };
    sys.exact_flow = [m](const Vec& q, const Vec& p0, double t) {
        return std::make_pair((q + (t / m) * p0).eval(), p0);
    };
    return sys;
}

LagrangianSystem harmonic_oscillator(const ParamMap& p) {
    reject_unknown(p, {"mass", "stiffness"}, "harmonic_oscillator");
    const double m = param(p, "mass", 1.0);
    const double k = param(p, "stiffness", 1.0);
    if (m <= 0 || k <= 0) throw Error("harmonic_oscillator: mass and stiffness must be positive");
    LagrangianSystem sys;
    sys.dim = 1;
    sys.label = "harmonic_oscillator";
    sys.lagrangian = [m, k](const Vec& q, const Vec& v) {
        return 0.5 * (m * v[0] * v[0] - k * q[0] * q[0]);
    };
    sys.grad_q = [k](const Vec& q, const Vec&) { return Vec::Constant(1, -k * q[0]).eval(); };
    sys.grad_v = [m](const Vec&, const Vec& v) { return Vec::Constant(1, m * v[0]).eval(); };
    sys.hess_qq = [k](const Vec&, const Vec&) { return Mat::Constant(1, 1, -k).eval(); };
    sys.hess_qv = [](const Vec&, const Vec&) { return Mat::Zero(1, 1).eval(); };
    sys.hess_vv = [m](const Vec&, const Vec&) { return Mat::Constant(1, 1, m).eval(); };
    const double w = std::sqrt(k / m);
    sys.exact_flow = [m, w](const Vec& q, const Vec& p0, double t) {
        const double c = std::cos(w * t), s = std::sin(w * t);
        Vec qq(1), pp(1);
        qq[0] = q[0] * c + p0[0] / (m * w) * s;
        pp[0] = -m * w * q[0] * s + p0[0] * c;
        return std::make_pair(qq, pp);
    };
    return sys;
}

LagrangianSystem quartic_oscillator(const ParamMap& p) {
    reject_unknown(p, {"mass", "quartic"}, "quartic_oscillator");
    const double m = param(p, "mass", 1.0);
    const double a = param(p, "quartic", 1.0);
    LagrangianSystem sys;
    sys.dim = 1;
    sys.label = "quartic_oscillator";
    sys.lagrangian = [m, a](const Vec& q, const Vec& v) {
        return 0.5 * m * v[0] * v[0] - 0.25 * a * std::pow(q[0], 4);
    };
    sys.grad_q = [a](const Vec& q, const Vec&) {
        return Vec::Constant(1, -a * std::pow(q[0], 3)).eval();
    };
    sys.grad_v = [m](const Vec&, const Vec& v) { return Vec::Constant(1, m * v[0]).eval(); };
    sys.hess_qq = [a](const Vec& q, const Vec&) {
        return Mat::Constant(1, 1, -3.0 * a * q[0] * q[0]).eval();
    };
    sys.hess_qv = [](const Vec&, const Vec&) { return Mat::Zero(1, 1).eval(); };
    sys.hess_vv = [m](const Vec&, const Vec&) { return Mat::Constant(1, 1, m).eval(); };
    return sys;
}

LagrangianSystem pendulum(const ParamMap& p) {
    reject_unknown(p, {"mass", "length", "gravity"}, "pendulum");
    const double m = param(p, "mass", 1.0);
    const double l = param(p, "length", 1.0);
    const double g = param(p, "gravity", 1.0);
    const double inertia = m * l * l;
    const double weight = m * g * l;
    LagrangianSystem sys;
    sys.dim = 1;
    sys.label = "pendulum";
    sys.lagrangian = [inertia, weight](const Vec& q, const Vec& v) {
        return 0.5 * inertia * v[0] * v[0] + weight * std::cos(q[0]);
    };
    sys.grad_q = [weight](const Vec& q, const Vec&) {
        return Vec::Constant(1, -weight * std::sin(q[0])).eval();
    };
    sys.grad_v = [inertia](const Vec&, const Vec& v) {
        return Vec::Constant(1, inertia * v[0]).eval();
    };
    sys.hess_qq = [weight](const Vec& q, const Vec&) {
        return Mat::Constant(1, 1, -weight * std::cos(q[0])).eval();
    };
    sys.hess_qv = [](const Vec&, const Vec&) { return Mat::Zero(1, 1).eval(); };
    sys.hess_vv = [inertia](const Vec&, const Vec&) {
        return Mat::Constant(1, 1, inertia).eval();
    };
    return sys;
}

LagrangianSystem kepler(const ParamMap& p) {
    reject_unknown(p, {"mass", "mu"}, "kepler");
    const double m = param(p, "mass", 1.0);
    const double mu = param(p, "mu", 1.0);
    LagrangianSystem sys;
    sys.dim = 2;
    sys.label = "kepler";
    sys.lagrangian = [m, mu](const Vec& q, const Vec& v) {
        return 0.5 * m * v.squaredNorm() + mu * m / q.norm();
    };
    sys.grad_q = [m, mu](const Vec& q, const Vec&) {
        const double r = q.norm();
        return (-mu * m / (r * r * r) * q).eval();
    };
    sys.grad_v = [m](const Vec&, const Vec& v) { return (m * v).eval(); };
    sys.hess_qq = [m, mu](const Vec& q, const Vec&) {
        const double r = q.norm();
        const double r3 = r * r * r, r5 = r3 * r * r;
        return (mu * m * (3.0 / r5 * q * q.transpose() - Mat::Identity(2, 2) / r3)).eval();
    };
    sys.hess_qv = [](const Vec&, const Vec&) { return Mat::Zero(2, 2).eval(); };
    sys.hess_vv = [m](const Vec&, const Vec&) { return (m * Mat::Identity(2, 2)).eval(); };
    return sys;
}

LagrangianSystem damped_oscillator(const ParamMap& p) {
    reject_unknown(p, {"mass", "stiffness", "gamma"}, "damped_oscillator");
    const double m = param(p, "mass", 1.0);
    const double k = param(p, "stiffness", 1.0);
    const double gamma = param(p, "gamma", 0.1);
    LagrangianSystem sys = harmonic_oscillator({{"mass", m}, {"stiffness", k}});
    sys.label = "damped_oscillator";
    sys.force = [gamma](const Vec&, const Vec& v) {
        return Vec::Constant(1, -gamma * v[0]).eval();
    };
    const double alpha = 0.5 * gamma / m;
    const double wd2 = k / m - alpha * alpha;
    if (wd2 > 0.0) {
        // underdamped closed form; p = m v throughout
        const double wd = std::sqrt(wd2);
        sys.exact_flow = [m, alpha, wd](const Vec& q, const Vec& p0, double t) {
            const double v0 = p0[0] / m;
            const double A = q[0], B = (v0 + alpha * q[0]) / wd;
            const double e = std::exp(-alpha * t);
            const double c = std::cos(wd * t), s = std::sin(wd * t);
            Vec qq(1), pp(1);
            qq[0] = e * (A * c + B * s);
            pp[0] = m * e * ((-alpha * A + B * wd) * c + (-alpha * B - A * wd) * s);
            return std::make_pair(qq, pp);
        };
    } else {
        sys.exact_flow = nullptr;
    }
    return sys;
}

// Sinusoidal driving handled autonomously through a clock coordinate:
// q = (x, tau) with L = 1/2 m vx^2 - 1/2 k x^2 + 1/2 vtau^2 and force
// (A sin(omega tau), 0). Initialize (q[1], p[1]) = (t0, 1) so tau tracks
// time. State-dependent forces only; no f(t) in the core interfaces.
LagrangianSystem driven_oscillator(const ParamMap& p) {
    reject_unknown(p, {"mass", "stiffness", "amplitude", "omega"}, "driven_oscillator");
    const double m = param(p, "mass", 1.0);
    const double k = param(p, "stiffness", 1.0);
    const double A = param(p, "amplitude", 1.0);
    const double om = param(p, "omega", 1.0);
    LagrangianSystem sys;
    sys.dim = 2;
    sys.label = "driven_oscillator";
    sys.lagrangian = [m, k](const Vec& q, const Vec& v) {
        return 0.5 * m * v[0] * v[0] - 0.5 * k * q[0] * q[0] + 0.5 * v[1] * v[1];
    };
    sys.grad_q = [k](const Vec& q, const Vec&) {
        Vec g(2);
        g << -k * q[0], 0.0;
        return g;
    };
    sys.grad_v = [m](const Vec&, const Vec& v) {
        Vec g(2);
        g << m * v[0], v[1];
        return g;
    };
    sys.hess_qq = [k](const Vec&, const Vec&) {
        Mat h = Mat::Zero(2, 2);
        h(0, 0) = -k;
        return h;
    };
    sys.hess_qv = [](const Vec&, const Vec&) { return Mat::Zero(2, 2).eval(); };
    sys.hess_vv = [m](const Vec&, const Vec&) {
        Mat h = Mat::Identity(2, 2);
        h(0, 0) = m;
        return h;
    };
    sys.force = [A, om](const Vec& q, const Vec&) {
        Vec f(2);
        f << A * std::sin(om * q[1]), 0.0;
        return f;
    };
    return sys;
}

struct Registration {
    LagrangianSystem (*factory)(const ParamMap&);
    const char* description;
};

const std::map<std::string, Registration>& registry() {
    static const std::map<std::string, Registration> reg = {
        {"free_particle", {free_particle, "L = 1/2 m |v|^2 (params: mass, dim)"}},
        {"harmonic_oscillator",
         {harmonic_oscillator, "L = 1/2 (m v^2 - k q^2) (params: mass, stiffness)"}},
        {"quartic_oscillator",
         {quartic_oscillator, "L = 1/2 m v^2 - 1/4 a q^4 (params: mass, quartic)"}},
        {"pendulum", {pendulum, "L = 1/2 m l^2 v^2 + m g l cos q (params: mass, length, gravity)"}},
        {"kepler", {kepler, "planar L = 1/2 m |v|^2 + mu m / |q| (params: mass, mu)"}},
        {"damped_oscillator",
         {damped_oscillator,
          "harmonic oscillator with force f = -gamma v (params: mass, stiffness, gamma)"}},
        {"driven_oscillator",
         {driven_oscillator,
          "clock-extended oscillator with force A sin(omega tau); init (q[1],p[1]) = (t0,1) "
          "(params: mass, stiffness, amplitude, omega)"}},
    };
    return reg;
}

}  // namespace

LagrangianSystem make_system(const std::string& label, const ParamMap& params, bool validate) {
    const auto it = registry().find(label);
    if (it == registry().end())
        throw UnknownSystem("no system registered under '" + label + "'");
    LagrangianSystem sys = it->second.factory(params);
    if (validate) {
        // keep kepler samples away from the origin
        const double lo = (label == "kepler") ? 0.4 : -2.0;
        check_derivatives(sys, lo, 2.0, 20);
    }
    return sys;
}

std::vector<std::string> system_labels() {
    std::vector<std::string> out;
    for (const auto& [label, reg] : registry()) out.push_back(label);
    return out;
}

std::string system_description(const std::string& label) {
    const auto it = registry().find(label);
    if (it == registry().end())
        throw UnknownSystem("no system registered under '" + label + "'");
    return it->second.description;
}

}  // namespace galint
