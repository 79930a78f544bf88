#include "galint/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "galint/errors.hpp"

namespace galint {

namespace {

// Legendre P_n(x) and P'_n(x) on [-1,1] via the three-term recurrence.
void legendre_pair(int n, double x, double& p, double& dp) {
    double pm1 = 1.0, pm0 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int j = 2; j <= n; ++j) {
        const double pj = ((2 * j - 1) * x * pm0 - (j - 1) * pm1) / j;
        pm1 = pm0;
        pm0 = pj;
    }
    p = pm0;
    dp = n * (x * pm0 - pm1) / (x * x - 1.0);
}

}  // namespace

Quadrature gauss_legendre(int r) {
    if (r < 1 || r > kMaxRulePoints)
        throw UnsupportedSize("gauss_legendre: r must be in [1," +
                              std::to_string(kMaxRulePoints) + "], got " + std::to_string(r));
    Quadrature rule;
    rule.order = 2 * r;
    rule.label = "gauss:" + std::to_string(r);
    rule.points.resize(r);
    rule.weights.resize(r);
    for (int i = 0; i < r; ++i) {
        // Chebyshev-based initial guess, then Newton on P_r
        double x = std::cos(std::numbers::pi * (i + 0.75) / (r + 0.5));
        double p = 0.0, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            legendre_pair(r, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        legendre_pair(r, x, p, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]; cos guesses run right to left
        rule.points[r - 1 - i] = 0.5 * (x + 1.0);
        rule.weights[r - 1 - i] = 0.5 * w;
    }
    return rule;
}

std::vector<double> lobatto_points(int npts) {
    if (npts < 2)
        throw UnsupportedSize("lobatto_points: need at least 2 points");
    const int n = npts - 1;
    std::vector<double> x(npts), xold(npts, 2.0);
    std::vector<double> pn(npts), pnm1(npts);
    for (int i = 0; i < npts; ++i)
        x[i] = -std::cos(std::numbers::pi * i / n);
    // simultaneous Newton-type iteration; nodes are the extrema of P_n
    for (int it = 0; it < 200; ++it) {
        double change = 0.0;
        for (int i = 0; i < npts; ++i) {
            double pm1 = 1.0, pm0 = x[i];
            for (int j = 2; j <= n; ++j) {
                const double pj = ((2 * j - 1) * x[i] * pm0 - (j - 1) * pm1) / j;
                pm1 = pm0;
                pm0 = pj;
            }
            pn[i] = pm0;
            pnm1[i] = pm1;
        }
        for (int i = 0; i < npts; ++i) {
            const double dx = (x[i] * pn[i] - pnm1[i]) / (npts * pn[i]);
            x[i] -= dx;
            change = std::max(change, std::abs(dx));
        }
        if (change < 1e-15) break;
    }
    x.front() = -1.0;
    x.back() = 1.0;
    std::vector<double> out(npts);
    for (int i = 0; i < npts; ++i)
        out[i] = 0.5 * (x[i] + 1.0);
    out.front() = 0.0;
    out.back() = 1.0;
    return out;
}

Quadrature gauss_lobatto(int r) {
    if (r < 2 || r > kMaxRulePoints)
        throw UnsupportedSize("gauss_lobatto: r must be in [2," +
                              std::to_string(kMaxRulePoints) + "], got " + std::to_string(r));
    Quadrature rule;
    rule.order = 2 * r - 2;
    rule.label = "lobatto:" + std::to_string(r);
    rule.points = lobatto_points(r);
    rule.weights.resize(r);
    const int n = r - 1;
    for (int i = 0; i < r; ++i) {
        // w_i = 2 / (r (r-1) P_{r-1}(x_i)^2) on [-1,1]; P_n(+-1) = (+-1)^n
        double p;
        if (i == 0) {
            p = (n % 2 == 1) ? -1.0 : 1.0;
        } else if (i == r - 1) {
            p = 1.0;
        } else {
            const double x = 2.0 * rule.points[i] - 1.0;
            double dp;
            legendre_pair(n, x, p, dp);
        }
        rule.weights[i] = 1.0 / (r * n * p * p);
    }
    return rule;
}

double integrate(const Quadrature& rule, const std::function<double(double)>& fn,
                 double a, double h) {
    double sum = 0.0;
    for (int i = 0; i < rule.size(); ++i)
        sum += rule.weights[i] * fn(a + h * rule.points[i]);
    return h * sum;
}

namespace {

// Legendre polynomial shifted to [0,1]
double shifted_legendre(int k, double t) {
    const double x = 2.0 * t - 1.0;
    if (k == 0) return 1.0;
    double pm1 = 1.0, pm0 = x;
    for (int j = 2; j <= k; ++j) {
        const double pj = ((2 * j - 1) * x * pm0 - (j - 1) * pm1) / j;
        pm1 = pm0;
        pm0 = pj;
    }
    return pm0;
}

}  // namespace

int verify_order(const Quadrature& rule, double tol) {
    const int cap = rule.order + 8;
    int measured = -1;
    for (int k = 0; k <= cap; ++k) {
        double sum = 0.0;
        for (int i = 0; i < rule.size(); ++i)
            sum += rule.weights[i] * shifted_legendre(k, rule.points[i]);
        const double exact = (k == 0) ? 1.0 : 0.0;
        if (std::abs(sum - exact) > tol) {
            measured = k;
            break;
        }
    }
    if (measured < 0)
        throw OrderMismatch(rule.label + ": measured order exceeds " + std::to_string(cap) +
                            ", declared " + std::to_string(rule.order));
    if (measured != rule.order)
        throw OrderMismatch(rule.label + ": measured order " + std::to_string(measured) +
                            ", declared " + std::to_string(rule.order));
    return measured;
}

Quadrature parse_quadrature(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw Error("quadrature spec must be gauss:<r> or lobatto:<r>, got '" + spec + "'");
    const std::string family = spec.substr(0, colon);
    int r = 0;
    try {
        r = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error("bad quadrature size in '" + spec + "'");
    }
    if (family == "gauss") return gauss_legendre(r);
    if (family == "lobatto") return gauss_lobatto(r);
    throw Error("unknown quadrature family '" + family + "'");
}

}  // namespace galint
