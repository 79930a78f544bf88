#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "galint/analysis.hpp"
#include "galint/errors.hpp"

namespace galint {

namespace {

bool column_empty(const MetricColumn& m) {
    return m.errors.empty() ||
           std::all_of(m.errors.begin(), m.errors.end(),
                       [](double e) { return !std::isfinite(e); });
}

std::string fmt(double v, int prec = 12) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

void write_csv(const ConvergenceReport& report, std::ostream& out) {
    std::vector<const MetricColumn*> cols;
    std::vector<std::string> omitted;
    for (const auto& m : report.metrics) {
        if (column_empty(m))
            omitted.push_back(m.name);
        else
            cols.push_back(&m);
    }

    out << "h";
    for (const auto* m : cols) out << "," << m->name;
    out << "\n";
    for (std::size_t i = 0; i < report.h_values.size(); ++i) {
        out << fmt(report.h_values[i]);
        for (const auto* m : cols) out << "," << fmt(m->errors[i]);
        out << "\n";
    }
    for (const auto* m : cols) {
        if (m->fit_ok) {
            out << "# slope " << m->name << " = " << fmt(m->slope, 6) << " (expected "
                << fmt(m->expected_order, 6) << ")\n";
        } else {
            out << "# slope " << m->name << " = unavailable (expected "
                << fmt(m->expected_order, 6) << "): " << m->note << "\n";
        }
        std::string ex;
        for (std::size_t i = 0; i < m->excluded.size(); ++i)
            if (m->excluded[i]) ex += (ex.empty() ? "" : ", ") + std::string("h=") +
                                      fmt(report.h_values[i], 6);
        if (!ex.empty()) out << "# floor-excluded " << m->name << ": " << ex << "\n";
    }
    for (const auto& name : omitted) out << "# omitted empty metric: " << name << "\n";
    for (const auto& note : report.notes) out << "# note: " << note << "\n";
}

struct LogRange {
    double lo = 0.0, hi = 1.0;
    void grow(double v) {
        if (!std::isfinite(v) || v <= 0.0) return;
        const double lv = std::log10(v);
        lo = std::min(lo, lv);
        hi = std::max(hi, lv);
    }
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

void write_svg(const ConvergenceReport& report, std::ostream& out) {
    const double W = 720, H = 540;
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    LogRange xr, yr;
    xr.lo = 1e300;
    xr.hi = -1e300;
    yr = xr;
    for (const double h : report.h_values) xr.grow(h);
    for (const auto& m : report.metrics)
        for (const double e : m.errors) yr.grow(e);
    if (xr.lo > xr.hi || yr.lo > yr.hi) throw Error("emit_report: nothing to plot");
    xr.lo -= 0.1;
    xr.hi += 0.1;
    yr.lo -= 0.5;
    yr.hi += 0.5;

    auto px = [&](double logh) {
        return ml + (logh - xr.lo) / (xr.hi - xr.lo) * (W - ml - mr);
    };
    auto py = [&](double loge) {
        return H - mb - (loge - yr.lo) / (yr.hi - yr.lo) * (H - mt - mb);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << report.title << "</text>\n";
    // axes box and decade gridlines
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
        << "\" height=\"" << H - mt - mb
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    for (int d = static_cast<int>(std::ceil(xr.lo)); d <= std::floor(xr.hi); ++d) {
        out << "<line x1=\"" << px(d) << "\" y1=\"" << mt << "\" x2=\"" << px(d) << "\" y2=\""
            << H - mb << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << px(d) << "\" y=\"" << H - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">1e" << d << "</text>\n";
    }
    for (int d = static_cast<int>(std::ceil(yr.lo)); d <= std::floor(yr.hi); ++d) {
        out << "<line x1=\"" << ml << "\" y1=\"" << py(d) << "\" x2=\"" << W - mr << "\" y2=\""
            << py(d) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << py(d) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">1e" << d << "</text>\n";
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">h</text>\n";
    out << "<text x=\"16\" y=\"" << H / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << H / 2
        << ")\">error</text>\n";

    int ci = 0;
    double legend_y = mt + 16;
    for (const auto& m : report.metrics) {
        if (column_empty(m)) continue;
        const char* color = kPalette[ci++ % 5];
        // data points; floor-excluded ones drawn hollow
        for (std::size_t i = 0; i < report.h_values.size(); ++i) {
            const double e = m.errors[i];
            if (!(e > 0.0) || !std::isfinite(e)) continue;
            const double cx = px(std::log10(report.h_values[i]));
            const double cy = py(std::log10(e));
            if (m.excluded[i])
                out << "<circle cx=\"" << cx << "\" cy=\"" << cy
                    << "\" r=\"4\" fill=\"white\" stroke=\"" << color << "\"/>\n";
            else
                out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"4\" fill=\"" << color
                    << "\"/>\n";
        }
        // fitted line over the kept rows
        double h_first = 0, e_first = 0;
        double h_last = 0;
        bool have_first = false;
        for (std::size_t i = 0; i < report.h_values.size(); ++i) {
            if (m.excluded[i] || !(m.errors[i] > 0.0)) continue;
            if (!have_first) {
                h_first = report.h_values[i];
                e_first = m.errors[i];
                have_first = true;
            }
            h_last = report.h_values[i];
        }
        if (m.fit_ok && have_first) {
            const double e_fit_last = e_first * std::pow(h_last / h_first, m.slope);
            out << "<line x1=\"" << px(std::log10(h_first)) << "\" y1=\""
                << py(std::log10(e_first)) << "\" x2=\"" << px(std::log10(h_last)) << "\" y2=\""
                << py(std::log10(e_fit_last)) << "\" stroke=\"" << color
                << "\" stroke-width=\"1.5\"/>\n";
        }
        // expected-slope guide anchored at the first kept point
        if (have_first) {
            const double shift = 1.3;  // slight offset so the guide is visible
            const double e_guide_last =
                shift * e_first * std::pow(h_last / h_first, m.expected_order);
            out << "<line class=\"guide\" x1=\"" << px(std::log10(h_first)) << "\" y1=\""
                << py(std::log10(shift * e_first)) << "\" x2=\"" << px(std::log10(h_last))
                << "\" y2=\"" << py(std::log10(e_guide_last)) << "\" stroke=\"" << color
                << "\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n";
        }
        out << "<circle cx=\"" << W - mr - 180 << "\" cy=\"" << legend_y - 4 << "\" r=\"4\" fill=\""
            << color << "\"/>\n";
        out << "<text x=\"" << W - mr - 170 << "\" y=\"" << legend_y << "\" font-size=\"12\">"
            << m.name;
        if (m.fit_ok)
            out << " (slope " << fmt(m.slope, 4) << ", expected " << fmt(m.expected_order, 4)
                << ")";
        out << "</text>\n";
        legend_y += 18;
    }
    out << "</svg>\n";
}

}  // namespace

void emit_report(const ConvergenceReport& report, ReportFormat format, const std::string& path) {
    if (report.h_values.empty() || report.metrics.empty())
        throw Error("emit_report: empty report");
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open '" + path + "' for writing");
    if (format == ReportFormat::csv)
        write_csv(report, out);
    else
        write_svg(report, out);
    out.flush();
    if (!out) throw IoFailure("write to '" + path + "' failed");
}

void emit_energy_csv(const EnergyReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open '" + path + "' for writing");
    out << "step,dH\n";
    for (std::size_t i = 0; i < report.deviations.size(); ++i)
        out << (i + 1) << "," << fmt(report.deviations[i]) << "\n";
    out << "# first-decile max |dH| = " << fmt(report.first_decile_max, 6) << "\n";
    out << "# last-decile max |dH| = " << fmt(report.last_decile_max, 6) << "\n";
    out.flush();
    if (!out) throw IoFailure("write to '" + path + "' failed");
}

}  // namespace galint
