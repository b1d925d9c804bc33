#include "archscale/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "archscale/errors.hpp"

namespace archscale {

namespace {

constexpr double kWidth = 680.0, kHeight = 460.0;
constexpr double kLeft = 70.0, kRight = 24.0, kTop = 42.0, kBottom = 56.0;

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#3a8f5f", "#8a5fb2", "#b2883a", "#4a4a4a"};

std::string num(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Tick label: compact fixed or scientific depending on magnitude.
std::string tick_label(double v) {
    const double a = std::abs(v);
    char buf[64];
    if (v == 0.0) return "0";
    if (a >= 1e5 || a < 1e-3) {
        std::snprintf(buf, sizeof buf, "%.1e", v);
    } else if (a >= 100.0) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.3g", v);
    }
    return buf;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double to_unit(double v) const {
        const double a = log ? std::log10(v) : v;
        const double l = log ? std::log10(lo) : lo;
        const double h = log ? std::log10(hi) : hi;
        return (a - l) / (h - l);
    }
};

std::vector<double> linear_ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (const double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (mag * m >= raw) { step = mag * m; break; }
    std::vector<double> ticks;
    const double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 1e-9 * span; t += step) ticks.push_back(t);
    return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
    std::vector<double> ticks;
    const int e0 = static_cast<int>(std::floor(std::log10(lo)));
    const int e1 = static_cast<int>(std::ceil(std::log10(hi)));
    for (int e = e0; e <= e1; ++e) {
        for (const double m : {1.0, 2.0, 5.0}) {
            const double t = m * std::pow(10.0, e);
            if (t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12)) ticks.push_back(t);
        }
    }
    if (ticks.size() > 8) {
        std::vector<double> thin;
        for (std::size_t i = 0; i < ticks.size(); ++i)
            if (std::fmod(std::log10(ticks[i]), 1.0) == 0.0) thin.push_back(ticks[i]);
        if (thin.size() >= 2) return thin;
    }
    return ticks;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const std::vector<Series>& series, PlotKind kind,
                       const PlotOptions& options) {
    if (series.empty()) throw ValidationError("plot: no series");
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size())
            throw ValidationError("plot: series '" + s.label + "' is empty or ragged");
        if (options.log_x)
            for (double v : s.x)
                if (!(v > 0.0)) throw ValidationError("plot: log x-axis needs positive values");
        if (options.log_y)
            for (double v : s.y)
                if (!(v > 0.0)) throw ValidationError("plot: log y-axis needs positive values");
    }

    Axis ax, ay;
    ax.log = options.log_x;
    ay.log = options.log_y;
    ax.lo = ay.lo = std::numeric_limits<double>::infinity();
    ax.hi = ay.hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        for (double v : s.x) { ax.lo = std::min(ax.lo, v); ax.hi = std::max(ax.hi, v); }
        for (double v : s.y) { ay.lo = std::min(ay.lo, v); ay.hi = std::max(ay.hi, v); }
    }
    if (options.vline) {
        ax.lo = std::min(ax.lo, *options.vline);
        ax.hi = std::max(ax.hi, *options.vline);
    }
    // pad degenerate or tight ranges
    const auto pad = [](Axis& a) {
        if (a.log) {
            if (a.lo == a.hi) { a.lo /= 2.0; a.hi *= 2.0; }
            a.lo /= 1.1;
            a.hi *= 1.1;
        } else {
            double span = a.hi - a.lo;
            if (span <= 0.0) span = std::max(std::abs(a.lo), 1.0);
            a.lo -= 0.06 * span;
            a.hi += 0.06 * span;
        }
    };
    pad(ax);
    pad(ay);

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto px = [&](double v) { return kLeft + ax.to_unit(v) * plot_w; };
    const auto py = [&](double v) { return kTop + (1.0 - ay.to_unit(v)) * plot_h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth, 0)
       << "\" height=\"" << num(kHeight, 0) << "\" viewBox=\"0 0 " << num(kWidth, 0) << ' '
       << num(kHeight, 0) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    if (!options.title.empty())
        os << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
              "font-family=\"sans-serif\" font-size=\"15\">"
           << escape_xml(options.title) << "</text>\n";

    // frame
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w)
       << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"#333333\"/>\n";

    const auto xticks = ax.log ? log_ticks(ax.lo, ax.hi) : linear_ticks(ax.lo, ax.hi);
    const auto yticks = ay.log ? log_ticks(ay.lo, ay.hi) : linear_ticks(ay.lo, ay.hi);
    for (const double t : xticks) {
        const double x = px(t);
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x)
           << "\" y2=\"" << num(kTop + plot_h) << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + plot_h + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << tick_label(t) << "</text>\n";
    }
    for (const double t : yticks) {
        const double y = py(t);
        os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\""
           << num(kLeft + plot_w) << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
           << tick_label(t) << "</text>\n";
    }
    if (!options.x_label.empty())
        os << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 14)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
           << escape_xml(options.x_label) << "</text>\n";
    if (!options.y_label.empty())
        os << "<text x=\"16\" y=\"" << num(kTop + plot_h / 2)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
              "transform=\"rotate(-90 16 "
           << num(kTop + plot_h / 2) << ")\">" << escape_xml(options.y_label) << "</text>\n";

    if (options.vline) {
        const double x = px(*options.vline);
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x)
           << "\" y2=\"" << num(kTop + plot_h)
           << "\" stroke=\"#d1495b\" stroke-dasharray=\"5,4\"/>\n";
        if (!options.vline_label.empty())
            os << "<text x=\"" << num(x + 5) << "\" y=\"" << num(kTop + 14)
               << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d1495b\">"
               << escape_xml(options.vline_label) << "</text>\n";
    }

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
        const bool draw_line = kind != PlotKind::Scatter || s.x.size() == 1;
        if (kind != PlotKind::Scatter && s.x.size() > 1) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                os << (i ? " " : "") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
            os << "\"/>\n";
        }
        (void)draw_line;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
               << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        if (!s.label.empty()) {
            const double ly = kTop + 16.0 + 16.0 * static_cast<double>(si);
            os << "<rect x=\"" << num(kLeft + plot_w - 150) << "\" y=\"" << num(ly - 9)
               << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
            os << "<text x=\"" << num(kLeft + plot_w - 136) << "\" y=\"" << num(ly)
               << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(s.label)
               << "</text>\n";
        }
    }

    if (kind == PlotKind::UCurve) {
        const auto& s = series.front();
        std::size_t best = 0;
        for (std::size_t i = 1; i < s.y.size(); ++i)
            if (s.y[i] < s.y[best]) best = i;
        os << "<circle cx=\"" << num(px(s.x[best])) << "\" cy=\"" << num(py(s.y[best]))
           << "\" r=\"6\" fill=\"none\" stroke=\"#d1495b\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << num(px(s.x[best])) << "\" y=\"" << num(py(s.y[best]) - 10)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
              "fill=\"#d1495b\">min</text>\n";
    }

    os << "</svg>\n";
    return os.str();
}

void emit_plot(const std::vector<Series>& series, PlotKind kind, const std::string& path,
               const PlotOptions& options) {
    const std::string svg = render_svg(series, kind, options);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("plot: cannot open '" + path + "' for writing");
    out << svg;
    if (!out) throw ValidationError("plot: failed writing '" + path + "'");
}

}  // namespace archscale
