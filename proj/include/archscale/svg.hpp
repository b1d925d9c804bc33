#pragma once

#include <optional>
#include <string>
#include <vector>

namespace archscale {

enum class PlotKind { Scatter, Line, UCurve };

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    // Vertical reference line (e.g. the critical depth on a depth sweep).
    std::optional<double> vline;
    std::string vline_label;
};

// Renders a self-contained SVG. UCurve draws series 0 as a line+markers and
// highlights its minimum point. Output is byte-deterministic for identical
// inputs (fixed-precision formatting, no timestamps).
std::string render_svg(const std::vector<Series>& series, PlotKind kind,
                       const PlotOptions& options);

// render_svg + write to path. Throws ValidationError on empty input or
// unwritable path.
void emit_plot(const std::vector<Series>& series, PlotKind kind, const std::string& path,
               const PlotOptions& options);

}  // namespace archscale
