#include "morsebif/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "morsebif/csv.hpp"

namespace morsebif {

namespace {

constexpr double kW = 720, kH = 420;
constexpr double kL = 70, kR = 20, kT = 40, kB = 50;  // margins

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void take(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(hi > lo)) {
            lo -= 1.0;
            hi += 1.0;
        } else {
            const double m = 0.05 * (hi - lo);
            lo -= m;
            hi += m;
        }
    }
};

}  // namespace

void write_step_svg(const std::string& path, const std::vector<StepSeries>& series,
                    const std::string& title, const std::string& x_label,
                    const std::string& y_label) {
    Range xr, yr;
    for (const auto& s : series) {
        for (double v : s.x) xr.take(v);
        for (double v : s.y) yr.take(v);
    }
    if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo))
        throw std::invalid_argument("write_step_svg: no data");
    xr.pad();
    yr.pad();

    auto px = [&](double x) { return kL + (x - xr.lo) / (xr.hi - xr.lo) * (kW - kL - kR); };
    auto py = [&](double y) { return kH - kB - (y - yr.lo) / (yr.hi - yr.lo) * (kH - kT - kB); };

    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_step_svg: cannot open " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << title << "</text>\n";

    // axes with a handful of ticks
    os << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\""
       << kH - kB << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xr.lo + i * (xr.hi - xr.lo) / 5.0;
        const double yv = yr.lo + i * (yr.hi - yr.lo) / 5.0;
        os << "<line x1=\"" << px(xv) << "\" y1=\"" << kH - kB << "\" x2=\"" << px(xv)
           << "\" y2=\"" << kH - kB + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px(xv) << "\" y=\"" << kH - kB + 20
           << "\" text-anchor=\"middle\" font-size=\"11\">" << format_double(xv) << "</text>\n";
        os << "<line x1=\"" << kL - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << kL << "\" y2=\""
           << py(yv) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << kL - 8 << "\" y=\"" << py(yv) + 4
           << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(yv) << "</text>\n";
    }
    os << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12
       << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    os << "<text x=\"16\" y=\"" << (kT + kH - kB) / 2
       << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
       << (kT + kH - kB) / 2 << ")\">" << y_label << "</text>\n";

    int legend_row = 0;
    for (const auto& s : series) {
        if (s.x.empty()) continue;
        os << "<path fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\" d=\"";
        os << "M" << px(s.x[0]) << " " << py(s.y[0]);
        for (size_t i = 1; i < s.x.size(); ++i) {
            os << " L" << px(s.x[i]) << " " << py(s.y[i - 1]);  // step after
            os << " L" << px(s.x[i]) << " " << py(s.y[i]);
        }
        os << "\"/>\n";
        if (!s.label.empty()) {
            const double ly = kT + 14 + 16 * legend_row++;
            os << "<line x1=\"" << kW - kR - 120 << "\" y1=\"" << ly << "\" x2=\""
               << kW - kR - 95 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
               << "\" stroke-width=\"2\"/>\n";
            os << "<text x=\"" << kW - kR - 90 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
               << s.label << "</text>\n";
        }
    }
    os << "</svg>\n";
}

}  // namespace morsebif
