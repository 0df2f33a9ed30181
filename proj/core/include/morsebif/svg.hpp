#pragma once

#include <string>
#include <vector>

namespace morsebif {

/// One step series (piecewise-constant between x samples, step after).
struct StepSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::string label;
    std::string color = "#1f6fb2";
};

/// Minimal built-in writer for step plots and index staircases; no plotting
/// dependency.  Output is a standalone SVG file.
void write_step_svg(const std::string& path, const std::vector<StepSeries>& series,
                    const std::string& title, const std::string& x_label,
                    const std::string& y_label);

}  // namespace morsebif
