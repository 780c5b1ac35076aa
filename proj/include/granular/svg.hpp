#pragma once

#include <string>
#include <vector>

namespace granular::svg {

struct SeriesSpec {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    int width = 860;
    int height = 540;
    bool log_x = false;
    bool log_y = false;
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string provenance; // embedded as an XML comment when non-empty
};

// Minimal self-contained line chart. Non-positive values are dropped from
// log axes; throws ValidationError when nothing is plottable.
void write_line_chart(const std::string& path, const std::vector<SeriesSpec>& series,
                      const PlotOptions& options);

} // namespace granular::svg
