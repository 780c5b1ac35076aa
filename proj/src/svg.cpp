#include "granular/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "granular/csvio.hpp"
#include "granular/errors.hpp"

namespace granular::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Axis {
    double lo = 0, hi = 1;
    bool log = false;

    double place(double v) const {
        const double a = log ? std::log10(lo) : lo;
        const double b = log ? std::log10(hi) : hi;
        const double x = log ? std::log10(v) : v;
        return b > a ? (x - a) / (b - a) : 0.5;
    }
    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            const int first = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
            const int last = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
            for (int e = first; e <= last; ++e) out.push_back(std::pow(10.0, e));
            if (out.size() < 2) {
                out = {lo, hi};
            }
        } else {
            const double span = hi - lo;
            const double raw = span / 5.0;
            const double mag = std::pow(10.0, std::floor(std::log10(raw)));
            double step = mag;
            for (double multiple : {1.0, 2.0, 5.0, 10.0}) {
                if (raw <= multiple * mag) {
                    step = multiple * mag;
                    break;
                }
            }
            for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
                out.push_back(v);
        }
        return out;
    }
};

} // namespace

void write_line_chart(const std::string& path, const std::vector<SeriesSpec>& series,
                      const PlotOptions& options) {
    Axis xa{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            options.log_x};
    Axis ya{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            options.log_y};
    std::size_t plottable = 0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            const double x = s.x[i], y = s.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (options.log_x && !(x > 0)) continue;
            if (options.log_y && !(y > 0)) continue;
            xa.lo = std::min(xa.lo, x);
            xa.hi = std::max(xa.hi, x);
            ya.lo = std::min(ya.lo, y);
            ya.hi = std::max(ya.hi, y);
            ++plottable;
        }
    }
    if (plottable < 2) throw ValidationError("svg: nothing plottable");
    if (xa.lo == xa.hi) {
        xa.lo -= 0.5;
        xa.hi += 0.5;
    }
    if (ya.lo == ya.hi) {
        ya.lo = options.log_y ? ya.lo * 0.5 : ya.lo - 0.5;
        ya.hi = options.log_y ? ya.hi * 2.0 : ya.hi + 0.5;
    }

    const double margin_l = 70, margin_r = 20, margin_t = options.title.empty() ? 20 : 44;
    const double margin_b = 52;
    const double w = options.width, h = options.height;
    const double plot_w = w - margin_l - margin_r;
    const double plot_h = h - margin_t - margin_b;
    const auto px = [&](double v) { return margin_l + xa.place(v) * plot_w; };
    const auto py = [&](double v) { return margin_t + (1.0 - ya.place(v)) * plot_h; };

    std::ofstream out(path);
    if (!out) throw ValidationError("svg: cannot open " + path + " for writing");
    std::ostringstream body;
    body << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
         << "' viewBox='0 0 " << w << " " << h << "'>\n";
    if (!options.provenance.empty()) body << "<!-- " << options.provenance << " -->\n";
    body << "<rect width='100%' height='100%' fill='white'/>\n";
    if (!options.title.empty())
        body << "<text x='" << w / 2 << "' y='26' text-anchor='middle' font-family='sans-serif'"
             << " font-size='16'>" << options.title << "</text>\n";

    body << "<g stroke='#d0d0d0' stroke-width='1'>\n";
    for (double tx : xa.ticks())
        body << "<line x1='" << px(tx) << "' y1='" << margin_t << "' x2='" << px(tx) << "' y2='"
             << margin_t + plot_h << "'/>\n";
    for (double ty : ya.ticks())
        body << "<line x1='" << margin_l << "' y1='" << py(ty) << "' x2='" << margin_l + plot_w
             << "' y2='" << py(ty) << "'/>\n";
    body << "</g>\n";

    body << "<g font-family='sans-serif' font-size='11' fill='#333'>\n";
    for (double tx : xa.ticks())
        body << "<text x='" << px(tx) << "' y='" << margin_t + plot_h + 16
             << "' text-anchor='middle'>" << io::format_double(tx) << "</text>\n";
    for (double ty : ya.ticks())
        body << "<text x='" << margin_l - 6 << "' y='" << py(ty) + 4
             << "' text-anchor='end'>" << io::format_double(ty) << "</text>\n";
    if (!options.x_label.empty())
        body << "<text x='" << margin_l + plot_w / 2 << "' y='" << h - 10
             << "' text-anchor='middle' font-size='13'>" << options.x_label << "</text>\n";
    if (!options.y_label.empty())
        body << "<text x='16' y='" << margin_t + plot_h / 2
             << "' text-anchor='middle' font-size='13' transform='rotate(-90 16 "
             << margin_t + plot_h / 2 << ")'>" << options.y_label << "</text>\n";
    body << "</g>\n";

    body << "<rect x='" << margin_l << "' y='" << margin_t << "' width='" << plot_w
         << "' height='" << plot_h << "' fill='none' stroke='#333'/>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        body << "<polyline fill='none' stroke='" << color << "' stroke-width='1.6' points='";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            const double x = s.x[i], y = s.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (options.log_x && !(x > 0)) continue;
            if (options.log_y && !(y > 0)) continue;
            body << io::format_double(px(x)) << ',' << io::format_double(py(y)) << ' ';
        }
        body << "'/>\n";
        if (!s.label.empty())
            body << "<text x='" << margin_l + plot_w - 8 << "' y='"
                 << margin_t + 16 + 16 * static_cast<double>(si)
                 << "' text-anchor='end' font-family='sans-serif' font-size='12' fill='" << color
                 << "'>" << s.label << "</text>\n";
    }
    body << "</svg>\n";
    out << body.str();
}

} // namespace granular::svg
