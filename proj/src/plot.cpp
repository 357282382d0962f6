#include "gomkit/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gomkit {

std::string svg_line_plot(const std::string& title, const std::vector<PlotSeries>& series,
                          int width, int height) {
    const int margin = 48;
    const double plot_w = width - 2.0 * margin;
    const double plot_h = height - 2.0 * margin;

    double lo = 0.0, hi = 1.0;
    long n = 0;
    bool any = false;
    for (const auto& s : series) {
        if (s.values.size() == 0) continue;
        const double smin = s.values.minCoeff(), smax = s.values.maxCoeff();
        lo = any ? std::min(lo, smin) : smin;
        hi = any ? std::max(hi, smax) : smax;
        n = std::max(n, s.values.size());
        any = true;
    }
    if (!any) n = 1;
    if (hi - lo < 1e-9) {
        hi += 1.0;
        lo -= 1.0;
    }

    auto px = [&](long i) {
        return margin + (n > 1 ? plot_w * double(i) / double(n - 1) : plot_w / 2.0);
    };
    auto py = [&](double v) { return margin + plot_h * (1.0 - (v - lo) / (hi - lo)); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\" "
           "font-family=\"sans-serif\">"
        << title << "</text>\n";
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#ccc\"/>\n";

    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", hi);
    out << "<text x=\"4\" y=\"" << margin + 4 << "\" font-size=\"11\" "
           "font-family=\"sans-serif\">"
        << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.2f", lo);
    out << "<text x=\"4\" y=\"" << margin + plot_h << "\" font-size=\"11\" "
           "font-family=\"sans-serif\">"
        << buf << "</text>\n";

    int legend_y = margin + 14;
    for (const auto& s : series) {
        if (s.values.size() == 0) continue;
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
        for (long i = 0; i < s.values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", px(i), py(s.values[i]));
            out << buf;
        }
        out << "\"/>\n";
        out << "<text x=\"" << width - margin - 120 << "\" y=\"" << legend_y
            << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" << s.color << "\">"
            << s.label << "</text>\n";
        legend_y += 14;
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace gomkit
