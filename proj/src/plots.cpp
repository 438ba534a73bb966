#include "vtcav/plots.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace vtcav {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kMarginLeft = 60;
constexpr int kMarginBottom = 70;
constexpr int kMarginTop = 40;
constexpr int kMarginRight = 20;

const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

void svg_header(std::ostream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"16\">" << esc(title) << "</text>\n";
}

void svg_axes(std::ostream& os) {
    const int x0 = kMarginLeft, y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << kWidth - kMarginRight
       << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double frac = i / 4.0;
        int y = static_cast<int>(y0 - frac * (y0 - y1));
        os << "<line x1=\"" << x0 - 4 << "\" y1=\"" << y << "\" x2=\"" << x0 << "\" y2=\"" << y
           << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << x0 - 8 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << frac
           << "</text>\n";
    }
}

double plot_y(double v) {
    const int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    v = std::clamp(v, 0.0, 1.0);
    return y0 - v * (y0 - y1);
}

}  // namespace

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<BarDatum>& bars) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write chart: " + path);
    svg_header(os, title);
    svg_axes(os);
    const int x0 = kMarginLeft, y0 = kHeight - kMarginBottom;
    const int span = kWidth - kMarginLeft - kMarginRight;
    const int n = static_cast<int>(bars.size());
    const double slot = n > 0 ? static_cast<double>(span) / n : span;
    const double bar_w = slot * 0.6;
    for (int i = 0; i < n; ++i) {
        const double cx = x0 + slot * (i + 0.5);
        const double top = plot_y(bars[i].value);
        os << "<rect x=\"" << cx - bar_w / 2 << "\" y=\"" << top << "\" width=\"" << bar_w
           << "\" height=\"" << (y0 - top) << "\" fill=\"" << kPalette[i % 6] << "\"/>\n";
        std::ostringstream val;
        val.precision(3);
        val << bars[i].value;
        os << "<text x=\"" << cx << "\" y=\"" << top - 5
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << val.str() << "</text>\n";
        os << "<text x=\"" << cx << "\" y=\"" << y0 + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << esc(bars[i].label) << "</text>\n";
    }
    os << "</svg>\n";
}

void write_significance_svg(const std::string& path, const std::string& title,
                            const std::vector<SignificanceDatum>& data) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write chart: " + path);
    svg_header(os, title);
    svg_axes(os);
    const int x0 = kMarginLeft, y0 = kHeight - kMarginBottom;
    const int span = kWidth - kMarginLeft - kMarginRight;
    const int n = static_cast<int>(data.size());
    const double slot = n > 0 ? static_cast<double>(span) / n : span;
    for (int i = 0; i < n; ++i) {
        const double cx = x0 + slot * (i + 0.5);
        for (size_t s = 0; s < data[i].scores.size(); ++s) {
            // jitter dots horizontally so equal scores stay visible
            const double jx = cx - slot * 0.2 +
                              (data[i].scores.size() > 1
                                   ? slot * 0.4 * static_cast<double>(s) /
                                         static_cast<double>(data[i].scores.size() - 1)
                                   : 0.0);
            os << "<circle cx=\"" << jx << "\" cy=\"" << plot_y(data[i].scores[s])
               << "\" r=\"3\" fill=\"" << kPalette[i % 6] << "\" fill-opacity=\"0.7\"/>\n";
        }
        std::ostringstream p;
        p.precision(3);
        p << "p=" << data[i].p_value << (data[i].significant ? " *" : "");
        os << "<text x=\"" << cx << "\" y=\"" << kMarginTop + 14
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << p.str()
           << "</text>\n";
        os << "<text x=\"" << cx << "\" y=\"" << y0 + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << esc(data[i].label) << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace vtcav
