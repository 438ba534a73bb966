#pragma once

#include <string>
#include <vector>

namespace vtcav {

struct BarDatum {
    std::string label;
    double value = 0.0;  // expected in [0,1]
};

// Grouped score bars for one layer, SVG.
void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<BarDatum>& bars);

struct SignificanceDatum {
    std::string label;
    std::vector<double> scores;  // per-random-set scores
    double p_value = 1.0;
    bool significant = false;
};

// Score distributions (one dot per random set) with p-values.
void write_significance_svg(const std::string& path, const std::string& title,
                            const std::vector<SignificanceDatum>& data);

}  // namespace vtcav
