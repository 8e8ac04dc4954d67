#pragma once

#include <string>
#include <vector>

namespace ob::svg {

struct Series {
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool points = false;  // markers instead of a polyline
    std::string label;
};

// Fixed-size plot with axes, ticks and a legend. Output depends only on the
// data, so reruns produce identical files.
std::string plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel, bool zero_line = false);

}  // namespace ob::svg
