#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ob::svg {

namespace {

constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 55;

std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", v);
    return b;
}

std::string tick(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

void range(const std::vector<Series>& ss, bool xaxis, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& s : ss)
        for (double v : xaxis ? s.x : s.y)
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-300) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
}

}  // namespace

std::string plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel, bool zero_line) {
    double x0, x1, y0, y1;
    range(series, true, x0, x1);
    range(series, false, y0, y1);
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        o << "<text x=\"" << num(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << tick(xv)
          << "</text>\n";
        o << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
          << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape(xlabel)
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << escape(ylabel) << "</text>\n";
    if (zero_line && y0 < 0 && y1 > 0)
        o << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << num(py(0)) << "\" y2=\"" << num(py(0))
          << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    int row = 0;
    for (const auto& s : series) {
        if (s.points) {
            for (size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                    o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\""
                      << s.color << "\"/>\n";
        } else {
            o << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << s.color << "\" points=\"";
            for (size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
            o << "\"/>\n";
        }
        if (!s.label.empty()) {
            const double ly = T + 14 + 16 * row++;
            o << "<rect x=\"" << W - R - 150 << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" fill=\""
              << s.color << "\"/>\n";
            o << "<text x=\"" << W - R - 134 << "\" y=\"" << ly + 1 << "\">" << escape(s.label) << "</text>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace ob::svg
