// svg.hpp
#pragma once
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "errors.hpp"
#include "harness.hpp"

namespace adasense {

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline const char* series_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    return palette[i % 6];
}

} // namespace detail

// Line chart of risk against mu; each bound becomes a dashed vertical line
// with a legend entry. Several curves share the axes (one per sparsity in a
// phase diagram).
inline std::string render_svg(const std::vector<RiskCurve>& curves, const std::vector<BoundSpec>& bounds = {}) {
    std::size_t total = 0;
    for (const auto& c : curves) total += c.points.size();
    if (total == 0) throw EmptyCurve("cannot render an empty curve");

    const double W = 640, H = 420, left = 70, right = 180, top = 30, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymax = 0.0;
    for (const auto& c : curves)
        for (const auto& p : c.points) {
            xmin = std::min(xmin, p.mu);
            xmax = std::max(xmax, p.mu);
            ymax = std::max(ymax, p.risk + p.se);
        }
    for (const auto& b : bounds) {
        xmin = std::min(xmin, b.value);
        xmax = std::max(xmax, b.value);
    }
    if (xmax <= xmin) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    ymax = ymax > 0.0 ? ymax * 1.05 : 1.0;
    auto X = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double v) { return top + ph - v / ymax * ph; };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

    // axes and ticks
    os << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
       << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(top + ph) << "\" x2=\""
       << detail::num(left + pw) << "\" y2=\"" << detail::num(top + ph) << "\"/>\n"
       << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(top) << "\" x2=\"" << detail::num(left)
       << "\" y2=\"" << detail::num(top + ph) << "\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 5.0, yv = ymax * k / 5.0;
        os << "<line x1=\"" << detail::num(X(xv)) << "\" y1=\"" << detail::num(top + ph) << "\" x2=\""
           << detail::num(X(xv)) << "\" y2=\"" << detail::num(top + ph + 5) << "\"/>\n"
           << "<line x1=\"" << detail::num(left - 5) << "\" y1=\"" << detail::num(Y(yv)) << "\" x2=\""
           << detail::num(left) << "\" y2=\"" << detail::num(Y(yv)) << "\"/>\n";
    }
    os << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 5.0, yv = ymax * k / 5.0;
        os << "<text x=\"" << detail::num(X(xv)) << "\" y=\"" << detail::num(top + ph + 18)
           << "\" text-anchor=\"middle\">" << detail::tick_label(xv) << "</text>\n"
           << "<text x=\"" << detail::num(left - 8) << "\" y=\"" << detail::num(Y(yv) + 4)
           << "\" text-anchor=\"end\">" << detail::tick_label(yv) << "</text>\n";
    }
    os << "<text id=\"xlabel\" x=\"" << detail::num(left + pw / 2) << "\" y=\"" << detail::num(H - 15)
       << "\" text-anchor=\"middle\" font-size=\"14\">\xce\xbc</text>\n"
       << "<text id=\"ylabel\" x=\"18\" y=\"" << detail::num(top + ph / 2)
       << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 " << detail::num(top + ph / 2)
       << ")\">risk</text>\n</g>\n";

    // data
    std::size_t legend_row = 0;
    auto legend = [&](const std::string& color, const std::string& label, bool dashed) {
        const double ly = top + 10 + 18 * static_cast<double>(legend_row++);
        const double lx = left + pw + 15;
        os << "<line class=\"legend\" x1=\"" << detail::num(lx) << "\" y1=\"" << detail::num(ly) << "\" x2=\""
           << detail::num(lx + 20) << "\" y2=\"" << detail::num(ly) << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"" << (dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n"
           << "<text class=\"legend\" x=\"" << detail::num(lx + 26) << "\" y=\"" << detail::num(ly + 4)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << detail::xml_escape(label) << "</text>\n";
    };
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& pts = curves[ci].points;
        if (pts.empty()) continue;
        const char* color = detail::series_color(ci);
        os << "<g class=\"series\" stroke=\"" << color << "\" fill=\"" << color << "\">\n";
        if (pts.size() > 1) {
            os << "<polyline fill=\"none\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i)
                os << (i ? " " : "") << detail::num(X(pts[i].mu)) << ',' << detail::num(Y(pts[i].risk));
            os << "\"/>\n";
        }
        for (const auto& p : pts) {
            if (p.se > 0.0)
                os << "<line class=\"errorbar\" x1=\"" << detail::num(X(p.mu)) << "\" y1=\""
                   << detail::num(Y(std::max(0.0, p.risk - p.se))) << "\" x2=\"" << detail::num(X(p.mu))
                   << "\" y2=\"" << detail::num(Y(p.risk + p.se)) << "\" stroke-width=\"1\"/>\n";
            os << "<circle class=\"marker\" cx=\"" << detail::num(X(p.mu)) << "\" cy=\"" << detail::num(Y(p.risk))
               << "\" r=\"3\"/>\n";
        }
        os << "</g>\n";
        legend(color, "s = " + std::to_string(pts.front().s), false);
    }
    for (std::size_t bi = 0; bi < bounds.size(); ++bi) {
        const auto& b = bounds[bi];
        const char* color = bi % 2 == 0 ? "#444444" : "#999999";
        os << "<line class=\"bound\" x1=\"" << detail::num(X(b.value)) << "\" y1=\"" << detail::num(top)
           << "\" x2=\"" << detail::num(X(b.value)) << "\" y2=\"" << detail::num(top + ph) << "\" stroke=\"" << color
           << "\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"/>\n";
        legend(color, b.name + " = " + detail::tick_label(b.value), true);
    }
    os << "</svg>\n";
    return os.str();
}

inline std::string render_svg(const RiskCurve& curve, const std::vector<BoundSpec>& bounds = {}) {
    return render_svg(std::vector<RiskCurve>{curve}, bounds);
}

} // namespace adasense
