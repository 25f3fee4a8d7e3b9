#include "niuq/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace niuq::cli {

namespace {

constexpr double kW = 720.0, kH = 480.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void pad() {
        if (!(lo < hi)) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

}  // namespace

void emit_plot(const PlotData& d, const std::string& path) {
    if (d.x.size() != d.mean.size() || (!d.std.empty() && d.std.size() != d.x.size()) ||
        (!d.reference.empty() && d.reference.size() != d.x.size()) ||
        d.scatter_x.size() != d.scatter_y.size())
        throw ShapeError("emit_plot: inconsistent series lengths");
    if (d.x.empty()) throw ShapeError("emit_plot: empty grid");

    Range rx, ry;
    for (double v : d.x) rx.add(v);
    for (double v : d.scatter_x) rx.add(v);
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        ry.add(d.mean[i]);
        if (!d.std.empty()) {
            ry.add(d.mean[i] + 2.0 * d.std[i]);
            ry.add(d.mean[i] - 2.0 * d.std[i]);
        }
        if (!d.reference.empty()) ry.add(d.reference[i]);
    }
    for (double v : d.scatter_y) ry.add(v);
    rx.pad();
    ry.pad();

    auto px = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * (kW - kLeft - kRight); };
    auto py = [&](double v) { return kH - kBottom - (v - ry.lo) / (ry.hi - ry.lo) * (kH - kTop - kBottom); };

    auto polyline = [&](const std::vector<double>& ys, const char* style) {
        std::ostringstream s;
        s << "<polyline fill=\"none\" " << style << " points=\"";
        for (std::size_t i = 0; i < d.x.size(); ++i)
            s << num(px(d.x[i])) << "," << num(py(ys[i])) << " ";
        s << "\"/>\n";
        return s.str();
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    svg << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";

    // axes
    svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kH - kBottom) << "\" x2=\""
        << num(kW - kRight) << "\" y2=\"" << num(kH - kBottom) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
        << "\" y2=\"" << num(kH - kBottom) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        svg << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kH - kBottom + 18.0)
            << "\" font-size=\"11\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
        svg << "<text x=\"" << num(kLeft - 6.0) << "\" y=\"" << num(py(fy) + 4.0)
            << "\" font-size=\"11\" text-anchor=\"end\">" << num(fy) << "</text>\n";
    }
    svg << "<text x=\"" << num((kLeft + kW - kRight) / 2.0) << "\" y=\"" << num(kH - 12.0)
        << "\" font-size=\"13\" text-anchor=\"middle\">" << d.xlabel << "</text>\n";
    svg << "<text x=\"16\" y=\"" << num((kTop + kH - kBottom) / 2.0)
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num((kTop + kH - kBottom) / 2.0) << ")\">" << d.ylabel << "</text>\n";
    if (!d.title.empty())
        svg << "<text x=\"" << num(kW / 2.0)
            << "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" << d.title << "</text>\n";

    // +/- 2 std band
    if (!d.std.empty()) {
        std::ostringstream band;
        band << "<polygon fill=\"#7aa3d6\" fill-opacity=\"0.35\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < d.x.size(); ++i)
            band << num(px(d.x[i])) << "," << num(py(d.mean[i] + 2.0 * d.std[i])) << " ";
        for (std::size_t i = d.x.size(); i-- > 0;)
            band << num(px(d.x[i])) << "," << num(py(d.mean[i] - 2.0 * d.std[i])) << " ";
        band << "\"/>\n";
        svg << band.str();
    }

    if (!d.reference.empty())
        svg << polyline(d.reference, "stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"");
    svg << polyline(d.mean, "stroke=\"#1f4e9c\" stroke-width=\"2\"");

    for (std::size_t i = 0; i < d.scatter_x.size(); ++i)
        svg << "<circle cx=\"" << num(px(d.scatter_x[i])) << "\" cy=\"" << num(py(d.scatter_y[i]))
            << "\" r=\"3.5\" fill=\"#c23b22\"/>\n";

    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_plot: cannot write " + path);
    out << svg.str();
    if (!out) throw IoError("emit_plot: write failed: " + path);
}

}  // namespace niuq::cli
