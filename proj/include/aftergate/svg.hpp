// Copyright 2026 The aftergate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "aftergate/errors.hpp"

// Minimal hand-written SVG plots. One plot area with linear or log axes;
// series are drawn in data coordinates.

namespace aftergate::svg {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;
    std::string label;
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::string escape(const std::string &text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '&':
            out += "&amp;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

class Plot {
  public:
    Plot(std::string title, Axis x, Axis y) : title_(std::move(title)), x_(std::move(x)), y_(std::move(y)) {
        for (const Axis *a : {&x_, &y_}) {
            detail::require(a->hi > a->lo && (!a->log || a->lo > 0.0), "svg: invalid axis range");
        }
    }

    double px(double x) const { return left_ + width_ * frac(x_, x); }
    double py(double y) const { return top_ + height_ * (1.0 - frac(y_, y)); }

    void line(const std::vector<std::pair<double, double>> &points, const std::string &color,
              const std::string &legend = {}) {
        std::string path;
        bool pen_down = false;
        for (const auto &[x, y] : points) {
            if (!std::isfinite(x) || !std::isfinite(y) || (y_.log && y <= 0.0) || (x_.log && x <= 0.0)) {
                pen_down = false;
                continue;
            }
            path += (pen_down ? " L" : " M") + fmt(px(x)) + ',' + fmt(py(clamp_y(y)));
            pen_down = true;
        }
        body_ += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        add_legend(legend, color);
    }

    void hline(double y, const std::string &color, const std::string &legend = {}) {
        body_ += "<line x1=\"" + fmt(left_) + "\" x2=\"" + fmt(left_ + width_) + "\" y1=\"" + fmt(py(y)) +
                 "\" y2=\"" + fmt(py(y)) + "\" stroke=\"" + color + "\" stroke-dasharray=\"6,4\"/>\n";
        add_legend(legend, color);
    }

    /// Filled rectangle in data coordinates.
    void rect(double x0, double x1, double y0, double y1, const std::string &fill, double opacity = 1.0) {
        const double a = px(x0), b = px(x1), c = py(clamp_y(y1)), d = py(clamp_y(y0));
        body_ += "<rect x=\"" + fmt(std::min(a, b)) + "\" y=\"" + fmt(std::min(c, d)) + "\" width=\"" +
                 fmt(std::abs(b - a)) + "\" height=\"" + fmt(std::abs(d - c)) + "\" fill=\"" + fill +
                 "\" fill-opacity=\"" + fmt(opacity) + "\"/>\n";
    }

    /// Vertical bars centred on integer positions, drawn up from the axis floor.
    void bars(const std::vector<double> &values, const std::string &fill) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0) || (y_.log && values[i] < y_.lo)) {
                continue;
            }
            rect(static_cast<double>(i) - 0.4, static_cast<double>(i) + 0.4, y_.lo, values[i], fill);
        }
    }

    void segment(double x0, double y0, double x1, double y1, const std::string &color, double width = 2.0) {
        body_ += "<line x1=\"" + fmt(px(x0)) + "\" y1=\"" + fmt(py(y0)) + "\" x2=\"" + fmt(px(x1)) + "\" y2=\"" +
                 fmt(py(y1)) + "\" stroke=\"" + color + "\" stroke-width=\"" + fmt(width) + "\"/>\n";
    }

    std::string render() const {
        std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(total_w_) + "\" height=\"" +
                          fmt(total_h_) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
        out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out += "<text x=\"" + fmt(total_w_ / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
               escape(title_) + "</text>\n";
        out += "<clipPath id=\"area\"><rect x=\"" + fmt(left_) + "\" y=\"" + fmt(top_) + "\" width=\"" +
               fmt(width_) + "\" height=\"" + fmt(height_) + "\"/></clipPath>\n";
        out += "<g clip-path=\"url(#area)\">\n" + body_ + "</g>\n";
        out += "<rect x=\"" + fmt(left_) + "\" y=\"" + fmt(top_) + "\" width=\"" + fmt(width_) + "\" height=\"" +
               fmt(height_) + "\" fill=\"none\" stroke=\"black\"/>\n";
        out += ticks();
        out += "<text x=\"" + fmt(left_ + width_ / 2) + "\" y=\"" + fmt(total_h_ - 8) +
               "\" text-anchor=\"middle\">" + escape(x_.label) + "</text>\n";
        out += "<text transform=\"translate(16," + fmt(top_ + height_ / 2) +
               ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_.label) + "</text>\n";
        out += legend_;
        out += "</svg>\n";
        return out;
    }

  private:
    static double frac(const Axis &a, double v) {
        if (a.log) {
            return (std::log10(v) - std::log10(a.lo)) / (std::log10(a.hi) - std::log10(a.lo));
        }
        return (v - a.lo) / (a.hi - a.lo);
    }

    double clamp_y(double y) const { return std::clamp(y, y_.lo, y_.hi); }

    static std::vector<double> tick_values(const Axis &a) {
        std::vector<double> out;
        if (a.log) {
            for (double e = std::ceil(std::log10(a.lo)); e <= std::floor(std::log10(a.hi)); e += 1.0) {
                out.push_back(std::pow(10.0, e));
            }
            return out;
        }
        const double raw = (a.hi - a.lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {2.0, 5.0, 10.0}) {
            if (step < raw) {
                step = m * mag;
            }
        }
        for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * step; v += step) {
            out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
        }
        return out;
    }

    std::string ticks() const {
        std::string out;
        for (double v : tick_values(x_)) {
            const double x = px(v);
            out += "<line x1=\"" + fmt(x) + "\" x2=\"" + fmt(x) + "\" y1=\"" + fmt(top_ + height_) + "\" y2=\"" +
                   fmt(top_ + height_ + 4) + "\" stroke=\"black\"/>\n";
            out += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(top_ + height_ + 16) + "\" text-anchor=\"middle\">" +
                   tick_label(v) + "</text>\n";
        }
        for (double v : tick_values(y_)) {
            const double y = py(v);
            out += "<line x1=\"" + fmt(left_ - 4) + "\" x2=\"" + fmt(left_) + "\" y1=\"" + fmt(y) + "\" y2=\"" +
                   fmt(y) + "\" stroke=\"black\"/>\n";
            out += "<text x=\"" + fmt(left_ - 6) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">" +
                   tick_label(v) + "</text>\n";
        }
        return out;
    }

    void add_legend(const std::string &text, const std::string &color) {
        if (text.empty()) {
            return;
        }
        const double y = top_ + 14 + 16 * legend_count_++;
        const double x = left_ + width_ - 150;
        legend_ += "<line x1=\"" + fmt(x) + "\" x2=\"" + fmt(x + 20) + "\" y1=\"" + fmt(y - 4) + "\" y2=\"" +
                   fmt(y - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        legend_ += "<text x=\"" + fmt(x + 26) + "\" y=\"" + fmt(y) + "\">" + escape(text) + "</text>\n";
    }

    std::string title_;
    Axis x_;
    Axis y_;
    std::string body_;
    std::string legend_;
    int legend_count_ = 0;
    double total_w_ = 720.0;
    double total_h_ = 440.0;
    double left_ = 70.0;
    double top_ = 36.0;
    double width_ = 620.0;
    double height_ = 350.0;
};

/// Maps t in [0, 1] onto a dark-blue to yellow ramp.
inline std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(30 + 225 * t));
    const int g = static_cast<int>(std::lround(40 + 200 * t));
    const int b = static_cast<int>(std::lround(120 - 90 * t));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace aftergate::svg
