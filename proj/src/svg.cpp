/*
 Copyright 2026 The balancer-lab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "balancer/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace balancer {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 360.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 48.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string line_plot(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<double>& x,
                      const std::vector<Series>& series) {
    double x_lo = x.empty() ? 0.0 : x.front();
    double x_hi = x.empty() ? 1.0 : x.back();
    double y_lo = std::numeric_limits<double>::infinity();
    double y_hi = -y_lo;
    for (const auto& s : series) {
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    }
    if (!std::isfinite(y_lo)) y_lo = -1.0, y_hi = 1.0;
    if (y_hi - y_lo < 1e-12) y_lo -= 1.0, y_hi += 1.0;
    if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const double w = kWidth - kLeft - kRight;
    const double h = kHeight - kTop - kBottom;
    auto sx = [&](double v) { return kLeft + (v - x_lo) / (x_hi - x_lo) * w; };
    auto sy = [&](double v) { return kTop + (y_hi - v) / (y_hi - y_lo) * h; };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
       << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       << escape(title) << "</text>\n"
       << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << w << "\" height=\"" << h
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
        const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
        os << "<text x=\"" << px(sx(xv)) << "\" y=\"" << px(kTop + h + 16)
           << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
        os << "<text x=\"" << px(kLeft - 6) << "\" y=\"" << px(sy(yv) + 4)
           << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
        os << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(sy(yv)) << "\" x2=\"" << px(kLeft + w)
           << "\" y2=\"" << px(sy(yv)) << "\" stroke=\"#dddddd\"/>\n";
    }
    if (y_lo < 0.0 && y_hi > 0.0) {
        os << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(sy(0.0)) << "\" x2=\""
           << px(kLeft + w) << "\" y2=\"" << px(sy(0.0)) << "\" stroke=\"#888888\"/>\n";
    }
    os << "<text x=\"" << px(kLeft + w / 2) << "\" y=\"" << px(kHeight - 10)
       << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n"
       << "<text x=\"14\" y=\"" << px(kTop + h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << px(kTop + h / 2) << ")\">" << escape(y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % std::size(kColors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        const std::size_t n = std::min(x.size(), s.y.size());
        // Keep files small on long runs.
        const std::size_t stride = std::max<std::size_t>(1, n / 2000);
        for (std::size_t i = 0; i < n; i += stride) {
            if (!std::isfinite(s.y[i])) continue;
            os << px(sx(x[i])) << ',' << px(sy(s.y[i])) << ' ';
        }
        if (n > 0 && (n - 1) % stride != 0 && std::isfinite(s.y[n - 1])) {
            os << px(sx(x[n - 1])) << ',' << px(sy(s.y[n - 1]));
        }
        os << "\"/>\n";
        if (series.size() > 1) {
            os << "<text x=\"" << px(kLeft + w - 4) << "\" y=\"" << px(kTop + 14 + 14.0 * k)
               << "\" text-anchor=\"end\" fill=\"" << color << "\">" << escape(s.label)
               << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<NamedPlot> trajectory_plots(const Trajectory& traj) {
    constexpr double deg = 180.0 / std::numbers::pi;
    std::vector<double> t;
    std::vector<double> cols[5];
    for (const auto& s : traj.samples) {
        t.push_back(s.t);
        for (int i = 0; i < 4; ++i) cols[i].push_back(i < s.x.size() ? s.x(i) * deg : 0.0);
        cols[4].push_back(s.torque);
    }
    return {
        {"roll.svg", line_plot("Roll angle", "t [s]", "x_r [deg]", t, {{"x_r", cols[0]}})},
        {"roll_rate.svg",
         line_plot("Roll rate", "t [s]", "x_r_dot [deg/s]", t, {{"x_r_dot", cols[1]}})},
        {"pendulum.svg", line_plot("Pendulum angle", "t [s]", "n [deg]", t, {{"n", cols[2]}})},
        {"pendulum_rate.svg",
         line_plot("Pendulum rate", "t [s]", "n_dot [deg/s]", t, {{"n_dot", cols[3]}})},
        {"torque.svg", line_plot("Hinge torque", "t [s]", "torque [N m]", t, {{"torque", cols[4]}})},
    };
}

NamedPlot history_plot(const std::vector<GenerationStats>& history) {
    std::vector<double> g;
    Series best{"best", {}};
    Series mean{"mean", {}};
    for (const auto& h : history) {
        g.push_back(static_cast<double>(h.generation));
        best.y.push_back(h.best);
        mean.y.push_back(h.mean);
    }
    return {"history.svg", line_plot("Fitness by generation", "generation", "fitness", g, {best, mean})};
}

}  // namespace balancer
