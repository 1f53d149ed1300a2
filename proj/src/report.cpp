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

#include "balancer/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "balancer/presets.hpp"

namespace balancer {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

int sign_class(double v, double zero_band) {
    if (std::abs(v) < zero_band) return 0;
    return v > 0.0 ? 1 : -1;
}

std::string complex_text(std::complex<double> z) {
    std::string s = format_number(z.real());
    if (z.imag() != 0.0) {
        s += (z.imag() < 0.0 ? "-" : "+") + format_number(std::abs(z.imag())) + "j";
    }
    return s;
}

}  // namespace

std::string metrics_summary(const Metrics& m) {
    std::ostringstream os;
    os << "fallen = " << (m.fallen ? "true" : "false") << '\n'
       << "max_roll_deg = " << fmt("%.4f", m.max_roll * kRadToDeg) << '\n'
       << "max_pend_rate_deg_s = " << fmt("%.2f", m.max_pend_rate * kRadToDeg) << '\n'
       << "max_torque_nm = " << fmt("%.4f", m.max_torque) << '\n'
       << "max_input = " << fmt("%.4f", m.max_input) << '\n'
       << "max_power_w = " << fmt("%.3f", m.max_power) << '\n'
       << "settling_time_s = "
       << (m.settling_time ? fmt("%.3f", *m.settling_time) : std::string("none")) << '\n'
       << "overshoot_deg = " << fmt("%.4f", m.overshoot_deg) << '\n';
    return os.str();
}

std::string format_matrix(const std::string& title, const Eigen::MatrixXd& m,
                          const std::vector<std::string>& row_labels) {
    std::size_t width = 0;
    for (const auto& l : row_labels) width = std::max(width, l.size());
    std::ostringstream os;
    os << title << " =\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << "  ";
        if (!row_labels.empty()) {
            const std::string& l = row_labels[static_cast<std::size_t>(i)];
            os << l << std::string(width - l.size(), ' ') << "  ";
        }
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%10.4f", m(i, j));
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

std::string matrix_file(const LinearModel& m) {
    IniDocument doc;
    auto& info = doc.section("model");
    info.set("kind", m.discrete() ? "discrete" : "continuous");
    if (m.dt) info.set("dt", format_number(*m.dt));
    std::string labels;
    for (std::size_t i = 0; i < m.labels.size(); ++i) labels += (i ? ", " : "") + m.labels[i];
    info.set("states", labels);
    auto rows = [](const Eigen::MatrixXd& x) {
        MatrixRows r(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < x.cols(); ++j) r[i].push_back(x(i, j));
        }
        return r;
    };
    doc.section("matrix.A").rows = rows(m.a);
    doc.section("matrix.B").rows = rows(m.b);
    doc.section("matrix.C").rows = rows(m.c);
    doc.section("matrix.D").rows = rows(m.d);
    return doc.serialize();
}

std::string gain_file(const Synthesis& s) {
    IniDocument doc;
    auto& g = doc.section("gain");
    g.set("method", s.method);
    g.set("sample_dt", s.gain.sample_dt ? format_number(*s.gain.sample_dt) : "none");
    std::string poles;
    for (std::size_t i = 0; i < s.closed_loop.size(); ++i) {
        poles += (i ? ", " : "") + complex_text(s.closed_loop[i]);
    }
    g.set("closed_loop_poles", poles);
    if (s.model.discrete()) {
        g.set("spectral_radius", format_number(s.stability_margin));
    } else {
        g.set("max_real_part", format_number(s.stability_margin));
    }
    if (s.controllability_condition) {
        g.set("controllability_condition", format_number(*s.controllability_condition));
    }
    if (s.riccati) {
        g.set("riccati_iterations", std::to_string(s.iterations));
        g.set("riccati_residual", format_number(s.residual));
    }
    auto& k = doc.section("matrix.K");
    k.rows.emplace_back(s.gain.k.data(), s.gain.k.data() + s.gain.k.size());
    if (s.riccati) {
        auto& p = doc.section("matrix.P");
        for (Eigen::Index i = 0; i < s.riccati->rows(); ++i) {
            std::vector<double> row;
            for (Eigen::Index j = 0; j < s.riccati->cols(); ++j) row.push_back((*s.riccati)(i, j));
            p.rows.push_back(std::move(row));
        }
    }
    return doc.serialize();
}

std::vector<DiscrepancyRow> discrepancy(const LinearModel& continuous,
                                        const std::vector<double>& dts) {
    const LinearModel pub = reference_augmented_model();
    std::vector<DiscrepancyRow> out;
    for (double dt : dts) {
        const LinearModel d = c2d_zoh(continuous, dt);
        DiscrepancyRow r{dt, 0.0, 0.0, 0, d.a(0, 1)};
        if (d.a.rows() == pub.a.rows()) {
            r.a_distance = (d.a - pub.a).norm();
            r.b_distance = (d.b - pub.b).norm();
            for (Eigen::Index i = 0; i < d.a.rows(); ++i) {
                for (Eigen::Index j = 0; j < d.a.cols(); ++j) {
                    if (sign_class(d.a(i, j), 5e-5) == sign_class(pub.a(i, j), 5e-5)) ++r.sign_matches;
                }
            }
        } else {
            r.a_distance = r.b_distance = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(r);
    }
    return out;
}

std::string discrepancy_report(const std::vector<DiscrepancyRow>& rows) {
    const LinearModel pub = reference_augmented_model();
    std::ostringstream os;
    os << "Reference discrete model vs this linearization\n"
       << "reference A(x_r, x_r_dot) = " << fmt("%.4f", pub.a(0, 1))
       << " (a ZOH model has A(x_r, x_r_dot) close to dt)\n\n";
    os << "      dt    A(x_r,x_r_dot)   |A - A_ref|_F   |B - B_ref|_F   sign matches\n";
    const DiscrepancyRow* best = nullptr;
    const DiscrepancyRow* best_a01 = nullptr;
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%8.4g  %16.6f  %14.6g  %14.6g  %9d/25\n", r.dt, r.a01,
                      r.a_distance, r.b_distance, r.sign_matches);
        os << buf;
        if (std::isfinite(r.a_distance) && (!best || r.a_distance < best->a_distance)) best = &r;
        if (!best_a01 || std::abs(r.a01 - pub.a(0, 1)) < std::abs(best_a01->a01 - pub.a(0, 1))) {
            best_a01 = &r;
        }
    }
    if (best) {
        os << "\nbest matching dt = " << format_number(best->dt) << " (smallest |A - A_ref|_F)\n"
           << "dt matching A(x_r, x_r_dot) = " << format_number(best_a01->dt) << '\n';
    } else {
        os << "\nno 5-state model to compare\n";
    }
    os << "stated sample time = 0.01 s\n";
    return os.str();
}

std::vector<CompareRow> run_comparison() {
    struct Item {
        const char* label;
        const char* preset;
        const char* expectation;
    };
    const Item items[] = {
        {"lateral @ 30 deg/s", "lateral-30deg", "stable, max n_dot ~330 deg/s"},
        {"vertical @ 3 deg/s", "vertical-3deg", "stable, max n_dot ~450 deg/s"},
        {"vertical @ 15 deg/s", "vertical-15deg", "fallen"},
        {"lateral heavy bike @ 6 deg", "lateral-motorcycle-6deg", "stable"},
    };
    std::vector<CompareRow> rows;
    for (const auto& it : items) {
        const RunResult r = run_experiment(load_preset(it.preset));
        rows.push_back({it.label, it.preset, r.metrics, it.expectation});
    }
    return rows;
}

std::string compare_report(const std::vector<CompareRow>& rows) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-28s %-7s %14s %12s %10s  %s\n", "scenario", "result",
                  "max n_dot[d/s]", "max T[N m]", "settle[s]", "expected");
    os << buf;
    for (const auto& r : rows) {
        const std::string settle =
            r.metrics.settling_time ? fmt("%.3f", *r.metrics.settling_time) : "-";
        std::snprintf(buf, sizeof buf, "%-28s %-7s %14.1f %12.2f %10s  %s\n", r.label.c_str(),
                      r.metrics.fallen ? "fallen" : "stable", r.metrics.max_pend_rate * kRadToDeg,
                      r.metrics.max_torque, settle.c_str(), r.expectation.c_str());
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "handlebar steering only: recovers from %.1f deg initial roll\n",
                  kHandlebarLimitDeg);
    os << buf;
    return os.str();
}

}  // namespace balancer
