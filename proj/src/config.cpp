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

#include "balancer/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "balancer/errors.hpp"
#include "balancer/presets.hpp"

namespace balancer {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string strip_comment(std::string_view line) {
    // '#' or ';' starts a comment at line start or after whitespace.
    for (std::size_t i = 0; i < line.size(); ++i) {
        if ((line[i] == '#' || line[i] == ';') &&
            (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
            return trim(line.substr(0, i));
        }
    }
    return trim(line);
}

std::optional<double> to_double(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

std::optional<std::complex<double>> to_complex(std::string_view raw) {
    std::string s;
    for (char c : raw) {
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    }
    if (s.empty()) return std::nullopt;
    if (s.back() != 'j' && s.back() != 'i') {
        if (auto v = to_double(s)) return std::complex<double>(*v, 0.0);
        return std::nullopt;
    }
    s.pop_back();
    // Split at the last sign that is not leading and not an exponent sign.
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            const auto re = to_double(s.substr(0, i));
            const std::string im_text = s.substr(i);
            const auto im = im_text.size() == 1 ? std::optional<double>(im_text == "-" ? -1.0 : 1.0)
                                                : to_double(im_text);
            if (re && im) return std::complex<double>(*re, *im);
            return std::nullopt;
        }
    }
    if (auto im = to_double(s)) return std::complex<double>(0.0, *im);
    return std::nullopt;
}

std::string format_complex(std::complex<double> z) {
    if (z.imag() == 0.0) return format_number(z.real());
    const std::string im = format_number(std::abs(z.imag()));
    return format_number(z.real()) + (z.imag() < 0.0 ? "-" : "+") + im + "j";
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += fmt(xs[i]);
    }
    return out;
}

// Reads typed values out of one section and rejects unknown keys.
class SectionReader {
public:
    SectionReader(const IniSection* section, std::string name)
        : section_(section), name_(std::move(name)) {}

    bool present() const { return section_ != nullptr; }

    std::optional<std::string> text(const std::string& key) {
        seen_.insert(key);
        if (!section_) return std::nullopt;
        if (const auto* v = section_->find(key)) return *v;
        return std::nullopt;
    }

    void number(const std::string& key, double& out) {
        if (auto v = text(key)) out = parse_number(key, *v);
    }

    void optional_number(const std::string& key, std::optional<double>& out) {
        if (auto v = text(key)) {
            const std::string t = trim(*v);
            out = (t == "none" || t.empty()) ? std::nullopt
                                             : std::optional<double>(parse_number(key, t));
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) {
        if (auto v = text(key)) {
            const std::string t = trim(*v);
            Int value{};
            const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
            if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
                fail(key, "expected a non-negative integer, got '" + t + "'");
            }
            out = value;
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (auto v = text(key)) {
            const std::string t = trim(*v);
            if (t == "true" || t == "yes" || t == "1") {
                out = true;
            } else if (t == "false" || t == "no" || t == "0") {
                out = false;
            } else {
                fail(key, "expected true or false");
            }
        }
    }

    void list(const std::string& key, std::vector<double>& out) {
        if (auto v = text(key)) {
            out.clear();
            for (const auto& item : split_list(*v)) out.push_back(parse_number(key, item));
        }
    }

    void complex_list(const std::string& key, std::vector<std::complex<double>>& out) {
        if (auto v = text(key)) {
            out.clear();
            for (const auto& item : split_list(*v)) {
                auto z = to_complex(item);
                if (!z) fail(key, "cannot parse '" + item + "' as a number");
                out.push_back(*z);
            }
        }
    }

    /// Throws if the section holds keys nobody asked for.
    void finish() const {
        if (!section_) return;
        for (const auto& [key, value] : section_->entries) {
            if (!seen_.contains(key)) fail(key, "unknown key");
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const {
        throw ConfigError(name_ + "." + key + ": " + why);
    }

private:
    double parse_number(const std::string& key, const std::string& text) const {
        auto v = to_double(text);
        if (!v) fail(key, "cannot parse '" + trim(text) + "' as a number");
        return *v;
    }

    const IniSection* section_;
    std::string name_;
    std::set<std::string> seen_;
};

bool same(const SimConfig& a, const SimConfig& b) {
    return a.dt == b.dt && a.t_end == b.t_end && a.fall_threshold == b.fall_threshold &&
           a.torque_limit == b.torque_limit && a.voltage_limit == b.voltage_limit;
}

bool same(const GaConfig& a, const GaConfig& b) {
    return a.population == b.population && a.generations == b.generations &&
           a.crossover_rate == b.crossover_rate && a.mutation_rate == b.mutation_rate &&
           a.mutation_scale == b.mutation_scale && a.elitism == b.elitism &&
           a.tournament == b.tournament && a.blend_alpha == b.blend_alpha && a.seed == b.seed &&
           a.threads == b.threads;
}

std::string_view to_string(ParamRole role) {
    switch (role) {
        case ParamRole::PlantParameter: return "plant-parameter";
        case ParamRole::Pole: return "pole";
        case ParamRole::LqrWeight: return "lqr-weight";
        case ParamRole::Free: return "free";
    }
    return "free";
}

ParamRole parse_role(const std::string& s) {
    if (s == "plant-parameter") return ParamRole::PlantParameter;
    if (s == "pole") return ParamRole::Pole;
    if (s == "lqr-weight") return ParamRole::LqrWeight;
    if (s == "free") return ParamRole::Free;
    throw ConfigError("unknown parameter role '" + s + "'");
}

MatrixRows read_matrix(const IniDocument& doc, const std::string& name) {
    const auto* s = doc.find("matrix." + name);
    return s ? s->rows : MatrixRows{};
}

void write_matrix(IniDocument& doc, const std::string& name, const MatrixRows& rows) {
    if (rows.empty()) return;
    doc.section("matrix." + name).rows = rows;
}

double* lateral_field(LateralPlant& p, std::string_view key) {
    if (key == "m_n") return &p.m_n;
    if (key == "h_n") return &p.h_n;
    if (key == "l_p") return &p.l_p;
    if (key == "ixx") return &p.ixx;
    if (key == "iyy") return &p.iyy;
    if (key == "izz") return &p.izz;
    if (key == "i_r") return &p.i_r;
    if (key == "mass_bike") return &p.mass_bike;
    if (key == "h_com") return &p.h_com;
    if (key == "g") return &p.g;
    return nullptr;
}

double* vertical_field(VerticalPlant& p, std::string_view key) {
    if (key == "m1") return &p.m1;
    if (key == "m2") return &p.m2;
    if (key == "l1") return &p.l1;
    if (key == "lg1") return &p.lg1;
    if (key == "lg2") return &p.lg2;
    if (key == "i1") return &p.i1;
    if (key == "i2") return &p.i2;
    if (key == "g0") return &p.g0;
    return nullptr;
}

constexpr std::string_view kLateralKeys[] = {"m_n", "h_n", "l_p", "ixx", "iyy",
                                             "izz", "i_r", "mass_bike", "h_com", "g"};
constexpr std::string_view kVerticalKeys[] = {"m1", "m2", "l1", "lg1", "lg2", "i1", "i2", "g0"};

}  // namespace

// -----------------------------------------------------------------------------
// IniDocument
// -----------------------------------------------------------------------------

const std::string* IniSection::find(std::string_view key) const {
    for (const auto& [k, v] : entries) {
        if (k == key) return &v;
    }
    return nullptr;
}

void IniSection::set(std::string key, std::string value) {
    for (auto& [k, v] : entries) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries.emplace_back(std::move(key), std::move(value));
}

IniDocument IniDocument::parse(std::string_view text) {
    IniDocument doc;
    IniSection* current = nullptr;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto error = [&](const std::string& why) {
            return ConfigError("line " + std::to_string(line_no) + ": " + why);
        };

        const std::string line = strip_comment(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw error("unterminated section header");
            const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
            if (name.empty()) throw error("empty section name");
            if (doc.find(name)) throw error("duplicate section [" + name + "]");
            doc.sections_.push_back({name, {}, {}});
            current = &doc.sections_.back();
            continue;
        }
        if (!current) throw error("entry outside of any section");
        if (current->is_matrix()) {
            std::string normalized = line;
            std::replace(normalized.begin(), normalized.end(), ',', ' ');
            std::istringstream is(normalized);
            std::vector<double> row;
            std::string token;
            while (is >> token) {
                auto v = to_double(token);
                if (!v) throw error("bad matrix entry '" + token + "'");
                row.push_back(*v);
            }
            if (!current->rows.empty() && current->rows.front().size() != row.size()) {
                throw error("ragged matrix row in [" + current->name + "]");
            }
            current->rows.push_back(std::move(row));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw error("expected key = value");
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw error("empty key");
        if (current->find(key)) throw error("duplicate key '" + key + "'");
        current->entries.emplace_back(std::move(key), std::move(value));
    }
    return doc;
}

std::string IniDocument::serialize() const {
    std::string out;
    for (const auto& s : sections_) {
        if (!out.empty()) out += '\n';
        out += '[' + s.name + "]\n";
        for (const auto& [k, v] : s.entries) out += k + " = " + v + '\n';
        for (const auto& row : s.rows) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (j) out += ' ';
                out += format_number(row[j]);
            }
            out += '\n';
        }
    }
    return out;
}

const IniSection* IniDocument::find(std::string_view name) const {
    for (const auto& s : sections_) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

IniSection& IniDocument::section(std::string_view name) {
    for (auto& s : sections_) {
        if (s.name == name) return s;
    }
    sections_.push_back({std::string(name), {}, {}});
    return sections_.back();
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// -----------------------------------------------------------------------------
// ExperimentConfig
// -----------------------------------------------------------------------------

namespace {

// Shortest degree string that reads back to exactly `rad`.
std::string format_degrees(double rad) {
    if (!std::isfinite(rad)) return format_number(rad / kDeg);
    double d = rad / kDeg;
    for (int i = 0; i < 4; ++i) d = std::nextafter(d, -std::numeric_limits<double>::infinity());
    std::string best;
    for (int i = 0; i < 9; ++i, d = std::nextafter(d, std::numeric_limits<double>::infinity())) {
        const std::string s = format_number(d);
        if (d * kDeg == rad && (best.empty() || s.size() < best.size())) best = s;
    }
    return best.empty() ? format_number(rad / kDeg) : best;
}

}  // namespace

std::string_view to_string(PlantKind kind) {
    switch (kind) {
        case PlantKind::Lateral: return "lateral";
        case PlantKind::Vertical: return "vertical";
        case PlantKind::LateralMotorcycle: return "lateral-motorcycle";
        case PlantKind::Linear: return "linear";
    }
    return "lateral";
}

std::string_view to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::None: return "none";
        case ControllerKind::Poles: return "poles";
        case ControllerKind::Dlqr: return "dlqr";
        case ControllerKind::Clqr: return "clqr";
        case ControllerKind::Gain: return "gain";
    }
    return "none";
}

Eigen::Index ExperimentConfig::state_dim() const {
    switch (plant.kind) {
        case PlantKind::Linear: return static_cast<Eigen::Index>(plant.a.size());
        case PlantKind::Vertical: return 4;
        default: return plant.motor ? 5 : 4;
    }
}

Eigen::VectorXd ExperimentConfig::initial_vector() const {
    const auto n = state_dim();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    const double values[] = {initial.x_r_deg * kDeg, initial.x_r_dot_deg * kDeg,
                             initial.n_deg * kDeg, initial.n_dot_deg * kDeg, initial.u_torque};
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(n, 5); ++i) x(i) = values[i];
    return x;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    try {
        switch (plant.kind) {
            case PlantKind::Lateral:
            case PlantKind::LateralMotorcycle: plant.lateral.validate(); break;
            case PlantKind::Vertical: plant.vertical.validate(); break;
            case PlantKind::Linear: {
                const auto n = plant.a.size();
                if (n == 0) fail("matrix.A is required for a linear plant");
                for (const auto& row : plant.a) {
                    if (row.size() != n) fail("matrix.A must be square");
                }
                if (plant.b.size() != n || plant.b.front().size() != 1) {
                    fail("matrix.B must be n x 1");
                }
                break;
            }
        }
        if (plant.motor) {
            if (plant.kind == PlantKind::Vertical || plant.kind == PlantKind::Linear) {
                fail("motor: only lateral plants take the motor model");
            }
            plant.motor->validate();
        }
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("plant: ") + e.what());
    }

    try {
        sim.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(e.what());
    }

    const auto n = static_cast<std::size_t>(state_dim());
    switch (controller.kind) {
        case ControllerKind::None: break;
        case ControllerKind::Poles:
            if (controller.poles.size() != n) {
                fail("controller.poles: need " + std::to_string(n) + " poles");
            }
            break;
        case ControllerKind::Dlqr:
        case ControllerKind::Clqr:
            if (controller.q_diag.size() != n) {
                fail("controller.q: need " + std::to_string(n) + " diagonal weights");
            }
            if (std::any_of(controller.q_diag.begin(), controller.q_diag.end(),
                            [](double q) { return !(q >= 0.0) || !std::isfinite(q); })) {
                fail("controller.q: weights must be finite and >= 0");
            }
            if (!(controller.r > 0.0)) fail("controller.r: must be > 0");
            break;
        case ControllerKind::Gain:
            if (controller.gain.size() != n) {
                fail("controller.gain: need " + std::to_string(n) + " entries");
            }
            break;
    }
    if (controller.sample_dt) {
        if (!(*controller.sample_dt > 0.0)) fail("controller.sample_dt: must be > 0");
        const double ratio = *controller.sample_dt / sim.dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
            fail("controller.sample_dt: must be an integer multiple of sim.dt");
        }
    }
    for (double dt : linearize_dts) {
        if (!(dt > 0.0)) fail("linearize.dt: must be > 0");
    }
    if (trajectory_file.empty()) fail("experiment.trajectory: must not be empty");
}

bool operator==(const OptimizeSpec& a, const OptimizeSpec& b) {
    if (a.params.size() != b.params.size()) return false;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        const auto& p = a.params[i];
        const auto& q = b.params[i];
        if (p.name != q.name || p.lo != q.lo || p.hi != q.hi || p.role != q.role) return false;
    }
    return a.objective == b.objective && a.weights.roll == b.weights.roll &&
           a.weights.pend_rate == b.weights.pend_rate && same(a.ga, b.ga) &&
           a.refine == b.refine && a.refine_step == b.refine_step &&
           a.refine_tol == b.refine_tol && a.constant_value == b.constant_value;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.name == b.name && a.plant == b.plant && a.controller == b.controller &&
           a.initial == b.initial && same(a.sim, b.sim) && a.linearize_dts == b.linearize_dts &&
           a.optimize == b.optimize && a.trajectory_file == b.trajectory_file && a.svg == b.svg;
}

ExperimentConfig parse_config(std::string_view text) {
    const IniDocument doc = IniDocument::parse(text);
    ExperimentConfig cfg;

    static const std::set<std::string> kKnown{"experiment", "plant", "motor", "controller",
                                              "initial", "sim", "linearize", "optimize"};
    for (const auto& s : doc.sections()) {
        if (s.is_matrix() || s.name.starts_with("param.")) continue;
        if (!kKnown.contains(s.name)) throw ConfigError("unknown section [" + s.name + "]");
    }

    {
        SectionReader r(doc.find("experiment"), "experiment");
        if (auto v = r.text("name")) cfg.name = trim(*v);
        if (auto v = r.text("trajectory")) cfg.trajectory_file = trim(*v);
        r.boolean("svg", cfg.svg);
        r.finish();
    }

    {
        SectionReader r(doc.find("plant"), "plant");
        if (auto v = r.text("kind")) {
            const std::string k = trim(*v);
            if (k == "lateral") {
                cfg.plant.kind = PlantKind::Lateral;
            } else if (k == "vertical") {
                cfg.plant.kind = PlantKind::Vertical;
            } else if (k == "lateral-motorcycle") {
                cfg.plant.kind = PlantKind::LateralMotorcycle;
                cfg.plant.lateral = handlebar_study_plant();
            } else if (k == "linear") {
                cfg.plant.kind = PlantKind::Linear;
            } else {
                r.fail("kind", "expected lateral, vertical, lateral-motorcycle or linear");
            }
        }
        if (cfg.plant.kind == PlantKind::Lateral || cfg.plant.kind == PlantKind::LateralMotorcycle) {
            for (auto key : kLateralKeys) {
                r.number(std::string(key), *lateral_field(cfg.plant.lateral, key));
            }
        } else if (cfg.plant.kind == PlantKind::Vertical) {
            for (auto key : kVerticalKeys) {
                r.number(std::string(key), *vertical_field(cfg.plant.vertical, key));
            }
        }
        r.finish();
        if (cfg.plant.kind == PlantKind::Linear) {
            cfg.plant.a = read_matrix(doc, "A");
            cfg.plant.b = read_matrix(doc, "B");
        }
    }

    if (const auto* s = doc.find("motor")) {
        SectionReader r(s, "motor");
        MotorParams mp;
        r.number("r_ohm", mp.r_ohm);
        r.number("l_ind", mp.l_ind);
        r.number("k_t", mp.k_t);
        r.number("v_max", mp.v_max);
        r.finish();
        cfg.plant.motor = mp;
    }

    {
        SectionReader r(doc.find("controller"), "controller");
        if (auto v = r.text("kind")) {
            const std::string k = trim(*v);
            if (k == "none") {
                cfg.controller.kind = ControllerKind::None;
            } else if (k == "poles") {
                cfg.controller.kind = ControllerKind::Poles;
            } else if (k == "dlqr") {
                cfg.controller.kind = ControllerKind::Dlqr;
            } else if (k == "clqr") {
                cfg.controller.kind = ControllerKind::Clqr;
            } else if (k == "gain") {
                cfg.controller.kind = ControllerKind::Gain;
            } else {
                r.fail("kind", "expected none, poles, dlqr, clqr or gain");
            }
        }
        r.complex_list("poles", cfg.controller.poles);
        r.list("q", cfg.controller.q_diag);
        r.number("r", cfg.controller.r);
        r.optional_number("sample_dt", cfg.controller.sample_dt);
        r.list("gain", cfg.controller.gain);
        r.finish();
        if (const auto* m = doc.find("matrix.gain")) {
            if (m->rows.size() != 1) throw ConfigError("matrix.gain: expected a single row");
            cfg.controller.gain = m->rows.front();
        }
    }

    {
        SectionReader r(doc.find("initial"), "initial");
        r.number("x_r_deg", cfg.initial.x_r_deg);
        r.number("x_r_dot_deg", cfg.initial.x_r_dot_deg);
        r.number("n_deg", cfg.initial.n_deg);
        r.number("n_dot_deg", cfg.initial.n_dot_deg);
        r.number("u_torque", cfg.initial.u_torque);
        r.finish();
    }

    {
        SectionReader r(doc.find("sim"), "sim");
        r.number("dt", cfg.sim.dt);
        r.number("t_end", cfg.sim.t_end);
        double fall_deg = std::numeric_limits<double>::quiet_NaN();
        r.number("fall_threshold_deg", fall_deg);
        if (!std::isnan(fall_deg)) cfg.sim.fall_threshold = fall_deg * kDeg;
        r.optional_number("torque_limit", cfg.sim.torque_limit);
        r.optional_number("voltage_limit", cfg.sim.voltage_limit);
        r.finish();
    }

    {
        SectionReader r(doc.find("linearize"), "linearize");
        r.list("dt", cfg.linearize_dts);
        r.finish();
    }

    {
        auto& o = cfg.optimize;
        SectionReader r(doc.find("optimize"), "optimize");
        if (auto v = r.text("objective")) o.objective = trim(*v);
        r.number("w_roll", o.weights.roll);
        r.number("w_pend_rate", o.weights.pend_rate);
        r.integer("population", o.ga.population);
        r.integer("generations", o.ga.generations);
        r.number("crossover_rate", o.ga.crossover_rate);
        r.number("mutation_rate", o.ga.mutation_rate);
        r.number("mutation_scale", o.ga.mutation_scale);
        r.integer("elitism", o.ga.elitism);
        r.integer("tournament", o.ga.tournament);
        r.number("blend_alpha", o.ga.blend_alpha);
        r.integer("seed", o.ga.seed);
        r.integer("threads", o.ga.threads);
        r.boolean("refine", o.refine);
        r.number("refine_step", o.refine_step);
        r.number("refine_tol", o.refine_tol);
        r.number("constant", o.constant_value);
        r.finish();
        static const std::set<std::string> kObjectives{"phase1", "phase2", "sphere", "constant"};
        if (!kObjectives.contains(o.objective)) {
            throw ConfigError("optimize.objective: expected phase1, phase2, sphere or constant");
        }

        for (const auto& s : doc.sections()) {
            if (!s.name.starts_with("param.")) continue;
            SectionReader pr(&s, s.name);
            ParamSpec p{s.name.substr(6), 0.0, 0.0, ParamRole::Free};
            pr.number("lo", p.lo);
            pr.number("hi", p.hi);
            if (auto v = pr.text("role")) p.role = parse_role(trim(*v));
            pr.finish();
            o.params.push_back(std::move(p));
        }
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

IniDocument to_ini(const ExperimentConfig& cfg) {
    IniDocument doc;
    auto& ex = doc.section("experiment");
    ex.set("name", cfg.name);
    ex.set("trajectory", cfg.trajectory_file);
    ex.set("svg", cfg.svg ? "true" : "false");

    auto& pl = doc.section("plant");
    pl.set("kind", std::string(to_string(cfg.plant.kind)));
    if (cfg.plant.kind == PlantKind::Lateral || cfg.plant.kind == PlantKind::LateralMotorcycle) {
        LateralPlant copy = cfg.plant.lateral;
        for (auto key : kLateralKeys) {
            pl.set(std::string(key), format_number(*lateral_field(copy, key)));
        }
    } else if (cfg.plant.kind == PlantKind::Vertical) {
        VerticalPlant copy = cfg.plant.vertical;
        for (auto key : kVerticalKeys) {
            pl.set(std::string(key), format_number(*vertical_field(copy, key)));
        }
    }
    if (cfg.plant.motor) {
        auto& m = doc.section("motor");
        m.set("r_ohm", format_number(cfg.plant.motor->r_ohm));
        m.set("l_ind", format_number(cfg.plant.motor->l_ind));
        m.set("k_t", format_number(cfg.plant.motor->k_t));
        m.set("v_max", format_number(cfg.plant.motor->v_max));
    }

    auto& c = doc.section("controller");
    const auto& cs = cfg.controller;
    c.set("kind", std::string(to_string(cs.kind)));
    if (!cs.poles.empty()) c.set("poles", join(cs.poles, format_complex));
    if (!cs.q_diag.empty()) c.set("q", join(cs.q_diag, format_number));
    c.set("r", format_number(cs.r));
    c.set("sample_dt", cs.sample_dt ? format_number(*cs.sample_dt) : "none");
    if (!cs.gain.empty()) c.set("gain", join(cs.gain, format_number));

    auto& in = doc.section("initial");
    in.set("x_r_deg", format_number(cfg.initial.x_r_deg));
    in.set("x_r_dot_deg", format_number(cfg.initial.x_r_dot_deg));
    in.set("n_deg", format_number(cfg.initial.n_deg));
    in.set("n_dot_deg", format_number(cfg.initial.n_dot_deg));
    in.set("u_torque", format_number(cfg.initial.u_torque));

    auto& sim = doc.section("sim");
    sim.set("dt", format_number(cfg.sim.dt));
    sim.set("t_end", format_number(cfg.sim.t_end));
    sim.set("fall_threshold_deg", format_degrees(cfg.sim.fall_threshold));
    sim.set("torque_limit", cfg.sim.torque_limit ? format_number(*cfg.sim.torque_limit) : "none");
    sim.set("voltage_limit",
            cfg.sim.voltage_limit ? format_number(*cfg.sim.voltage_limit) : "none");

    if (!cfg.linearize_dts.empty()) {
        doc.section("linearize").set("dt", join(cfg.linearize_dts, format_number));
    }

    const auto& o = cfg.optimize;
    auto& op = doc.section("optimize");
    op.set("objective", o.objective);
    op.set("w_roll", format_number(o.weights.roll));
    op.set("w_pend_rate", format_number(o.weights.pend_rate));
    op.set("population", std::to_string(o.ga.population));
    op.set("generations", std::to_string(o.ga.generations));
    op.set("crossover_rate", format_number(o.ga.crossover_rate));
    op.set("mutation_rate", format_number(o.ga.mutation_rate));
    op.set("mutation_scale", format_number(o.ga.mutation_scale));
    op.set("elitism", std::to_string(o.ga.elitism));
    op.set("tournament", std::to_string(o.ga.tournament));
    op.set("blend_alpha", format_number(o.ga.blend_alpha));
    op.set("seed", std::to_string(o.ga.seed));
    op.set("threads", std::to_string(o.ga.threads));
    op.set("refine", o.refine ? "true" : "false");
    op.set("refine_step", format_number(o.refine_step));
    op.set("refine_tol", format_number(o.refine_tol));
    op.set("constant", format_number(o.constant_value));
    for (const auto& p : o.params) {
        auto& s = doc.section("param." + p.name);
        s.set("lo", format_number(p.lo));
        s.set("hi", format_number(p.hi));
        s.set("role", std::string(to_string(p.role)));
    }

    if (cfg.plant.kind == PlantKind::Linear) {
        write_matrix(doc, "A", cfg.plant.a);
        write_matrix(doc, "B", cfg.plant.b);
    }
    return doc;
}

std::string serialize_config(const ExperimentConfig& cfg) { return to_ini(cfg).serialize(); }

ExperimentConfig apply_candidate(const ExperimentConfig& base, const std::vector<ParamSpec>& params,
                                 const std::vector<double>& values) {
    if (params.size() != values.size()) throw ConfigError("candidate size mismatch");
    ExperimentConfig out = base;
    auto index_of = [](const std::string& name, std::size_t prefix) {
        const std::string digits = name.substr(prefix);
        std::size_t k = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec != std::errc() || ptr != digits.data() + digits.size() || k == 0) {
            throw ConfigError("parameter '" + name + "': expected a 1-based index");
        }
        return k - 1;
    };
    auto slot = [](auto& vec, std::size_t k, const std::string& name) -> auto& {
        if (k >= vec.size()) vec.resize(k + 1);
        (void)name;
        return vec[k];
    };

    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string& name = params[i].name;
        const double v = values[i];
        if (name.starts_with("pole.")) {
            slot(out.controller.poles, index_of(name, 5), name) = v;
        } else if (name.starts_with("log10_q.")) {
            slot(out.controller.q_diag, index_of(name, 8), name) = std::pow(10.0, v);
        } else if (name.starts_with("q.")) {
            slot(out.controller.q_diag, index_of(name, 2), name) = v;
        } else if (name == "log10_r") {
            out.controller.r = std::pow(10.0, v);
        } else if (name == "r") {
            out.controller.r = v;
        } else if (name.starts_with("plant.")) {
            const std::string field = name.substr(6);
            double* target = nullptr;
            if (out.plant.kind == PlantKind::Vertical) {
                target = vertical_field(out.plant.vertical, field);
            } else {
                target = lateral_field(out.plant.lateral, field);
            }
            if (!target) throw ConfigError("parameter '" + name + "': unknown plant field");
            *target = v;
        } else {
            throw ConfigError("parameter '" + name + "' does not map onto the experiment");
        }
    }
    return out;
}

}  // namespace balancer
