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

#include <optional>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "balancer/config.hpp"
#include "balancer/control.hpp"
#include "balancer/errors.hpp"
#include "balancer/experiment.hpp"
#include "balancer/linearize.hpp"
#include "balancer/presets.hpp"
#include "balancer/report.hpp"

namespace py = pybind11;
using namespace balancer;

namespace {

ExperimentConfig resolve(const std::optional<std::string>& text, const std::optional<std::string>& preset) {
    if (text && preset) throw ConfigError("give either config text or a preset name, not both");
    if (text) return parse_config(*text);
    if (preset) return load_preset(*preset);
    throw ConfigError("config text or preset name is required");
}

py::dict metrics_dict(const Metrics& m) {
    py::dict d;
    d["fallen"] = m.fallen;
    d["max_roll"] = m.max_roll;
    d["max_pend_rate"] = m.max_pend_rate;
    d["max_torque"] = m.max_torque;
    d["max_input"] = m.max_input;
    d["max_power"] = m.max_power;
    d["settling_time"] = m.settling_time;
    d["overshoot_deg"] = m.overshoot_deg;
    d["int_abs_roll"] = m.int_abs_roll;
    d["int_abs_pend_rate"] = m.int_abs_pend_rate;
    d["int_abs_rate_torque"] = m.int_abs_rate_torque;
    return d;
}

py::dict model_dict(const LinearModel& m) {
    py::dict d;
    d["A"] = m.a;
    d["B"] = m.b;
    d["dt"] = m.dt;
    d["labels"] = m.labels;
    return d;
}

py::dict synthesis_dict(const Synthesis& s) {
    py::dict d;
    d["method"] = s.method;
    d["K"] = Eigen::RowVectorXd(s.gain.k);
    d["sample_dt"] = s.gain.sample_dt;
    d["closed_loop_poles"] = s.closed_loop;
    d["stability_margin"] = s.stability_margin;
    d["controllability_condition"] = s.controllability_condition;
    d["riccati"] = s.riccati;
    return d;
}

py::dict run(const std::optional<std::string>& text, const std::optional<std::string>& preset) {
    const ExperimentConfig cfg = resolve(text, preset);
    RunResult r;
    {
        py::gil_scoped_release release;
        r = run_experiment(cfg);
    }
    const auto& samples = r.trajectory.samples;
    const auto n = static_cast<Eigen::Index>(samples.size());
    const Eigen::Index dim = n ? samples.front().x.size() : 0;
    Eigen::VectorXd t(n), u_cmd(n), u_applied(n), torque(n), power(n);
    Eigen::MatrixXd x(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        t(i) = s.t;
        x.row(i) = s.x.transpose();
        u_cmd(i) = s.u_cmd;
        u_applied(i) = s.u_applied;
        torque(i) = s.torque;
        power(i) = s.power;
    }
    py::dict d;
    d["t"] = t;
    d["x"] = x;
    d["u_cmd"] = u_cmd;
    d["u_applied"] = u_applied;
    d["torque"] = torque;
    d["power"] = power;
    d["fall_time"] = r.trajectory.fall_time;
    d["metrics"] = metrics_dict(r.metrics);
    if (r.synthesis) d["synthesis"] = synthesis_dict(*r.synthesis);
    return d;
}

py::dict optimize(const std::optional<std::string>& text, const std::optional<std::string>& preset,
                  std::optional<std::uint64_t> seed, unsigned threads) {
    ExperimentConfig cfg = resolve(text, preset);
    if (seed) cfg.optimize.ga.seed = *seed;
    cfg.optimize.ga.threads = threads;
    OptimizeOutcome out;
    {
        py::gil_scoped_release release;
        out = run_optimize(cfg);
    }
    Eigen::MatrixXd history(static_cast<Eigen::Index>(out.ga.history.size()), 4);
    for (std::size_t i = 0; i < out.ga.history.size(); ++i) {
        const auto& h = out.ga.history[i];
        history.row(static_cast<Eigen::Index>(i)) << static_cast<double>(h.generation), h.best, h.mean, h.worst;
    }
    std::vector<std::string> names;
    for (const auto& p : cfg.optimize.params) names.push_back(p.name);
    py::dict d;
    d["names"] = names;
    d["best"] = out.best;
    d["best_value"] = out.best_value;
    d["ga_best"] = out.ga.best;
    d["ga_best_value"] = out.ga.best_value;
    d["evaluations"] = out.ga.evaluations;
    d["history"] = history;
    if (out.refined) d["refined_value"] = out.refined->value;
    return d;
}

LinearModel model_from(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::optional<double> dt) {
    LinearModel m = LinearModel::from_ab(a, b, dt);
    m.validate();
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bicycle balancer simulation, linearization, synthesis and tuning";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    m.def("presets", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& p : presets()) out.emplace_back(p.name, p.summary);
        return out;
    }, "List of (name, summary) for the built-in presets.");
    m.def("preset_text", [](const std::string& name) { return std::string(find_preset(name).text); },
          py::arg("name"));
    m.def("normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
          py::arg("text"), "Parse, validate and re-serialize a config with every field explicit.");

    m.def("simulate", &run, py::arg("config") = py::none(), py::kw_only(), py::arg("preset") = py::none(),
          "Run the closed loop; returns arrays t, x, u_cmd, u_applied, torque, power and metrics.");
    m.def("linearize", [](const std::optional<std::string>& text, const std::optional<std::string>& preset,
                          const std::vector<double>& dts) {
              const ExperimentConfig cfg = resolve(text, preset);
              const LinearModel cont = linearize_plant(cfg);
              py::dict d;
              d["continuous"] = model_dict(cont);
              py::list discrete;
              for (double dt : dts.empty() ? cfg.linearize_dts : dts) discrete.append(model_dict(c2d_zoh(cont, dt)));
              d["discrete"] = discrete;
              return d;
          },
          py::arg("config") = py::none(), py::kw_only(), py::arg("preset") = py::none(),
          py::arg("dts") = std::vector<double>{});
    m.def("synthesize", [](const std::optional<std::string>& text, const std::optional<std::string>& preset) {
              return synthesis_dict(synthesize(resolve(text, preset)));
          },
          py::arg("config") = py::none(), py::kw_only(), py::arg("preset") = py::none());
    m.def("optimize", &optimize, py::arg("config") = py::none(), py::kw_only(),
          py::arg("preset") = py::none(), py::arg("seed") = py::none(), py::arg("threads") = 1u);
    m.def("compare", [] { return compare_report(run_comparison()); }, "Deterministic comparison table.");

    m.def("expm", &expm, py::arg("a"));
    m.def("c2d_zoh", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt) {
              const LinearModel d = c2d_zoh(model_from(a, b, std::nullopt), dt);
              return py::make_tuple(d.a, d.b);
          },
          py::arg("a"), py::arg("b"), py::arg("dt"));
    m.def("place_poles", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const std::vector<std::complex<double>>& poles) {
              return Eigen::RowVectorXd(place_poles(model_from(a, b, std::nullopt), poles).gain.k);
          },
          py::arg("a"), py::arg("b"), py::arg("poles"));
    m.def("dlqr", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& r, double dt) {
              const LqrSolution s = dlqr(model_from(a, b, dt), Weighting{q, r});
              return py::make_tuple(Eigen::RowVectorXd(s.gain.k), s.p);
          },
          py::arg("a"), py::arg("b"), py::arg("q"), py::arg("r"), py::arg("dt"));
    m.def("clqr", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& r) {
              const LqrSolution s = clqr(model_from(a, b, std::nullopt), Weighting{q, r});
              return py::make_tuple(Eigen::RowVectorXd(s.gain.k), s.p);
          },
          py::arg("a"), py::arg("b"), py::arg("q"), py::arg("r"));
    m.def("ga_minimize", [](const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<std::pair<double, double>>& bounds, std::size_t population,
                            std::size_t generations, std::uint64_t seed) {
              SearchSpace space;
              for (std::size_t i = 0; i < bounds.size(); ++i) {
                  space.params.push_back({"x" + std::to_string(i + 1), bounds[i].first, bounds[i].second});
              }
              GaConfig cfg;
              cfg.population = population;
              cfg.generations = generations;
              cfg.seed = seed;
              cfg.threads = 1;  // the callable holds the GIL
              const GaResult r = ga_minimize(space, f, cfg);
              return py::make_tuple(r.best, r.best_value);
          },
          py::arg("f"), py::arg("bounds"), py::kw_only(), py::arg("population") = 50,
          py::arg("generations") = 100, py::arg("seed") = 1);
}
