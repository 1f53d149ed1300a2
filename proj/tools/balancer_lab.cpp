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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "balancer/config.hpp"
#include "balancer/errors.hpp"
#include "balancer/experiment.hpp"
#include "balancer/presets.hpp"
#include "balancer/report.hpp"
#include "balancer/svg.hpp"

namespace fs = std::filesystem;
using namespace balancer;

namespace {

struct Options {
    std::string config;
    std::string preset;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    bool svg = false;
    std::vector<double> dts;
    std::string write_dir;
};

ExperimentConfig resolve(const Options& o) {
    if (!o.config.empty() && !o.preset.empty()) {
        throw ConfigError("give either --config or --preset, not both");
    }
    if (!o.config.empty()) return load_config(o.config);
    if (!o.preset.empty()) return load_preset(o.preset);
    throw ConfigError("--config PATH or --preset NAME is required");
}

fs::path out_dir(const Options& o) {
    fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + o.out + "': " + ec.message());
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    os << text;
}

int cmd_simulate(const Options& o) {
    const ExperimentConfig cfg = resolve(o);
    const fs::path dir = out_dir(o);
    const RunResult r = run_experiment(cfg);
    {
        std::ofstream os(dir / cfg.trajectory_file, std::ios::binary);
        if (!os) throw ConfigError("cannot write trajectory file");
        write_csv(r.trajectory, os);
    }
    const std::string summary = "experiment = " + cfg.name + "\n" + metrics_summary(r.metrics);
    write_text(dir / "summary.txt", summary);
    std::cout << summary;
    if (o.svg || cfg.svg) {
        for (const auto& p : trajectory_plots(r.trajectory)) write_text(dir / p.file, p.svg);
    }
    return 0;
}

int cmd_linearize(const Options& o) {
    const ExperimentConfig cfg = resolve(o);
    const fs::path dir = out_dir(o);
    const LinearModel cont = linearize_plant(cfg);
    std::cout << "continuous model about the origin\n"
              << format_matrix("A", cont.a, cont.labels) << format_matrix("B", cont.b, cont.labels);
    write_text(dir / "linear_continuous.txt", matrix_file(cont));

    const std::vector<double> dts = o.dts.empty() ? cfg.linearize_dts : o.dts;
    for (double dt : dts) {
        const LinearModel d = c2d_zoh(cont, dt);
        std::cout << "\nZOH, dt = " << format_number(dt) << '\n'
                  << format_matrix("A", d.a, d.labels) << format_matrix("B", d.b, d.labels);
        write_text(dir / ("linear_dt" + format_number(dt) + ".txt"), matrix_file(d));
    }
    if (cont.states() == 5 && !dts.empty()) {
        const std::string rep = discrepancy_report(discrepancy(cont, dts));
        std::cout << '\n' << rep;
        write_text(dir / "discrepancy.txt", rep);
    }
    return 0;
}

int cmd_synthesize(const Options& o) {
    const ExperimentConfig cfg = resolve(o);
    const fs::path dir = out_dir(o);
    const std::string text = gain_file(synthesize(cfg));
    write_text(dir / "gain.txt", text);
    std::cout << text;
    return 0;
}

int cmd_optimize(const Options& o) {
    ExperimentConfig cfg = resolve(o);
    if (o.seed) cfg.optimize.ga.seed = *o.seed;
    cfg.optimize.ga.threads = threads_from_env();
    const fs::path dir = out_dir(o);
    const OptimizeOutcome res = run_optimize(cfg);
    {
        std::ofstream os(dir / "history.csv", std::ios::binary);
        write_history_csv(res.ga.history, os);
    }

    IniDocument best;
    auto& s = best.section("best");
    s.set("fitness", format_number(res.best_value));
    s.set("evaluations", std::to_string(res.ga.evaluations +
                                        (res.refined ? res.refined->evaluations : 0)));
    for (std::size_t i = 0; i < res.best.size(); ++i) {
        s.set(cfg.optimize.params[i].name, format_number(res.best[i]));
    }
    std::string text = best.serialize();
    if (cfg.optimize.objective == "phase1" || cfg.optimize.objective == "phase2") {
        ExperimentConfig tuned = apply_candidate(cfg, cfg.optimize.params, res.best);
        tuned.name = cfg.name + "-best";
        write_text(dir / "best_config.ini", serialize_config(tuned));
    }
    write_text(dir / "best.ini", text);
    std::cout << text;
    if (o.svg || cfg.svg) {
        const auto p = history_plot(res.ga.history);
        write_text(dir / p.file, p.svg);
    }
    return 0;
}

int cmd_compare(const Options& o) {
    const fs::path dir = out_dir(o);
    const std::string text = compare_report(run_comparison());
    write_text(dir / "compare.txt", text);
    std::cout << text;
    return 0;
}

int cmd_presets(const Options& o) {
    for (const auto& p : presets()) {
        std::printf("%-26s %.*s\n", std::string(p.name).c_str(), static_cast<int>(p.summary.size()),
                    p.summary.data());
        if (!o.write_dir.empty()) {
            fs::create_directories(o.write_dir);
            write_text(fs::path(o.write_dir) / (std::string(p.name) + ".ini"), std::string(p.text));
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bicycle balancer simulation, synthesis and tuning"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config) {
            sub->add_option("--config", o.config, "experiment config file");
            sub->add_option("--preset", o.preset, "built-in preset name");
        }
        sub->add_option("--out", o.out, "output directory");
        sub->add_flag("--svg", o.svg, "write SVG plots");
    };
    auto* simulate = app.add_subcommand("simulate", "run the closed loop and write a trajectory");
    add_common(simulate, true);
    auto* linearize = app.add_subcommand("linearize", "Jacobian at the origin and ZOH models");
    add_common(linearize, true);
    linearize->add_option("--dt", o.dts, "sample time(s); defaults to [linearize] dt");
    auto* synth = app.add_subcommand("synthesize", "compute the feedback gain");
    add_common(synth, true);
    auto* optimize = app.add_subcommand("optimize", "GA search with optional pattern refinement");
    add_common(optimize, true);
    optimize->add_option("--seed", o.seed, "override the GA seed");
    auto* compare = app.add_subcommand("compare", "run the built-in comparison scenarios");
    add_common(compare, false);
    auto* list = app.add_subcommand("presets", "list built-in presets");
    list->add_option("--write", o.write_dir, "also write each preset as DIR/NAME.ini");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(o);
        if (linearize->parsed()) return cmd_linearize(o);
        if (synth->parsed()) return cmd_synthesize(o);
        if (optimize->parsed()) return cmd_optimize(o);
        if (compare->parsed()) return cmd_compare(o);
        if (list->parsed()) return cmd_presets(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
