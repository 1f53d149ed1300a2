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

#include "balancer/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "balancer/errors.hpp"

namespace balancer {
namespace {

Eigen::MatrixXd to_matrix(const MatrixRows& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double max_real(const std::vector<std::complex<double>>& poles) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : poles) m = std::max(m, p.real());
    return m;
}

double max_abs(const std::vector<std::complex<double>>& poles) {
    double m = 0.0;
    for (const auto& p : poles) m = std::max(m, std::abs(p));
    return m;
}

}  // namespace

System make_system(const PlantSpec& plant) {
    switch (plant.kind) {
        case PlantKind::Lateral:
        case PlantKind::LateralMotorcycle: {
            const LateralPlant lp = plant.lateral;
            if (plant.motor) {
                const MotorParams mp = *plant.motor;
                return {[lp, mp](const StateVec& x, double v) { return augmented_deriv(lp, mp, x, v); },
                        InputKind::Voltage};
            }
            return {[lp](const StateVec& x, double u) { return lateral_deriv(lp, x, u); },
                    InputKind::Torque};
        }
        case PlantKind::Vertical: {
            const VerticalPlant vp = plant.vertical;
            return {[vp](const StateVec& x, double u) { return vertical_deriv(vp, x, u); },
                    InputKind::Torque};
        }
        case PlantKind::Linear: {
            const Eigen::MatrixXd a = to_matrix(plant.a);
            const Eigen::VectorXd b = to_matrix(plant.b).col(0);
            return {[a, b](const StateVec& x, double u) -> StateVec { return a * x + b * u; },
                    InputKind::Torque};
        }
    }
    throw ConfigError("unknown plant kind");
}

LinearModel linearize_plant(const ExperimentConfig& cfg) {
    const System sys = make_system(cfg.plant);
    LinearModel m = jacobian(sys.deriv, Eigen::VectorXd::Zero(cfg.state_dim()), 0.0);
    if (cfg.plant.kind == PlantKind::Linear) {
        // Exact matrices are available; skip the finite-difference roundoff.
        m.a = to_matrix(cfg.plant.a);
        m.b = to_matrix(cfg.plant.b);
    }
    return m;
}

Synthesis synthesize(const ExperimentConfig& cfg) {
    const ControllerSpec& cs = cfg.controller;
    const LinearModel cont = linearize_plant(cfg);
    Synthesis s;
    switch (cs.kind) {
        case ControllerKind::None:
            throw ConfigError("controller.kind: nothing to synthesize for 'none'");
        case ControllerKind::Poles: {
            auto placed = place_poles(cont, cs.poles);
            s.method = "pole placement";
            s.gain = placed.gain;
            s.gain.sample_dt = cs.sample_dt;
            s.model = cont;
            s.controllability_condition = placed.controllability_condition;
            break;
        }
        case ControllerKind::Dlqr: {
            const double dt = cs.sample_dt.value_or(kDefaultDlqrPeriod);
            s.model = c2d_zoh(cont, dt);
            auto sol = dlqr(s.model, Weighting::diagonal(to_vector(cs.q_diag), cs.r));
            s.method = "discrete LQR";
            s.gain = sol.gain;
            s.gain.sample_dt = dt;
            s.riccati = sol.p;
            s.iterations = sol.iterations;
            s.residual = sol.residual;
            break;
        }
        case ControllerKind::Clqr: {
            auto sol = clqr(cont, Weighting::diagonal(to_vector(cs.q_diag), cs.r));
            s.method = "continuous LQR";
            s.gain = sol.gain;
            s.gain.sample_dt = cs.sample_dt;
            s.model = cont;
            s.riccati = sol.p;
            s.iterations = sol.iterations;
            s.residual = sol.residual;
            break;
        }
        case ControllerKind::Gain: {
            s.method = "gain literal";
            s.gain.k = to_vector(cs.gain).transpose();
            s.gain.sample_dt = cs.sample_dt;
            s.model = cs.sample_dt ? c2d_zoh(cont, *cs.sample_dt) : cont;
            break;
        }
    }
    s.closed_loop = closed_loop_poles(s.model, s.gain);
    sort_poles(s.closed_loop);
    s.stability_margin = s.model.discrete() ? max_abs(s.closed_loop) : max_real(s.closed_loop);
    return s;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    const System sys = make_system(cfg.plant);
    RunResult r;
    Controller ctl;
    if (cfg.controller.kind == ControllerKind::None) {
        ctl.law = [](const StateVec&) { return 0.0; };
    } else {
        r.synthesis = synthesize(cfg);
        ctl = feedback_controller(r.synthesis->gain);
    }
    r.trajectory = integrate(sys, cfg.initial_vector(), ctl, cfg.sim);
    r.metrics = metrics(r.trajectory);
    return r;
}

Objective make_objective(const ExperimentConfig& cfg) {
    const OptimizeSpec& o = cfg.optimize;
    if (o.objective == "sphere") {
        return [](const std::vector<double>& x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return s;
        };
    }
    if (o.objective == "constant") {
        const double c = o.constant_value;
        return [c](const std::vector<double>&) { return c; };
    }
    // Fail early on names that do not map onto the experiment.
    std::vector<double> probe;
    for (const auto& p : o.params) probe.push_back(0.5 * (p.lo + p.hi));
    (void)apply_candidate(cfg, o.params, probe);

    const bool phase2 = o.objective == "phase2";
    return [cfg, phase2](const std::vector<double>& x) {
        try {
            const ExperimentConfig candidate = apply_candidate(cfg, cfg.optimize.params, x);
            candidate.validate();
            const RunResult r = run_experiment(candidate);
            return phase2 ? fitness_phase2(r.trajectory)
                          : fitness_phase1(r.trajectory, cfg.optimize.weights);
        } catch (const ConfigError&) {
            return std::numeric_limits<double>::infinity();
        } catch (const NumericError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
}

OptimizeOutcome run_optimize(const ExperimentConfig& cfg) {
    const SearchSpace space{cfg.optimize.params};
    const Objective objective = make_objective(cfg);
    OptimizeOutcome out;
    out.ga = ga_minimize(space, objective, cfg.optimize.ga);
    out.best = out.ga.best;
    out.best_value = out.ga.best_value;
    if (cfg.optimize.refine) {
        out.refined = pattern_search(out.best, objective, space, cfg.optimize.refine_step,
                                     cfg.optimize.refine_tol);
        if (out.refined->value <= out.best_value) {
            out.best = out.refined->best;
            out.best_value = out.refined->value;
        }
    }
    return out;
}

}  // namespace balancer
