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

#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "balancer/config.hpp"
#include "balancer/control.hpp"
#include "balancer/linearize.hpp"
#include "balancer/optimize.hpp"
#include "balancer/simulate.hpp"

namespace balancer {

/// Nonlinear plant for the simulator. A motor makes the input a voltage.
System make_system(const PlantSpec& plant);

/// Continuous Jacobian at the origin with zero input.
LinearModel linearize_plant(const ExperimentConfig& cfg);

/// Default digital period for dlqr when the config gives none.
inline constexpr double kDefaultDlqrPeriod = 0.01;

struct Synthesis {
    std::string method;
    GainVector gain;
    LinearModel model;  // discrete for dlqr
    std::vector<std::complex<double>> closed_loop;
    /// max |lambda| for discrete designs, max Re(lambda) for continuous ones.
    double stability_margin = 0.0;
    std::optional<double> controllability_condition;
    std::optional<Eigen::MatrixXd> riccati;
    int iterations = 0;
    double residual = 0.0;
};

/// Throws ConfigError for ControllerKind::None.
Synthesis synthesize(const ExperimentConfig& cfg);

struct RunResult {
    Trajectory trajectory;
    Metrics metrics;
    std::optional<Synthesis> synthesis;
};

/// Closed loop (or open loop for ControllerKind::None) from the configured
/// initial state.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Objective for cfg.optimize. Candidates that cannot be synthesized or that
/// blow up numerically score +infinity.
Objective make_objective(const ExperimentConfig& cfg);

struct OptimizeOutcome {
    GaResult ga;
    std::optional<PatternResult> refined;
    std::vector<double> best;
    double best_value = 0.0;
};

OptimizeOutcome run_optimize(const ExperimentConfig& cfg);

}  // namespace balancer
