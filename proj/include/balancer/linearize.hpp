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

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "balancer/simulate.hpp"

namespace balancer {

/// State-space model x' = Ax + Bu (continuous) or x[k+1] = Ax[k] + Bu[k]
/// (discrete, dt set), y = Cx + Du, about the operating point (x0, u0).
struct LinearModel {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    Eigen::MatrixXd c;
    Eigen::MatrixXd d;
    std::optional<double> dt;
    Eigen::VectorXd x0;
    double u0 = 0.0;
    std::vector<std::string> labels;

    Eigen::Index states() const { return a.rows(); }
    Eigen::Index inputs() const { return b.cols(); }
    bool discrete() const { return dt.has_value(); }

    /// Dimension consistency and dt > 0 when discrete. Throws ConfigError.
    void validate() const;

    /// C = I, D = 0 and the mechanical labels for n = 4 or 5.
    static LinearModel from_ab(Eigen::MatrixXd a, Eigen::MatrixXd b,
                               std::optional<double> dt = std::nullopt);
};

/// Default labels: x_r, x_r_dot, n, n_dot[, u_torque]; x0..x{n-1} otherwise.
std::vector<std::string> default_state_labels(Eigen::Index n);

/// Central-difference linearization of f about (x0, u0) with per-coordinate
/// step max(1e-6, 1e-6 |x_i|) times `step_scale`. C = I, D = 0.
/// Throws NumericError naming the coordinate whose perturbation produced a
/// non-finite derivative.
LinearModel jacobian(const DerivFn& f, const Eigen::VectorXd& x0, double u0,
                     double step_scale = 1.0);

/// e^M by scaling and squaring on the [6/6] Pade approximant.
Eigen::MatrixXd expm(const Eigen::MatrixXd& m);

/// Zero-order-hold discretization: exponentiate [[A, B], [0, 0]] dt and read
/// A_d, B_d off the top block row. C and D are copied.
LinearModel c2d_zoh(const LinearModel& continuous, double dt);

}  // namespace balancer
