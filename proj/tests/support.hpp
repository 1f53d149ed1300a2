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

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "balancer/dynamics.hpp"
#include "balancer/simulate.hpp"

namespace balancer::testing {

/// Open-loop RK4 path of the lateral plant under a constant torque.
inline std::vector<State4> lateral_path(const LateralPlant& plant, const State4& s0, double torque,
                                        double dt, int steps) {
    const DerivFn f = [&](const StateVec& x, double u) { return lateral_deriv(plant, x, u); };
    std::vector<State4> out{s0};
    StateVec x = s0.vec();
    for (int k = 0; k < steps; ++k) {
        x = rk4_step(f, x, torque, dt);
        out.push_back(State4::from(x));
    }
    return out;
}

inline State4 random_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(-0.5, 0.5);
    std::uniform_real_distribution<double> rate(-1.0, 1.0);
    return {angle(rng), rate(rng), angle(rng), rate(rng)};
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                                     double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = nd(rng);
    }
    return m;
}

inline double max_abs_residual(const LateralPlant& plant, const std::vector<State4>& path,
                               double dt, double torque) {
    double worst = 0.0;
    for (const auto& r : lagrangian_residual(plant, path, dt, torque)) {
        worst = std::max({worst, std::abs(r.roll), std::abs(r.pendulum)});
    }
    return worst;
}

}  // namespace balancer::testing
