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

#include "balancer/presets.hpp"

#include <algorithm>

#include "balancer/errors.hpp"

namespace balancer {

LateralPlant handlebar_study_plant() {
    LateralPlant p;
    p.m_n = 17.0;
    p.h_n = 0.14;
    p.l_p = 0.20;
    p.ixx = 0.0551;
    p.iyy = 0.0551;
    p.izz = 0.0551;
    p.i_r = 4.2786;
    p.mass_bike = 34.9;
    p.h_com = 0.27;
    return p;
}

LinearModel reference_augmented_model() {
    Eigen::MatrixXd a(5, 5);
    a << 1.0000, 0.0010, -0.0000, -0.0000, 0.0001,
         0.0223, 1.0011, -0.0517, -0.0037, 0.0211,
        -0.0051, -0.0000, 1.0000, 0.0098, 0.0018,
        -1.0151, -0.0051, -0.0101, 0.9994, 0.3495,
         0.1528, 0.0005, 0.0149, -0.2851, 0.8060;
    Eigen::MatrixXd b(5, 1);
    b << 0.0000, 0.0006, 0.0000, 0.0103, 0.0518;
    return LinearModel::from_ab(a, b, 0.01);
}

namespace {

constexpr std::string_view kLateral30 = R"([experiment]
name = lateral-30deg
trajectory = trajectory.csv

[plant]
kind = lateral
m_n = 6.6
h_n = 0.13
l_p = 0.15

[controller]
kind = poles
poles = -19.7726, -15.4665, -21.7665, -11.1548

[initial]
x_r_dot_deg = 30

[sim]
dt = 0.001
t_end = 5
fall_threshold_deg = 45
torque_limit = 6
)";

constexpr std::string_view kVertical3 = R"([experiment]
name = vertical-3deg

[plant]
kind = vertical
m2 = 0.3739
lg2 = 0.3354
# hinge height and balancer inertia are not given; reconstructed
l1 = 0.5

[controller]
kind = poles
poles = -19.7726, -15.4665, -21.7665, -11.1548

[initial]
x_r_dot_deg = 3

[sim]
dt = 0.001
t_end = 5
fall_threshold_deg = 45
torque_limit = 6
)";

constexpr std::string_view kVertical15 = R"([experiment]
name = vertical-15deg

[plant]
kind = vertical
m2 = 0.3739
lg2 = 0.3354
# hinge height and balancer inertia are not given; reconstructed
l1 = 0.5

[controller]
kind = poles
poles = -19.7726, -15.4665, -21.7665, -11.1548

[initial]
x_r_dot_deg = 15

[sim]
dt = 0.001
t_end = 5
fall_threshold_deg = 45
torque_limit = 6
)";

constexpr std::string_view kMotorcycle6 = R"([experiment]
name = lateral-motorcycle-6deg

[plant]
kind = lateral-motorcycle
# assumption: the single given pendulum inertia is used for ixx, iyy and izz
m_n = 17
h_n = 0.14
l_p = 0.2
ixx = 0.0551
iyy = 0.0551
izz = 0.0551
i_r = 4.2786
mass_bike = 34.9
h_com = 0.27

[controller]
kind = poles
poles = -22.5121, -17.5332, -15.6349, -12.1521

[initial]
x_r_deg = 6

[sim]
dt = 0.001
t_end = 5
fall_threshold_deg = 45
# no actuator limit is given for this bicycle
torque_limit = none
)";

constexpr std::string_view kDlqr20 = R"([experiment]
name = dlqr-20deg

[plant]
kind = lateral

[motor]
r_ohm = 14.5657
l_ind = 0.965
k_t = 5.5
v_max = 30

[controller]
kind = dlqr
q = 5.9619e6, 2.4446, 3.4464, 7.8203e5, 9.7913e7
r = 2.2404
sample_dt = 0.01

[initial]
x_r_dot_deg = 20

[sim]
dt = 0.001
t_end = 5
fall_threshold_deg = 45
voltage_limit = 30
)";

constexpr std::string_view kLinearizeAugmented = R"([experiment]
name = linearize-augmented

[plant]
kind = lateral

[motor]

[linearize]
dt = 0.01, 0.001
)";

constexpr std::string_view kLinearToy = R"([experiment]
name = linear-toy

[plant]
kind = linear

[matrix.A]
0

[matrix.B]
1

[controller]
kind = poles
poles = 0

[linearize]
dt = 0.1
)";

constexpr std::string_view kPoleSearch = R"([experiment]
name = pole-search

[plant]
kind = lateral

[controller]
kind = poles
poles = -19.7726, -15.4665, -21.7665, -11.1548

[initial]
x_r_dot_deg = 10

[sim]
dt = 0.001
t_end = 5
fall_threshold_deg = 45
torque_limit = 6

[optimize]
objective = phase1
population = 30
generations = 15
seed = 1
refine = true
refine_step = 0.5
refine_tol = 0.01

[param.pole.1]
lo = -40
hi = -0.5
role = pole

[param.pole.2]
lo = -40
hi = -0.5
role = pole

[param.pole.3]
lo = -40
hi = -0.5
role = pole

[param.pole.4]
lo = -40
hi = -0.5
role = pole
)";

constexpr std::string_view kLqrWeightSearch = R"([experiment]
name = lqr-weight-search

[plant]
kind = lateral

[motor]

[controller]
kind = dlqr
q = 5.9619e6, 2.4446, 3.4464, 7.8203e5, 9.7913e7
r = 2.2404
sample_dt = 0.01

[initial]
x_r_dot_deg = 20

[sim]
dt = 0.001
t_end = 5
fall_threshold_deg = 45
voltage_limit = 30

[optimize]
objective = phase2
population = 40
generations = 30
seed = 1

[param.log10_q.1]
lo = -3
hi = 9

[param.log10_q.2]
lo = -3
hi = 9

[param.log10_q.3]
lo = -3
hi = 9

[param.log10_q.4]
lo = -3
hi = 9

[param.log10_q.5]
lo = -3
hi = 9

[param.log10_r]
lo = -3
hi = 9
)";

constexpr std::string_view kSphere = R"([experiment]
name = sphere-selftest

[optimize]
objective = sphere
population = 50
generations = 200
seed = 7
refine = true
refine_step = 0.05
refine_tol = 1e-6

[param.x1]
lo = -5
hi = 5

[param.x2]
lo = -5
hi = 5

[param.x3]
lo = -5
hi = 5

[param.x4]
lo = -5
hi = 5
)";

constexpr std::string_view kConstant = R"([experiment]
name = constant-selftest

[optimize]
objective = constant
constant = 1
population = 10
generations = 5

[param.x1]
lo = -1
hi = 1
)";

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> list{
        {"lateral-30deg", "lateral pendulum, reference poles, 30 deg/s roll rate, 6 N m", kLateral30},
        {"vertical-3deg", "vertical balancer, reference poles, 3 deg/s roll rate", kVertical3},
        {"vertical-15deg", "vertical balancer, reference poles, 15 deg/s roll rate", kVertical15},
        {"lateral-motorcycle-6deg", "lateral pendulum on the heavier bicycle, 6 deg roll",
         kMotorcycle6},
        {"dlqr-20deg", "motor-driven lateral pendulum, reference Q/R, 20 deg/s, 30 V", kDlqr20},
        {"linearize-augmented", "5-state plant discretized at 0.01 s and 0.001 s",
         kLinearizeAugmented},
        {"linear-toy", "A = 0 single-input toy plant", kLinearToy},
        {"pole-search", "GA over real pole sets, phase-1 fitness, 10 deg/s", kPoleSearch},
        {"lqr-weight-search", "GA over log10 Q/R, phase-2 fitness, 20 deg/s", kLqrWeightSearch},
        {"sphere-selftest", "GA on the 4-D sphere function", kSphere},
        {"constant-selftest", "GA on a constant objective", kConstant},
    };
    return list;
}

const Preset& find_preset(std::string_view name) {
    const auto& list = presets();
    const auto it = std::find_if(list.begin(), list.end(),
                                 [&](const Preset& p) { return p.name == name; });
    if (it == list.end()) throw ConfigError("unknown preset '" + std::string(name) + "'");
    return *it;
}

ExperimentConfig load_preset(std::string_view name) {
    return parse_config(find_preset(name).text);
}

}  // namespace balancer
