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

#include <array>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "balancer/config.hpp"
#include "balancer/dynamics.hpp"
#include "balancer/linearize.hpp"

namespace balancer {

/// Heavier bicycle from the handlebar-steering comparison. Only one pendulum
/// inertia is given, so ixx = iyy = izz.
LateralPlant handlebar_study_plant();

/// Reference closed-loop poles for the lateral and vertical experiments.
inline constexpr std::array<double, 4> kReferencePoles{-19.7726, -15.4665, -21.7665, -11.1548};
/// Reference poles for the handlebar-study bicycle.
inline constexpr std::array<double, 4> kHandlebarPoles{-22.5121, -17.5332, -15.6349, -12.1521};
/// Reference DLQR weights (state order x_r, x_r', n, n', U).
inline constexpr std::array<double, 5> kReferenceQ{5.9619e6, 2.4446, 3.4464, 7.8203e5, 9.7913e7};
inline constexpr double kReferenceR = 2.2404;
/// Initial roll angle from which steering alone was reported to recover.
inline constexpr double kHandlebarLimitDeg = 2.5;

/// The reference discrete augmented model (four decimals), tagged with the
/// stated 0.01 s sample time.
LinearModel reference_augmented_model();

struct Preset {
    std::string_view name;
    std::string_view summary;
    std::string_view text;  // config file contents
};

const std::vector<Preset>& presets();

/// Parsed and validated preset; throws ConfigError for unknown names.
ExperimentConfig load_preset(std::string_view name);
const Preset& find_preset(std::string_view name);

}  // namespace balancer
