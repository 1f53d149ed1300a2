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

#include <string>
#include <vector>

#include "balancer/optimize.hpp"
#include "balancer/simulate.hpp"

namespace balancer {

struct Series {
    std::string label;
    std::vector<double> y;
};

/// Static SVG 1.1 line plot: frame, tick labels, one polyline per series.
std::string line_plot(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<double>& x,
                      const std::vector<Series>& series);

struct NamedPlot {
    std::string file;  // e.g. "roll.svg"
    std::string svg;
};

/// Roll, roll rate, pendulum angle, pendulum rate (degrees) and hinge torque.
std::vector<NamedPlot> trajectory_plots(const Trajectory& traj);

NamedPlot history_plot(const std::vector<GenerationStats>& history);

}  // namespace balancer
