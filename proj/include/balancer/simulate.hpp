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

#include <functional>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace balancer {

using StateVec = Eigen::VectorXd;

/// x' = f(x, u) for a single scalar input.
using DerivFn = std::function<StateVec(const StateVec&, double)>;

/// What the scalar plant input physically is; selects which SimConfig limit
/// applies and where the hinge torque is read from.
enum class InputKind {
    Torque,   // input is the hinge torque
    Voltage,  // input is motor voltage; hinge torque is state component 4
};

struct System {
    DerivFn deriv;
    InputKind input = InputKind::Torque;
};

struct SimConfig {
    double dt = 1e-3;
    double t_end = 5.0;
    /// |x_r| beyond this ends the run as fallen. Infinity disables the check.
    double fall_threshold = std::numbers::pi / 4.0;
    std::optional<double> torque_limit;
    std::optional<double> voltage_limit;

    void validate() const;
    std::optional<double> input_limit(InputKind kind) const {
        return kind == InputKind::Torque ? torque_limit : voltage_limit;
    }
};

/// State feedback u = law(x). With sample_dt set the law is only evaluated at
/// multiples of sample_dt and held in between; otherwise once per step.
struct Controller {
    std::function<double(const StateVec&)> law;
    std::optional<double> sample_dt;
};

struct Sample {
    double t;
    StateVec x;
    double u_cmd;      // controller output held over [t, t + dt)
    double u_applied;  // after saturation
    double torque;     // hinge torque [N m]
    double power;      // |torque * n'| [W]
};

struct Trajectory {
    std::vector<Sample> samples;
    double dt = 0.0;
    double t_end = 0.0;
    InputKind input = InputKind::Torque;
    bool fallen = false;
    std::optional<double> fall_time;

    bool empty() const { return samples.empty(); }
};

/// Clamp to [-limit, limit]; identity without a limit.
double saturate(double u, std::optional<double> limit);

/// Classical RK4 with the (saturated) input held constant across each step.
/// Stops after the first sample whose |x_r| exceeds cfg.fall_threshold.
/// Throws NumericError naming the last good time if the state goes non-finite.
Trajectory integrate(const System& system, const StateVec& x0, const Controller& controller,
                     const SimConfig& cfg);

/// A single RK4 step of x' = f(x, u) with u fixed.
StateVec rk4_step(const DerivFn& f, const StateVec& x, double u, double dt);

struct Metrics {
    double max_roll = 0.0;          // rad
    double max_pend_rate = 0.0;     // rad/s
    double max_torque = 0.0;        // N m
    double max_input = 0.0;         // |u_applied|
    double max_power = 0.0;         // W
    std::optional<double> settling_time;  // empty if never settled
    double overshoot_deg = 0.0;
    bool fallen = false;
    double int_abs_roll = 0.0;              // trapz |x_r|
    double int_abs_pend_rate = 0.0;         // trapz |n'|
    double int_abs_rate_torque = 0.0;       // trapz |n'| |torque|
};

/// Settling: first time after which |x_r| stays below
/// max(1% of |x_r(0)|, 0.1 deg). Overshoot: largest excursion of x_r opposite
/// to the sign of its first nonzero sample, in degrees.
Metrics metrics(const Trajectory& traj);

/// Trapezoid rule over uniformly spaced samples.
double trapz(const std::vector<double>& y, double dt);

/// `t,x_r,x_r_dot,n,n_dot,u_cmd,u_applied,power`, 9 significant digits.
void write_csv(const Trajectory& traj, std::ostream& os);

}  // namespace balancer
