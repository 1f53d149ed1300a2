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

#include "balancer/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "balancer/errors.hpp"

namespace balancer {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double component(const StateVec& x, Eigen::Index i) { return i < x.size() ? x(i) : 0.0; }

double hinge_torque(InputKind kind, const StateVec& x, double u_applied) {
    return kind == InputKind::Torque ? u_applied : component(x, 4);
}

}  // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sim.dt must be > 0");
    if (!(t_end >= dt) || !std::isfinite(t_end)) throw ConfigError("sim.t_end must be >= dt");
    if (!(fall_threshold > 0.0)) throw ConfigError("sim.fall_threshold must be > 0");
    if (torque_limit && !(*torque_limit > 0.0)) throw ConfigError("sim.torque_limit must be > 0");
    if (voltage_limit && !(*voltage_limit > 0.0)) {
        throw ConfigError("sim.voltage_limit must be > 0");
    }
}

double saturate(double u, std::optional<double> limit) {
    if (!limit) return u;
    return std::clamp(u, -*limit, *limit);
}

StateVec rk4_step(const DerivFn& f, const StateVec& x, double u, double dt) {
    const StateVec k1 = f(x, u);
    const StateVec k2 = f(x + 0.5 * dt * k1, u);
    const StateVec k3 = f(x + 0.5 * dt * k2, u);
    const StateVec k4 = f(x + dt * k3, u);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate(const System& system, const StateVec& x0, const Controller& controller,
                     const SimConfig& cfg) {
    cfg.validate();
    if (!system.deriv) throw ConfigError("integrate: system has no derivative function");
    if (!controller.law) throw ConfigError("integrate: controller has no law");
    if (!x0.allFinite()) throw ConfigError("integrate: non-finite initial state");

    const auto steps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
    long hold_steps = 1;
    if (controller.sample_dt) {
        const double ratio = *controller.sample_dt / cfg.dt;
        hold_steps = std::lround(ratio);
        if (hold_steps < 1 || std::abs(ratio - static_cast<double>(hold_steps)) > 1e-9 * ratio) {
            throw ConfigError("controller sample time must be an integer multiple of sim.dt");
        }
    }
    const auto limit = cfg.input_limit(system.input);

    Trajectory traj;
    traj.dt = cfg.dt;
    traj.t_end = static_cast<double>(steps) * cfg.dt;
    traj.input = system.input;
    traj.samples.reserve(static_cast<std::size_t>(steps) + 1);

    StateVec x = x0;
    double u_cmd = 0.0;
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        if (k % hold_steps == 0) u_cmd = controller.law(x);
        if (!std::isfinite(u_cmd)) {
            std::ostringstream msg;
            msg << "controller returned non-finite input at t = " << t;
            throw NumericError(msg.str());
        }
        const double u = saturate(u_cmd, limit);
        const double torque = hinge_torque(system.input, x, u);
        traj.samples.push_back({t, x, u_cmd, u, torque, std::abs(torque * component(x, 3))});

        if (std::abs(x(0)) > cfg.fall_threshold) {
            traj.fallen = true;
            traj.fall_time = t;
            break;
        }
        if (k == steps) break;

        StateVec next = rk4_step(system.deriv, x, u, cfg.dt);
        if (!next.allFinite()) {
            std::ostringstream msg;
            msg << "state became non-finite; last good time t = " << t;
            throw NumericError(msg.str());
        }
        x = std::move(next);
    }
    return traj;
}

double trapz(const std::vector<double>& y, double dt) {
    if (y.size() < 2) return 0.0;
    double sum = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) sum += y[i];
    return sum * dt;
}

Metrics metrics(const Trajectory& traj) {
    if (traj.empty()) throw ConfigError("metrics: empty trajectory");
    Metrics m;
    m.fallen = traj.fallen;

    const std::size_t n = traj.samples.size();
    std::vector<double> roll(n), rate(n), rate_torque(n);
    double direction = 0.0;
    double opposite = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Sample& s = traj.samples[i];
        const double x_r = s.x(0);
        roll[i] = std::abs(x_r);
        rate[i] = std::abs(component(s.x, 3));
        rate_torque[i] = rate[i] * std::abs(s.torque);

        m.max_roll = std::max(m.max_roll, roll[i]);
        m.max_pend_rate = std::max(m.max_pend_rate, rate[i]);
        m.max_torque = std::max(m.max_torque, std::abs(s.torque));
        m.max_input = std::max(m.max_input, std::abs(s.u_applied));
        m.max_power = std::max(m.max_power, s.power);

        if (direction == 0.0 && x_r != 0.0) direction = x_r > 0.0 ? 1.0 : -1.0;
        if (direction != 0.0) opposite = std::max(opposite, -direction * x_r);
    }
    m.overshoot_deg = opposite / kDeg;

    m.int_abs_roll = trapz(roll, traj.dt);
    m.int_abs_pend_rate = trapz(rate, traj.dt);
    m.int_abs_rate_torque = trapz(rate_torque, traj.dt);

    if (!traj.fallen) {
        const double threshold = std::max(0.01 * roll.front(), 0.1 * kDeg);
        std::optional<std::size_t> last_out;
        for (std::size_t i = 0; i < n; ++i) {
            if (roll[i] >= threshold) last_out = i;
        }
        if (!last_out) {
            m.settling_time = traj.samples.front().t;
        } else if (*last_out + 1 < n) {
            m.settling_time = traj.samples[*last_out + 1].t;
        }
    }
    return m;
}

void write_csv(const Trajectory& traj, std::ostream& os) {
    os << "t,x_r,x_r_dot,n,n_dot,u_cmd,u_applied,power\n";
    const auto old_precision = os.precision(9);
    for (const Sample& s : traj.samples) {
        os << s.t;
        for (Eigen::Index i = 0; i < 4; ++i) os << ',' << component(s.x, i);
        os << ',' << s.u_cmd << ',' << s.u_applied << ',' << s.power << '\n';
    }
    os.precision(old_precision);
}

}  // namespace balancer
