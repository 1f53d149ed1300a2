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

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "balancer/dynamics.hpp"
#include "balancer/errors.hpp"
#include "balancer/simulate.hpp"
#include "doctest.h"

using namespace balancer;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDeg = std::numbers::pi / 180.0;

System decay() {
    return {[](const StateVec& x, double) -> StateVec { return -x; }, InputKind::Torque};
}

Controller zero_law() {
    return {[](const StateVec&) { return 0.0; }, std::nullopt};
}

double decay_error(double dt) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 1.0;
    cfg.fall_threshold = kInf;
    const auto traj = integrate(decay(), StateVec::Constant(1, 1.0), zero_law(), cfg);
    return std::abs(traj.samples.back().x(0) - std::exp(-1.0));
}

Trajectory synthetic(const std::vector<double>& roll, const std::vector<double>& rate,
                     const std::vector<double>& torque, double dt, bool fallen = false) {
    Trajectory t;
    t.dt = dt;
    t.t_end = dt * static_cast<double>(roll.size() - 1);
    t.fallen = fallen;
    for (std::size_t i = 0; i < roll.size(); ++i) {
        StateVec x(4);
        x << roll[i], 0.0, 0.0, rate[i];
        t.samples.push_back({dt * static_cast<double>(i), x, torque[i], torque[i], torque[i],
                             std::abs(torque[i] * rate[i])});
    }
    if (fallen) t.fall_time = t.samples.back().t;
    return t;
}

}  // namespace

TEST_CASE("saturate") {
    CHECK(saturate(7.2, 6.0) == 6.0);
    CHECK(saturate(-40.0, 30.0) == -30.0);
    CHECK(saturate(3.0, std::nullopt) == 3.0);
    CHECK(saturate(-2.0, 6.0) == -2.0);
}

TEST_CASE("rk4: scalar exponential") {
    CHECK(decay_error(0.01) < 1e-9);
}

TEST_CASE("rk4: global error drops by 16 when dt halves") {
    const double ratio = decay_error(0.1) / decay_error(0.05);
    CHECK(ratio == Approx(16.0).epsilon(0.2));
}

TEST_CASE("rk4: harmonic oscillator period over 10 cycles") {
    const double w = 2.0 * std::numbers::pi;
    const System osc{[w](const StateVec& x, double) -> StateVec {
                         StateVec d(2);
                         d << x(1), -w * w * x(0);
                         return d;
                     },
                     InputKind::Torque};
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 10.5;
    cfg.fall_threshold = kInf;
    StateVec x0(2);
    x0 << 0.0, w;
    const auto traj = integrate(osc, x0, zero_law(), cfg);
    // Upward zero crossings, linearly interpolated.
    std::vector<double> crossings;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double a = traj.samples[i - 1].x(0), b = traj.samples[i].x(0);
        if (a < 0.0 && b >= 0.0) {
            crossings.push_back(traj.samples[i - 1].t + cfg.dt * (-a) / (b - a));
        }
    }
    REQUIRE(crossings.size() == 10);
    CHECK(std::abs(crossings.back() / 10.0 - 1.0) < 1e-6);
}

TEST_CASE("integrate: lateral plant falls without control") {
    const LateralPlant p;
    const System sys{[&](const StateVec& x, double u) { return lateral_deriv(p, x, u); },
                     InputKind::Torque};
    SimConfig cfg;
    StateVec x0 = StateVec::Zero(4);
    x0(0) = 0.01;
    const auto traj = integrate(sys, x0, zero_law(), cfg);
    REQUIRE(traj.fallen);
    CHECK(*traj.fall_time < 2.0);
    // Only the last sample may exceed the threshold.
    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
        CHECK(std::abs(traj.samples[i].x(0)) <= cfg.fall_threshold);
    }
    const auto& last = traj.samples.back();
    CHECK(std::abs(last.x(0)) > cfg.fall_threshold);
    CHECK(std::abs(last.x(0)) <= cfg.fall_threshold + cfg.dt * std::abs(last.x(1)) * 1.01);
}

TEST_CASE("integrate: saturation bounds every applied input") {
    const LateralPlant p;
    const System sys{[&](const StateVec& x, double u) { return lateral_deriv(p, x, u); },
                     InputKind::Torque};
    SimConfig cfg;
    cfg.torque_limit = 6.0;
    cfg.t_end = 1.0;
    const Controller big{[](const StateVec& x) { return -4000.0 * x(0) - 600.0 * x(1); },
                         std::nullopt};
    StateVec x0 = StateVec::Zero(4);
    x0(1) = 10.0 * kDeg;
    const auto traj = integrate(sys, x0, big, cfg);
    bool clipped = false;
    for (const auto& s : traj.samples) {
        CHECK(std::abs(s.u_applied) <= 6.0);
        CHECK(s.torque == s.u_applied);
        clipped = clipped || std::abs(s.u_cmd) > 6.0;
    }
    CHECK(clipped);
}

TEST_CASE("integrate: sampled controller holds its output") {
    const System sys = decay();
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.1;
    cfg.fall_threshold = kInf;
    const Controller c{[](const StateVec& x) { return x(0); }, 0.01};
    const auto traj = integrate(sys, StateVec::Constant(1, 1.0), c, cfg);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        if (i % 10 != 0) CHECK(traj.samples[i].u_cmd == traj.samples[i - 1].u_cmd);
        else CHECK(traj.samples[i].u_cmd != traj.samples[i - 1].u_cmd);
    }
    const Controller odd{[](const StateVec&) { return 0.0; }, 0.0015};
    CHECK_THROWS_AS(integrate(sys, StateVec::Constant(1, 1.0), odd, cfg), ConfigError);
}

TEST_CASE("integrate: deterministic") {
    const LateralPlant p;
    const System sys{[&](const StateVec& x, double u) { return lateral_deriv(p, x, u); },
                     InputKind::Torque};
    SimConfig cfg;
    cfg.torque_limit = 6.0;
    const Controller c{[](const StateVec& x) { return -300.0 * x(0) - 50.0 * x(1); }, 0.01};
    StateVec x0(4);
    x0 << 0.02, 0.1, 0.0, 0.0;
    const auto a = integrate(sys, x0, c, cfg);
    const auto b = integrate(sys, x0, c, cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK((a.samples[i].x.array() == b.samples[i].x.array()).all());
    }
}

TEST_CASE("integrate: non-finite state is reported with the last good time") {
    const System blow{[](const StateVec& x, double) -> StateVec { return x.array().square(); },
                      InputKind::Torque};
    SimConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 10.0;
    cfg.fall_threshold = kInf;
    try {
        integrate(blow, StateVec::Constant(1, 5.0), zero_law(), cfg);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("last good time") != std::string::npos);
    }
}

TEST_CASE("sim config validation") {
    SimConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.torque_limit = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("metrics: zero trajectory") {
    const auto t = synthetic({0, 0, 0}, {0, 0, 0}, {0, 0, 0}, 0.5);
    const Metrics m = metrics(t);
    CHECK(m.max_roll == 0.0);
    CHECK(m.max_pend_rate == 0.0);
    CHECK(m.max_torque == 0.0);
    CHECK(m.max_power == 0.0);
    CHECK(m.overshoot_deg == 0.0);
    REQUIRE(m.settling_time);
    CHECK(*m.settling_time == 0.0);
    CHECK_FALSE(m.fallen);
}

TEST_CASE("metrics: decaying exponential has no overshoot") {
    std::vector<double> roll, zero;
    for (int i = 0; i <= 500; ++i) {
        roll.push_back(0.1 * std::exp(-0.01 * i));
        zero.push_back(0.0);
    }
    const Metrics m = metrics(synthetic(roll, zero, zero, 0.01));
    CHECK(m.overshoot_deg == 0.0);
    CHECK(m.max_roll == Approx(0.1));
    // Settles once below max(1% of 0.1 rad, 0.1 deg) = 0.1 deg.
    REQUIRE(m.settling_time);
    const double expected = std::ceil(std::log(0.1 / (0.1 * kDeg)) / 0.01) * 0.01;
    CHECK(*m.settling_time == Approx(expected).epsilon(1e-9));
}

TEST_CASE("metrics: overshoot and never-settled") {
    const Metrics m = metrics(synthetic({0.1, 0.0, -0.05, 0.01}, {0, 0, 0, 0}, {0, 0, 0, 0}, 1.0));
    CHECK(m.overshoot_deg == Approx(0.05 / kDeg));
    CHECK_FALSE(m.settling_time);
    const Metrics f = metrics(synthetic({0.1, 0.0}, {0, 0}, {0, 0}, 1.0, true));
    CHECK(f.fallen);
    CHECK_FALSE(f.settling_time);
}

TEST_CASE("metrics: integrals and peaks") {
    const auto t = synthetic({0.1, 0.1, 0.1}, {1, 1, 1}, {-2, -2, -2}, 0.5);
    const Metrics m = metrics(t);
    CHECK(m.int_abs_roll == Approx(0.1));
    CHECK(m.int_abs_pend_rate == Approx(1.0));
    CHECK(m.int_abs_rate_torque == Approx(2.0));
    CHECK(m.max_torque == 2.0);
    CHECK(m.max_power == 2.0);
    CHECK(trapz({1.0, 3.0}, 2.0) == 4.0);
    CHECK(trapz({1.0}, 2.0) == 0.0);
    CHECK_THROWS_AS(metrics(Trajectory{}), ConfigError);
}

TEST_CASE("csv: header and rows are fixed") {
    const System still{[](const StateVec& x, double) -> StateVec { return StateVec::Zero(x.size()); },
                       InputKind::Torque};
    SimConfig cfg;
    cfg.dt = 0.5;
    cfg.t_end = 1.0;
    cfg.torque_limit = 1.5;
    StateVec x0 = StateVec::Zero(4);
    x0(0) = 0.1;
    x0(3) = 0.25;
    const Controller c{[](const StateVec&) { return 2.0; }, std::nullopt};
    std::ostringstream os;
    write_csv(integrate(still, x0, c, cfg), os);
    CHECK(os.str() ==
          "t,x_r,x_r_dot,n,n_dot,u_cmd,u_applied,power\n"
          "0,0.1,0,0,0.25,2,1.5,0.375\n"
          "0.5,0.1,0,0,0.25,2,1.5,0.375\n"
          "1,0.1,0,0,0.25,2,1.5,0.375\n");
}
