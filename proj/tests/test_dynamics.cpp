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
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "balancer/dynamics.hpp"
#include "balancer/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace balancer;
using doctest::Approx;

TEST_CASE("lateral: origin is an equilibrium") {
    const LateralPlant p;
    const Accel a = lateral_accel(p, {}, 0.0);
    CHECK(a.roll == 0.0);
    CHECK(a.pendulum == 0.0);
}

TEST_CASE("lateral: small roll matches the coupled closed form at n = 0") {
    const LateralPlant p;
    const double s = std::sin(0.01);
    // At n = 0 the inertia matrix is [[Ir + Iyy, -mLh], [-mLh, Izz]].
    const double m11 = p.i_r + p.m_n * p.h_n * p.h_n + p.iyy;
    const double m12 = -p.m_n * p.l_p * p.h_n;
    const double m22 = p.izz + p.m_n * p.l_p * p.l_p;
    const double f1 = (p.mass_bike * p.h_com + p.m_n * p.h_n) * p.g * s;
    const double f2 = -p.m_n * p.l_p * p.g * s;
    const double det = m11 * m22 - m12 * m12;

    const Accel a = lateral_accel(p, {0.01, 0.0, 0.0, 0.0}, 0.0);
    CHECK(a.roll == Approx((m22 * f1 - m12 * f2) / det).epsilon(1e-12));
    CHECK(a.pendulum == Approx((m11 * f2 - m12 * f1) / det).epsilon(1e-12));
    // Roll falls away from upright, pendulum swings back.
    CHECK(a.roll > 0.0);
    CHECK(a.pendulum < 0.0);
}

TEST_CASE("lateral: dynamics are odd in the state and torque") {
    const LateralPlant p;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const State4 s = testing::random_state(rng);
        const Accel a = lateral_accel(p, s, 0.3);
        const Accel b = lateral_accel(p, -s, -0.3);
        CHECK(a.roll == Approx(-b.roll).epsilon(1e-12));
        CHECK(a.pendulum == Approx(-b.pendulum).epsilon(1e-12));
    }
}

TEST_CASE("lateral: rejects non-finite input") {
    const LateralPlant p;
    CHECK_THROWS_AS(lateral_accel(p, {NAN, 0, 0, 0}, 0.0), ConfigError);
    CHECK_THROWS_AS(lateral_accel(p, {}, INFINITY), ConfigError);
}

TEST_CASE("lateral energy: fixed points") {
    const LateralPlant p;
    const Energy e0 = lateral_energy(p, {});
    CHECK(e0.kinetic == 0.0);
    CHECK(e0.potential == Approx(p.gravity_moment() * p.g).epsilon(1e-14));
    const Energy e1 = lateral_energy(p, {std::numbers::pi / 2, 0.0, 0.0, 0.0});
    CHECK(e1.kinetic == 0.0);
    CHECK(std::abs(e1.potential) < 1e-12);
}

TEST_CASE("lateral energy: kinetic term is the inertia quadratic form") {
    const LateralPlant p;
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        State4 s = testing::random_state(rng);
        auto ke = [&](double xd, double nd) {
            State4 t = s;
            t.x_r_dot = xd;
            t.n_dot = nd;
            return lateral_energy(p, t).kinetic;
        };
        // Extract M from basis evaluations, then compare with the plant fields.
        Eigen::Matrix2d m;
        m(0, 0) = 2.0 * ke(1, 0);
        m(1, 1) = 2.0 * ke(0, 1);
        m(0, 1) = m(1, 0) = ke(1, 1) - ke(1, 0) - ke(0, 1);
        const double sn = std::sin(s.n), cn = std::cos(s.n);
        CHECK(m(0, 0) == Approx(p.roll_inertia() + p.ixx_aug() * sn * sn + p.iyy_aug() * cn * cn));
        CHECK(m(0, 1) == Approx(-p.coupling() * cn));
        CHECK(m(1, 1) == Approx(p.izz_aug()));
        const Eigen::Vector2d qd(s.x_r_dot, s.n_dot);
        CHECK(lateral_energy(p, s).kinetic == Approx(0.5 * qd.dot(m * qd)).epsilon(1e-12));
        CHECK(lateral_energy(p, s).kinetic >= 0.0);
    }
}

TEST_CASE("lagrangian residual: equilibrium path is exact") {
    const LateralPlant p;
    const std::vector<State4> path(5);
    for (const auto& r : lagrangian_residual(p, path, 1e-4, 0.0)) {
        CHECK(std::abs(r.roll) < 1e-12);
        CHECK(std::abs(r.pendulum) < 1e-12);
    }
    CHECK_THROWS_AS(lagrangian_residual(p, std::vector<State4>(2), 1e-4, 0.0), ConfigError);
}

TEST_CASE("lagrangian residual: simulated paths satisfy the Euler-Lagrange equations") {
    const LateralPlant p;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 6; ++i) {
        const State4 s0 = testing::random_state(rng);
        const double torque = (i % 2) * 0.1;
        const auto path = testing::lateral_path(p, s0, torque, 1e-5, 400);
        CHECK(testing::max_abs_residual(p, path, 1e-5, torque) < 1e-4);
    }
}

TEST_CASE("lagrangian residual: second-order convergence in dt") {
    const LateralPlant p;
    const State4 s0{0.2, -0.4, 0.3, 0.8};
    const double r1 = testing::max_abs_residual(p, testing::lateral_path(p, s0, 0.1, 2e-3, 10),
                                                2e-3, 0.1);
    const double r2 = testing::max_abs_residual(p, testing::lateral_path(p, s0, 0.1, 1e-3, 20),
                                                1e-3, 0.1);
    const double ratio = r1 / r2;
    CHECK(ratio > 3.2);
    CHECK(ratio < 4.8);
}

TEST_CASE("lagrangian residual: a wrong model is caught") {
    const LateralPlant p;
    LateralPlant flipped = p;
    flipped.g = -p.g;  // sign-flipped gravity, never valid, only used to produce a path
    const auto path = testing::lateral_path(flipped, {0.3, 0.0, 0.2, 0.0}, 0.0, 1e-5, 200);
    CHECK(testing::max_abs_residual(p, path, 1e-5, 0.0) > 1.0);
}

TEST_CASE("lateral: unforced energy drift below 1e-6 over 1 s") {
    const LateralPlant p;
    const State4 s0{0.2, 0.5, -0.3, 1.0};
    const auto path = testing::lateral_path(p, s0, 0.0, 1e-5, 100000);
    const double e0 = lateral_energy(p, s0).total();
    double drift = 0.0;
    for (std::size_t k = 0; k < path.size(); k += 1000) {
        drift = std::max(drift, std::abs(lateral_energy(p, path[k]).total() - e0));
    }
    drift = std::max(drift, std::abs(lateral_energy(p, path.back()).total() - e0));
    CHECK(drift / std::abs(e0) < 1e-6);
}

TEST_CASE("vertical: equilibrium and small-roll closed form") {
    const VerticalPlant p;
    const Accel z = vertical_accel(p, {}, 0.0);
    CHECK(z.roll == 0.0);
    CHECK(z.pendulum == 0.0);

    const auto c = p.coefficients();
    const double s = std::sin(0.01);
    // M(0) = [[a + g + 2b, g + b], [g + b, g]], rhs = [(k1 + k2) s, k2 s].
    const double m11 = c.a + c.gamma + 2.0 * c.b, m12 = c.gamma + c.b, m22 = c.gamma;
    const double f1 = (c.k1 + c.k2) * s, f2 = c.k2 * s;
    const double det = m11 * m22 - m12 * m12;
    const Accel a = vertical_accel(p, {0.01, 0.0, 0.0, 0.0}, 0.0);
    CHECK(a.roll == Approx((m22 * f1 - m12 * f2) / det).epsilon(1e-12));
    CHECK(a.pendulum == Approx((m11 * f2 - m12 * f1) / det).epsilon(1e-12));
}

TEST_CASE("vertical: mass matrix positive definite for all balancer angles") {
    const VerticalPlant p;
    for (int i = 0; i < 360; ++i) {
        const double th = 2.0 * std::numbers::pi * i / 360.0;
        const Eigen::Matrix2d m = p.mass_matrix(th);
        CHECK(m.isApprox(m.transpose()));
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
    VerticalPlant bad = p;
    bad.m2 = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("vertical: unforced energy drift below 1e-6 over 1 s") {
    const VerticalPlant p;
    const DerivFn f = [&](const StateVec& x, double u) { return vertical_deriv(p, x, u); };
    StateVec x(4);
    x << 0.05, 0.1, -0.2, 0.3;
    const double e0 = vertical_energy(p, State4::from(x)).total();
    double drift = 0.0;
    for (int k = 1; k <= 100000; ++k) {
        x = rk4_step(f, x, 0.0, 1e-5);
        if (k % 1000 == 0) {
            drift = std::max(drift, std::abs(vertical_energy(p, State4::from(x)).total() - e0));
        }
    }
    CHECK(drift / std::abs(e0) < 1e-6);
}

TEST_CASE("motor: torque rate") {
    const MotorParams mp;
    CHECK(motor_torque_rate(mp, 0.0, 0.0, 0.0) == 0.0);
    CHECK(motor_torque_rate(mp, 1.0, 0.0, 0.0) == Approx(-14.5657 / 0.9650).epsilon(1e-12));
    CHECK(motor_torque_rate(mp, 1.0, 0.0, 0.0) == Approx(-15.095).epsilon(1e-4));
    for (double v : {-30.0, -1.0, 2.5, 30.0}) {
        const double u_ss = 5.5 * v / 14.5657;
        CHECK(std::abs(motor_torque_rate(mp, u_ss, 0.0, v)) < 1e-12);
    }
}

TEST_CASE("augmented: composition of the components") {
    const LateralPlant p;
    const MotorParams mp;
    const State5 zero;
    CHECK(augmented_deriv(p, mp, zero, 0.0).vec().isZero(0.0));

    const State5 s{{0.1, -0.2, 0.3, 0.4}, 1.5};
    const State5 d = augmented_deriv(p, mp, s, 12.0);
    const Accel a = lateral_accel(p, s.mech, 1.5);
    CHECK(d.mech.x_r == s.mech.x_r_dot);
    CHECK(d.mech.x_r_dot == a.roll);
    CHECK(d.mech.n == s.mech.n_dot);
    CHECK(d.mech.n_dot == a.pendulum);
    CHECK(d.u_torque == motor_torque_rate(mp, 1.5, 0.4, 12.0));
}
