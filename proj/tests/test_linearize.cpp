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
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "balancer/dynamics.hpp"
#include "balancer/errors.hpp"
#include "balancer/linearize.hpp"
#include "balancer/presets.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace balancer;
using doctest::Approx;

namespace {

LinearModel lateral_model(const LateralPlant& p) {
    return jacobian([&](const StateVec& x, double u) { return lateral_deriv(p, x, u); },
                    Eigen::VectorXd::Zero(4), 0.0);
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST_CASE("jacobian: affine map is recovered") {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd a0 = testing::random_matrix(rng, 5, 5);
    const Eigen::MatrixXd b0 = testing::random_matrix(rng, 5, 1);
    const Eigen::VectorXd c0 = testing::random_matrix(rng, 5, 1);
    const DerivFn f = [&](const StateVec& x, double u) -> StateVec { return a0 * x + b0 * u + c0; };
    const Eigen::VectorXd x0 = testing::random_matrix(rng, 5, 1);
    const LinearModel m = jacobian(f, x0, 0.7);
    CHECK((m.a - a0).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((m.b - b0).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(m.c.isIdentity());
    CHECK(m.d.isZero());
    CHECK_FALSE(m.discrete());
    CHECK(m.x0 == x0);
    CHECK(m.u0 == 0.7);
}

TEST_CASE("jacobian: lateral plant at the origin") {
    const LateralPlant p;
    const LinearModel m = lateral_model(p);
    CHECK(m.a.row(0) == Eigen::RowVector4d(0, 1, 0, 0));
    CHECK(m.a.row(2) == Eigen::RowVector4d(0, 0, 0, 1));
    // Hand linearization at n = 0 with the coupled inertia matrix.
    const double m11 = p.roll_inertia() + p.iyy_aug();
    const double m12 = -p.coupling();
    const double m22 = p.izz_aug();
    const double det = m11 * m22 - m12 * m12;
    const double mhg = p.gravity_moment() * p.g;
    const double mlg = p.m_n * p.l_p * p.g;
    CHECK(m.a(1, 0) == Approx((m22 * mhg + m12 * mlg) / det).epsilon(1e-7));
    CHECK(m.a(3, 0) == Approx((-m11 * mlg - m12 * mhg) / det).epsilon(1e-7));
    CHECK(m.a(1, 2) == Approx(-m22 * mlg / det).epsilon(1e-7));
    CHECK(m.b(1) == Approx(-m12 / det).epsilon(1e-7));
    CHECK(m.b(3) == Approx(m11 / det).epsilon(1e-7));
    CHECK(m.labels == std::vector<std::string>{"x_r", "x_r_dot", "n", "n_dot"});
}

TEST_CASE("jacobian: step-size robustness on the bicycle plants") {
    const LateralPlant lp;
    const VerticalPlant vp;
    const MotorParams mp;
    const DerivFn fs[] = {
        [&](const StateVec& x, double u) { return lateral_deriv(lp, x, u); },
        [&](const StateVec& x, double u) { return vertical_deriv(vp, x, u); },
        [&](const StateVec& x, double u) { return augmented_deriv(lp, mp, x, u); },
    };
    const Eigen::Index dims[] = {4, 4, 5};
    for (int i = 0; i < 3; ++i) {
        Eigen::VectorXd x0 = Eigen::VectorXd::Constant(dims[i], 0.05);
        const LinearModel full = jacobian(fs[i], x0, 0.2);
        const LinearModel half = jacobian(fs[i], x0, 0.2, 0.5);
        for (Eigen::Index r = 0; r < full.a.rows(); ++r) {
            for (Eigen::Index c = 0; c < full.a.cols(); ++c) {
                CHECK(std::abs(full.a(r, c) - half.a(r, c)) <=
                      1e-5 * std::max(1.0, std::abs(full.a(r, c))));
            }
        }
    }
}

TEST_CASE("jacobian: non-finite derivative names the coordinate") {
    const DerivFn f = [](const StateVec& x, double) -> StateVec {
        StateVec d = x;
        d(0) = std::sqrt(-x(2));  // NaN once x(2) is perturbed upward
        return d;
    };
    try {
        jacobian(f, Eigen::VectorXd::Zero(3), 0.0);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("x2") != std::string::npos);
    }
}

TEST_CASE("augmented plant: Jacobian agrees with the component derivatives") {
    const LateralPlant p;
    const MotorParams mp;
    const LinearModel m = jacobian(
        [&](const StateVec& x, double u) { return augmented_deriv(p, mp, x, u); },
        Eigen::VectorXd::Zero(5), 0.0);
    const LinearModel lat = lateral_model(p);
    CHECK((m.a.topLeftCorner(4, 4) - lat.a).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((m.a.block(0, 4, 4, 1) - lat.b).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(m.a(4, 4) == Approx(-mp.r_ohm / mp.l_ind).epsilon(1e-8));
    CHECK(m.a(4, 3) == Approx(-mp.k_t * mp.k_t / mp.l_ind).epsilon(1e-8));
    CHECK(m.b(4) == Approx(mp.k_t / mp.l_ind).epsilon(1e-8));
    CHECK(m.b.col(0).head(4).isZero(1e-12));
}

TEST_CASE("augmented plant: discrete structure against the reference model") {
    const LateralPlant p;
    const MotorParams mp;
    const LinearModel m = c2d_zoh(
        jacobian([&](const StateVec& x, double u) { return augmented_deriv(p, mp, x, u); },
                 Eigen::VectorXd::Zero(5), 0.0),
        0.01);
    const LinearModel pub = reference_augmented_model();
    // Diagonal close to one, kinematic rows carry dt, and B feeds the motor row.
    for (int i = 0; i < 4; ++i) CHECK(m.a(i, i) == Approx(pub.a(i, i)).epsilon(0.02));
    CHECK(m.a(0, 1) > 0.0);
    CHECK(m.a(2, 3) > 0.0);
    CHECK(m.b(4) > m.b(3));
    CHECK(pub.b(4) > pub.b(3));
    CHECK((m.a(3, 4) > 0.0) == (pub.a(3, 4) > 0.0));
    CHECK((m.a(4, 3) < 0.0) == (pub.a(4, 3) < 0.0));
}

TEST_CASE("expm: agrees with Eigen's matrix exponential") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 50; ++i) {
        const Eigen::MatrixXd a = testing::random_matrix(rng, 5, 5, 0.5 + i * 0.2);
        const Eigen::MatrixXd ref = a.exp();
        CHECK(rel_diff(expm(a), ref) < 1e-11);
    }
    CHECK(expm(Eigen::MatrixXd::Zero(3, 3)).isIdentity(0.0));
}

TEST_CASE("c2d: A = 0 gives identity and B dt") {
    const LinearModel m = LinearModel::from_ab(Eigen::MatrixXd::Zero(2, 2),
                                               (Eigen::MatrixXd(2, 1) << 1.0, -2.0).finished());
    const LinearModel d = c2d_zoh(m, 0.1);
    CHECK((d.a - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(d.b(0) - 0.1) < 1e-12);
    CHECK(std::abs(d.b(1) + 0.2) < 1e-12);
    REQUIRE(d.dt);
    CHECK(*d.dt == 0.1);
    CHECK(d.c == m.c);
}

TEST_CASE("c2d: scalar closed form") {
    const LinearModel m = LinearModel::from_ab(Eigen::MatrixXd::Constant(1, 1, -2.0),
                                               Eigen::MatrixXd::Constant(1, 1, 1.0));
    const LinearModel d = c2d_zoh(m, 0.1);
    CHECK(std::abs(d.a(0, 0) - std::exp(-0.2)) < 1e-12);
    CHECK(std::abs(d.b(0, 0) - (1.0 - std::exp(-0.2)) / 2.0) < 1e-12);
}

TEST_CASE("c2d: double integrator closed form") {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, 0, 0;
    const LinearModel m = LinearModel::from_ab(a, (Eigen::MatrixXd(2, 1) << 0, 1).finished());
    for (double h : {0.001, 0.01, 0.37, 2.0}) {
        const LinearModel d = c2d_zoh(m, h);
        Eigen::MatrixXd ad(2, 2);
        ad << 1, h, 0, 1;
        CHECK((d.a - ad).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(d.b(0) - h * h / 2.0) < 1e-12);
        CHECK(std::abs(d.b(1) - h) < 1e-12);
    }
}

TEST_CASE("c2d: semigroup identity on random systems") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i) {
        const LinearModel m =
            LinearModel::from_ab(testing::random_matrix(rng, 5, 5), testing::random_matrix(rng, 5, 1));
        const double dt = 0.01 + 0.02 * (i % 5);
        const LinearModel one = c2d_zoh(m, dt);
        const LinearModel two = c2d_zoh(m, 2.0 * dt);
        CHECK((two.a - one.a * one.a).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((two.b - (one.a * one.b + one.b)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("c2d and model validation errors") {
    const LinearModel m = LinearModel::from_ab(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 1));
    CHECK_THROWS_AS(c2d_zoh(m, 0.0), ConfigError);
    CHECK_THROWS_AS(c2d_zoh(c2d_zoh(m, 0.1), 0.1), ConfigError);
    LinearModel bad = m;
    bad.b = Eigen::MatrixXd::Zero(3, 1);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(default_state_labels(5).back() == "u_torque");
    CHECK(default_state_labels(3) == std::vector<std::string>{"x0", "x1", "x2"});
}
