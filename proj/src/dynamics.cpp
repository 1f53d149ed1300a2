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

#include "balancer/dynamics.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "balancer/errors.hpp"

namespace balancer {
namespace {

void require_positive(double value, const char* name) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw ConfigError(std::string(name) + " must be finite and > 0, got " +
                          std::to_string(value));
    }
}

void require_non_negative(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw ConfigError(std::string(name) + " must be finite and >= 0, got " +
                          std::to_string(value));
    }
}

void require_finite(const State4& s, double input) {
    if (!s.is_finite() || !std::isfinite(input)) {
        throw ConfigError("non-finite state or input");
    }
}

// Solves [m11 m12; m12 m22] [a; b] = [f1; f2].
Accel solve_symmetric2(double m11, double m12, double m22, double f1, double f2) {
    const double det = m11 * m22 - m12 * m12;
    const double scale = std::abs(m11 * m22) + m12 * m12;
    if (!(std::abs(det) > 1e-12 * scale)) {
        throw NumericError("singular 2x2 inertia matrix (det = " + std::to_string(det) + ")");
    }
    return {(m22 * f1 - m12 * f2) / det, (m11 * f2 - m12 * f1) / det};
}

}  // namespace

void LateralPlant::validate() const {
    require_positive(m_n, "m_n");
    require_positive(h_n, "h_n");
    require_positive(l_p, "l_p");
    require_positive(ixx, "ixx");
    require_positive(iyy, "iyy");
    require_positive(izz, "izz");
    require_positive(i_r, "i_r");
    require_positive(mass_bike, "mass_bike");
    require_positive(h_com, "h_com");
    require_positive(g, "g");
}

void VerticalPlant::validate() const {
    require_positive(m1, "m1");
    require_positive(m2, "m2");
    require_positive(l1, "l1");
    require_positive(lg1, "lg1");
    require_positive(lg2, "lg2");
    require_non_negative(i1, "i1");
    require_non_negative(i2, "i2");
    require_positive(g0, "g0");
    // det M is smallest at theta2 = pi where it equals a*gamma - b^2.
    const auto c = coefficients();
    if (!(c.a * c.gamma - c.b * c.b > 1e-12 * c.a * c.gamma)) {
        throw ConfigError("vertical plant mass matrix is not positive definite");
    }
}

VerticalPlant::Coefficients VerticalPlant::coefficients() const {
    return {
        m1 * lg1 * lg1 + i1 + m2 * l1 * l1,
        m2 * l1 * lg2,
        m2 * lg2 * lg2 + i2,
        (m1 * lg1 + m2 * l1) * g0,
        m2 * lg2 * g0,
    };
}

Eigen::Matrix2d VerticalPlant::mass_matrix(double theta2) const {
    const auto [a, b, gamma, k1, k2] = coefficients();
    const double c2 = std::cos(theta2);
    Eigen::Matrix2d m;
    m << a + gamma + 2.0 * b * c2, gamma + b * c2,
         gamma + b * c2,           gamma;
    return m;
}

void MotorParams::validate() const {
    require_positive(r_ohm, "r_ohm");
    require_positive(l_ind, "l_ind");
    require_positive(k_t, "k_t");
    require_positive(v_max, "v_max");
}

State4 State4::from(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() < 4) throw ConfigError("State4 needs 4 components");
    return {v(0), v(1), v(2), v(3)};
}

bool State4::is_finite() const {
    return std::isfinite(x_r) && std::isfinite(x_r_dot) && std::isfinite(n) &&
           std::isfinite(n_dot);
}

Eigen::Matrix<double, 5, 1> State5::vec() const {
    Eigen::Matrix<double, 5, 1> v;
    v << mech.x_r, mech.x_r_dot, mech.n, mech.n_dot, u_torque;
    return v;
}

State5 State5::from(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() != 5) throw ConfigError("State5 needs 5 components");
    return {{v(0), v(1), v(2), v(3)}, v(4)};
}

bool State5::is_finite() const { return mech.is_finite() && std::isfinite(u_torque); }

// -----------------------------------------------------------------------------
// Lateral pendulum
// -----------------------------------------------------------------------------

Accel lateral_accel(const LateralPlant& plant, const State4& s, double torque) {
    require_finite(s, torque);
    const double sn = std::sin(s.n);
    const double cn = std::cos(s.n);
    const double sx = std::sin(s.x_r);
    const double cx = std::cos(s.x_r);
    const double sin2n = std::sin(2.0 * s.n);

    const double ixx = plant.ixx_aug();
    const double iyy = plant.iyy_aug();
    const double mlh = plant.coupling();
    const double mlg = plant.m_n * plant.l_p * plant.g;
    const double mhg = plant.gravity_moment() * plant.g;

    const double m11 = plant.roll_inertia() + ixx * sn * sn + iyy * cn * cn;
    const double m12 = -mlh * cn;
    const double m22 = plant.izz_aug();

    const double f_roll = s.x_r_dot * s.n_dot * sin2n * (iyy - ixx) -
                          mlh * s.n_dot * s.n_dot * sn - mlg * sn * cx + mhg * sx;
    const double f_pend =
        torque + 0.5 * s.x_r_dot * s.x_r_dot * sin2n * (ixx - iyy) - mlg * cn * sx;

    return solve_symmetric2(m11, m12, m22, f_roll, f_pend);
}

Energy lateral_energy(const LateralPlant& plant, const State4& s) {
    require_finite(s, 0.0);
    const double sn = std::sin(s.n);
    const double cn = std::cos(s.n);
    const double m = plant.m_n;
    const double h = plant.h_n;
    const double l = plant.l_p;
    const double xd2 = s.x_r_dot * s.x_r_dot;

    // Pendulum kinetic terms one by one, before folding into bar-augmented inertias.
    const double ke = 0.5 * m * h * h * xd2 * cn * cn + 0.5 * m * l * l * s.n_dot * s.n_dot -
                      m * l * h * s.x_r_dot * s.n_dot * cn + 0.5 * m * h * h * xd2 * sn * sn +
                      0.5 * m * l * l * xd2 * sn * sn + 0.5 * plant.ixx * xd2 * sn * sn +
                      0.5 * plant.iyy * xd2 * cn * cn + 0.5 * plant.izz * s.n_dot * s.n_dot +
                      0.5 * plant.i_r * xd2;
    const double pe = plant.gravity_moment() * plant.g * std::cos(s.x_r) +
                      m * l * plant.g * sn * std::sin(s.x_r);
    return {ke, pe};
}

double lateral_lagrangian(const LateralPlant& plant, const Eigen::Vector2d& q,
                          const Eigen::Vector2d& qdot) {
    const double sn = std::sin(q(1));
    const double cn = std::cos(q(1));
    const double xd = qdot(0);
    const double nd = qdot(1);
    return 0.5 * plant.roll_inertia() * xd * xd + 0.5 * plant.izz_aug() * nd * nd -
           plant.coupling() * xd * nd * cn + 0.5 * plant.ixx_aug() * xd * xd * sn * sn +
           0.5 * plant.iyy_aug() * xd * xd * cn * cn -
           plant.gravity_moment() * plant.g * std::cos(q(0)) -
           plant.m_n * plant.l_p * plant.g * sn * std::sin(q(0));
}

std::vector<LagrangeResidual> lagrangian_residual(const LateralPlant& plant,
                                                  std::span<const State4> path,
                                                  double dt, double torque) {
    if (path.size() < 3) throw ConfigError("lagrangian_residual needs at least 3 samples");
    if (!(dt > 0.0)) throw ConfigError("lagrangian_residual needs dt > 0");

    constexpr double kEps = 1e-6;
    // L is quadratic in q', so a unit central step is exact and keeps roundoff out of p.
    constexpr double kRateStep = 1.0;
    auto split = [](const State4& s) {
        return std::pair{Eigen::Vector2d(s.x_r, s.n), Eigen::Vector2d(s.x_r_dot, s.n_dot)};
    };
    auto momentum = [&](const State4& s) {
        auto [q, qd] = split(s);
        Eigen::Vector2d p;
        for (int i = 0; i < 2; ++i) {
            Eigen::Vector2d up = qd, dn = qd;
            up(i) += kRateStep;
            dn(i) -= kRateStep;
            p(i) = (lateral_lagrangian(plant, q, up) - lateral_lagrangian(plant, q, dn)) /
                   (2.0 * kRateStep);
        }
        return p;
    };
    auto force = [&](const State4& s) {
        auto [q, qd] = split(s);
        Eigen::Vector2d f;
        for (int i = 0; i < 2; ++i) {
            Eigen::Vector2d up = q, dn = q;
            up(i) += kEps;
            dn(i) -= kEps;
            f(i) = (lateral_lagrangian(plant, up, qd) - lateral_lagrangian(plant, dn, qd)) /
                   (2.0 * kEps);
        }
        return f;
    };

    std::vector<Eigen::Vector2d> p(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) p[k] = momentum(path[k]);

    std::vector<LagrangeResidual> out;
    out.reserve(path.size() - 2);
    for (std::size_t k = 1; k + 1 < path.size(); ++k) {
        const Eigen::Vector2d pdot = (p[k + 1] - p[k - 1]) / (2.0 * dt);
        const Eigen::Vector2d r = pdot - force(path[k]);
        out.push_back({static_cast<double>(k) * dt, r(0), r(1) - torque});
    }
    return out;
}

// -----------------------------------------------------------------------------
// Vertical pendulum
// -----------------------------------------------------------------------------

Accel vertical_accel(const VerticalPlant& plant, const State4& s, double torque) {
    require_finite(s, torque);
    const auto [a, b, gamma, k1, k2] = plant.coefficients();
    const double th1 = s.x_r, th2 = s.n, w1 = s.x_r_dot, w2 = s.n_dot;
    const Eigen::Matrix2d m = plant.mass_matrix(th2);

    const double s2 = std::sin(th2);
    const double s12 = std::sin(th1 + th2);
    const Eigen::Vector2d coriolis(-b * w2 * (2.0 * w1 + w2) * s2, b * w1 * w1 * s2);
    const Eigen::Vector2d gravity = -Eigen::Vector2d(k1 * std::sin(th1) + k2 * s12, k2 * s12);
    const Eigen::Vector2d rhs = Eigen::Vector2d(0.0, torque) - coriolis - gravity;

    const Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
    const double cond = svd.singularValues()(0) / svd.singularValues()(1);
    if (!(cond < 1e12)) {
        throw NumericError("vertical mass matrix near singular (cond = " + std::to_string(cond) +
                           ")");
    }
    return solve_symmetric2(m(0, 0), m(0, 1), m(1, 1), rhs(0), rhs(1));
}

Energy vertical_energy(const VerticalPlant& plant, const State4& s) {
    require_finite(s, 0.0);
    const auto c = plant.coefficients();
    const Eigen::Vector2d qd(s.x_r_dot, s.n_dot);
    const double ke = 0.5 * qd.dot(plant.mass_matrix(s.n) * qd);
    const double pe = c.k1 * std::cos(s.x_r) + c.k2 * std::cos(s.x_r + s.n);
    return {ke, pe};
}

// -----------------------------------------------------------------------------
// Motor
// -----------------------------------------------------------------------------

double motor_torque_rate(const MotorParams& mp, double torque, double n_dot, double v_in) {
    return (-mp.r_ohm * torque + mp.k_t * v_in - mp.k_t * mp.k_t * n_dot) / mp.l_ind;
}

State5 augmented_deriv(const LateralPlant& plant, const MotorParams& mp, const State5& s,
                       double v_in) {
    const Accel acc = lateral_accel(plant, s.mech, s.u_torque);
    return {{s.mech.x_r_dot, acc.roll, s.mech.n_dot, acc.pendulum},
            motor_torque_rate(mp, s.u_torque, s.mech.n_dot, v_in)};
}

Eigen::VectorXd lateral_deriv(const LateralPlant& plant, const Eigen::VectorXd& x,
                              double torque) {
    const State4 s = State4::from(x);
    const Accel acc = lateral_accel(plant, s, torque);
    return Eigen::Vector4d(s.x_r_dot, acc.roll, s.n_dot, acc.pendulum);
}

Eigen::VectorXd vertical_deriv(const VerticalPlant& plant, const Eigen::VectorXd& x,
                               double torque) {
    const State4 s = State4::from(x);
    const Accel acc = vertical_accel(plant, s, torque);
    return Eigen::Vector4d(s.x_r_dot, acc.roll, s.n_dot, acc.pendulum);
}

Eigen::VectorXd augmented_deriv(const LateralPlant& plant, const MotorParams& mp,
                                const Eigen::VectorXd& x, double v_in) {
    return augmented_deriv(plant, mp, State5::from(x), v_in).vec();
}

}  // namespace balancer
