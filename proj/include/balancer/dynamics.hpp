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

#include <span>
#include <vector>

#include <Eigen/Core>

namespace balancer {

// =============================================================================
// Parameter sets
// =============================================================================

/// Bicycle carrying a lateral pendulum that swings about an axis normal to the
/// bicycle plane, hinged at height h_n above the ground line.
///
/// ixx, iyy, izz are the pendulum's principal inertias about its own center of
/// mass. The bar-augmented quantities used by the equations of motion are
/// computed on demand from the stored fields.
struct LateralPlant {
    double m_n = 6.6;         // pendulum mass [kg]
    double h_n = 0.13;        // hinge height above ground [m]
    double l_p = 0.15;        // hinge to pendulum center of mass [m]
    double ixx = 0.0295;      // [kg m^2]
    double iyy = 0.0055;      // [kg m^2]
    double izz = 0.0295;      // [kg m^2]
    double i_r = 0.9;         // bicycle roll inertia about the ground line [kg m^2]
    double mass_bike = 9.0;   // [kg]
    double h_com = 0.2667;    // bicycle center of mass height [m]
    double g = 9.81;          // [m/s^2]

    /// Throws ConfigError unless every field is finite and strictly positive.
    void validate() const;

    double roll_inertia() const { return i_r + m_n * h_n * h_n; }
    double ixx_aug() const { return ixx + m_n * l_p * l_p; }
    double iyy_aug() const { return iyy; }
    double izz_aug() const { return izz + m_n * l_p * l_p; }
    /// M*H + m_n*h_n, the roll gravity-moment coefficient (without g).
    double gravity_moment() const { return mass_bike * h_com + m_n * h_n; }
    /// m_n * l_p * h_n, the roll/pendulum inertial coupling.
    double coupling() const { return m_n * l_p * h_n; }

    bool operator==(const LateralPlant&) const = default;
};

/// Bicycle + vertical (inverted) balancer in the two-link form
/// M(q) q'' + C(q, q') + G(q) = [0, u]^T with q = (theta1, theta2),
/// theta1 the bicycle roll and theta2 the balancer angle relative to the frame.
struct VerticalPlant {
    double m1 = 9.0;       // bicycle mass [kg]
    double m2 = 0.3739;    // balancer mass [kg]
    double l1 = 0.5;       // roll axis to balancer hinge [m]
    double lg1 = 0.2667;   // roll axis to bicycle center of mass [m]
    double lg2 = 0.3354;   // hinge to balancer center of mass [m]
    double i1 = 0.9 - 9.0 * 0.2667 * 0.2667;  // about its center of mass [kg m^2]
    double i2 = 0.3739 * 0.3354 * 0.3354 / 3.0;  // uniform rod about its center [kg m^2]
    double g0 = 9.81;      // [m/s^2]

    /// Masses, lengths and gravity strictly positive, inertias non-negative,
    /// and the mass matrix positive definite.
    void validate() const;

    struct Coefficients {
        double a, b, gamma, k1, k2;
    };
    Coefficients coefficients() const;

    Eigen::Matrix2d mass_matrix(double theta2) const;

    bool operator==(const VerticalPlant&) const = default;
};

/// Armature-controlled DC motor driving the pendulum hinge directly (no gear).
struct MotorParams {
    double r_ohm = 14.5657;   // armature resistance [ohm]
    double l_ind = 0.9650;    // armature inductance [H]
    double k_t = 5.5;         // torque / back-EMF constant [N m / A]
    double v_max = 30.0;      // supply voltage [V]

    void validate() const;

    bool operator==(const MotorParams&) const = default;
};

// =============================================================================
// States
// =============================================================================

/// Mechanical state. For the vertical plant x_r is theta1 and n is theta2.
struct State4 {
    double x_r = 0.0;
    double x_r_dot = 0.0;
    double n = 0.0;
    double n_dot = 0.0;

    Eigen::Vector4d vec() const { return {x_r, x_r_dot, n, n_dot}; }
    static State4 from(const Eigen::Ref<const Eigen::VectorXd>& v);
    bool is_finite() const;

    State4 operator-() const { return {-x_r, -x_r_dot, -n, -n_dot}; }
    bool operator==(const State4&) const = default;
};

/// Mechanical state augmented with the motor torque U.
struct State5 {
    State4 mech;
    double u_torque = 0.0;

    Eigen::Matrix<double, 5, 1> vec() const;
    static State5 from(const Eigen::Ref<const Eigen::VectorXd>& v);
    bool is_finite() const;

    bool operator==(const State5&) const = default;
};

struct Accel {
    double roll;       // x_r'' (or theta1'')
    double pendulum;   // n'' (or theta2'')
};

struct Energy {
    double kinetic;
    double potential;
    double total() const { return kinetic + potential; }
};

// =============================================================================
// Lateral pendulum
// =============================================================================

/// Generalized accelerations of the lateral-pendulum bicycle under hinge
/// torque `torque` [N m].
///
/// The two Euler-Lagrange equations share the symmetric inertia matrix
///   [ Ir_bar + Ixx sin^2 n + Iyy cos^2 n    -m L h cos n ]
///   [ -m L h cos n                           Izz_bar     ]
/// and are solved together for (x_r'', n'').
Accel lateral_accel(const LateralPlant& plant, const State4& s, double torque);

/// Kinetic and potential energy of the lateral-pendulum bicycle; the
/// potential is MH g cos x_r + m L g sin n sin x_r so that KE + PE is
/// conserved by lateral_accel when the torque is zero.
Energy lateral_energy(const LateralPlant& plant, const State4& s);

/// Lagrangian KE - PE in generalized coordinates q = (x_r, n), q' = (x_r', n').
double lateral_lagrangian(const LateralPlant& plant, const Eigen::Vector2d& q,
                          const Eigen::Vector2d& qdot);

/// Euler-Lagrange residual at one interior sample of a path.
struct LagrangeResidual {
    double t;
    double roll;       // d/dt dL/dx_r' - dL/dx_r - 0
    double pendulum;   // d/dt dL/dn'   - dL/dn   - torque
};

/// Model-independent check of a sampled trajectory: evaluates the
/// Euler-Lagrange equations of the Lagrangian by finite differences only
/// (central differences in q and q' on lateral_lagrangian, central
/// differences in time on dL/dq'). Never calls lateral_accel.
///
/// `path` must be uniformly sampled at `dt` with constant hinge torque.
/// Returns one residual per interior sample; throws ConfigError for fewer
/// than three samples.
std::vector<LagrangeResidual> lagrangian_residual(const LateralPlant& plant,
                                                  std::span<const State4> path,
                                                  double dt, double torque);

// =============================================================================
// Vertical pendulum
// =============================================================================

Accel vertical_accel(const VerticalPlant& plant, const State4& s, double torque);

/// 1/2 q'^T M(q) q' and k1 cos theta1 + k2 cos(theta1 + theta2).
Energy vertical_energy(const VerticalPlant& plant, const State4& s);

// =============================================================================
// DC motor and augmented plant
// =============================================================================

/// U' = -(R/L) U + (k/L) v_in - (k^2/L) n'. The back-EMF term uses the
/// hinge rate n' since the motor drives the pendulum directly.
double motor_torque_rate(const MotorParams& mp, double torque, double n_dot, double v_in);

/// d/dt of (x_r, x_r', n, n', U) with voltage input v_in.
State5 augmented_deriv(const LateralPlant& plant, const MotorParams& mp, const State5& s,
                       double v_in);

// Vector forms used by the simulator and linearizer.
Eigen::VectorXd lateral_deriv(const LateralPlant& plant, const Eigen::VectorXd& x, double torque);
Eigen::VectorXd vertical_deriv(const VerticalPlant& plant, const Eigen::VectorXd& x, double torque);
Eigen::VectorXd augmented_deriv(const LateralPlant& plant, const MotorParams& mp,
                                const Eigen::VectorXd& x, double v_in);

}  // namespace balancer
