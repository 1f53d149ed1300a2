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

#include "balancer/linearize.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "balancer/errors.hpp"

namespace balancer {

void LinearModel::validate() const {
    const auto n = a.rows();
    if (a.cols() != n || n == 0) throw ConfigError("A must be square and non-empty");
    if (b.rows() != n || b.cols() == 0) throw ConfigError("B must have as many rows as A");
    if (c.cols() != n) throw ConfigError("C must have as many columns as A");
    if (d.rows() != c.rows() || d.cols() != b.cols()) throw ConfigError("D shape mismatch");
    if (dt && !(*dt > 0.0)) throw ConfigError("discrete model needs dt > 0");
    if (!a.allFinite() || !b.allFinite() || !c.allFinite() || !d.allFinite()) {
        throw ConfigError("model matrices must be finite");
    }
}

std::vector<std::string> default_state_labels(Eigen::Index n) {
    static const std::array<const char*, 5> kMech{"x_r", "x_r_dot", "n", "n_dot", "u_torque"};
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < n; ++i) {
        labels.emplace_back((n == 4 || n == 5) ? std::string(kMech[static_cast<std::size_t>(i)])
                                               : "x" + std::to_string(i));
    }
    return labels;
}

LinearModel LinearModel::from_ab(Eigen::MatrixXd a, Eigen::MatrixXd b, std::optional<double> dt) {
    LinearModel m;
    const auto n = a.rows();
    const auto k = b.cols();
    m.a = std::move(a);
    m.b = std::move(b);
    m.c = Eigen::MatrixXd::Identity(n, n);
    m.d = Eigen::MatrixXd::Zero(n, k);
    m.dt = dt;
    m.x0 = Eigen::VectorXd::Zero(n);
    m.labels = default_state_labels(n);
    m.validate();
    return m;
}

LinearModel jacobian(const DerivFn& f, const Eigen::VectorXd& x0, double u0, double step_scale) {
    const auto n = x0.size();
    auto eval = [&](const Eigen::VectorXd& x, double u, const std::string& what) {
        Eigen::VectorXd y = f(x, u);
        if (y.size() != n) throw ConfigError("derivative dimension differs from state dimension");
        if (!y.allFinite()) throw NumericError("non-finite derivative when perturbing " + what);
        return y;
    };
    const auto labels = default_state_labels(n);

    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = step_scale * std::max(1e-6, 1e-6 * std::abs(x0(i)));
        Eigen::VectorXd up = x0, dn = x0;
        up(i) += h;
        dn(i) -= h;
        const auto& name = labels[static_cast<std::size_t>(i)];
        a.col(i) = (eval(up, u0, name) - eval(dn, u0, name)) / (2.0 * h);
    }
    const double hu = step_scale * std::max(1e-6, 1e-6 * std::abs(u0));
    Eigen::MatrixXd b = (eval(x0, u0 + hu, "input") - eval(x0, u0 - hu, "input")) / (2.0 * hu);

    LinearModel m = LinearModel::from_ab(std::move(a), std::move(b));
    m.x0 = x0;
    m.u0 = u0;
    return m;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw ConfigError("expm needs a square matrix");
    if (!m.allFinite()) throw NumericError("expm of a non-finite matrix");
    const auto n = m.rows();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

    const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Eigen::MatrixXd x = m / std::ldexp(1.0, squarings);

    // [6/6] Pade coefficients c_k = (12-k)! 6! / (12! k! (6-k)!).
    constexpr int q = 6;
    double c = 1.0;
    Eigen::MatrixXd power = eye;
    Eigen::MatrixXd num = eye;
    Eigen::MatrixXd den = eye;
    for (int k = 1; k <= q; ++k) {
        c *= static_cast<double>(q - k + 1) / static_cast<double>(k * (2 * q - k + 1));
        power = power * x;
        num += c * power;
        den += ((k % 2 == 0) ? c : -c) * power;
    }
    Eigen::MatrixXd e = den.partialPivLu().solve(num);
    for (int i = 0; i < squarings; ++i) e = e * e;
    return e;
}

LinearModel c2d_zoh(const LinearModel& continuous, double dt) {
    continuous.validate();
    if (continuous.discrete()) throw ConfigError("c2d_zoh expects a continuous model");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("c2d_zoh needs dt > 0");

    const auto n = continuous.states();
    const auto k = continuous.inputs();
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n + k, n + k);
    block.topLeftCorner(n, n) = continuous.a * dt;
    block.topRightCorner(n, k) = continuous.b * dt;
    const Eigen::MatrixXd phi = expm(block);

    LinearModel out = continuous;
    out.a = phi.topLeftCorner(n, n);
    out.b = phi.topRightCorner(n, k);
    out.dt = dt;
    return out;
}

}  // namespace balancer
