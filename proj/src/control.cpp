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

#include "balancer/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "balancer/errors.hpp"

namespace balancer {
namespace {

void require_single_input(const LinearModel& model) {
    model.validate();
    if (model.inputs() != 1) throw ConfigError("only single-input models are supported");
}

// Solves A'X + XA = -S for X (continuous Lyapunov) by vectorization; n <= 10.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& s) {
    const auto n = a.rows();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * n, n * n);
    // vec(A'X) = (I kron A') vec X, vec(XA) = (A' kron I) vec X.
    const Eigen::MatrixXd at = a.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            big.block(i * n, j * n, n, n) += eye(i, j) * at + at(i, j) * eye;
        }
    }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(s.data(), n * n);
    const Eigen::VectorXd x = big.fullPivLu().solve(rhs);
    Eigen::MatrixXd out = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
    return 0.5 * (out + out.transpose());
}

// Solves X = A'XA + S for X (discrete Lyapunov) by vectorization.
Eigen::MatrixXd solve_stein(const Eigen::MatrixXd& a, const Eigen::MatrixXd& s) {
    const auto n = a.rows();
    const Eigen::MatrixXd at = a.transpose();
    Eigen::MatrixXd big = Eigen::MatrixXd::Identity(n * n, n * n);
    // vec(A'XA) = (A' kron A') vec X.
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) big.block(i * n, j * n, n, n) -= at(i, j) * at;
    }
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(s.data(), n * n);
    const Eigen::VectorXd x = big.fullPivLu().solve(rhs);
    Eigen::MatrixXd out = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
    return 0.5 * (out + out.transpose());
}

Eigen::RowVectorXd discrete_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const Eigen::MatrixXd& r, const Eigen::MatrixXd& p) {
    const Eigen::MatrixXd s = r + b.transpose() * p * b;
    return s.ldlt().solve(b.transpose() * p * a);
}

Eigen::RowVectorXd continuous_gain(const Eigen::MatrixXd& b, const Eigen::MatrixXd& r,
                                   const Eigen::MatrixXd& p) {
    return r.ldlt().solve(b.transpose() * p);
}

}  // namespace

double GainVector::apply(const Eigen::VectorXd& x) const {
    if (x.size() != k.size()) {
        std::ostringstream msg;
        msg << "gain expects a " << k.size() << "-state vector, got " << x.size();
        throw ConfigError(msg.str());
    }
    if (reference.size() == 0) return -k.dot(x);
    return -k.dot(x - reference);
}

void Weighting::validate(Eigen::Index states, Eigen::Index inputs) const {
    if (q.rows() != states || q.cols() != states) throw ConfigError("Q must be n x n");
    if (r.rows() != inputs || r.cols() != inputs) throw ConfigError("R must be m x m");
    if (!q.allFinite() || !r.allFinite()) throw ConfigError("Q and R must be finite");
    if (!q.isApprox(q.transpose(), 1e-12) || !r.isApprox(r.transpose(), 1e-12)) {
        throw ConfigError("Q and R must be symmetric");
    }
    if ((q.diagonal().array() < 0.0).any()) throw ConfigError("Q diagonal must be >= 0");
    if (r.llt().info() != Eigen::Success) throw ConfigError("R must be positive definite");
}

Weighting Weighting::diagonal(const Eigen::VectorXd& q_diag, double r) {
    return {q_diag.asDiagonal(), Eigen::MatrixXd::Constant(1, 1, r)};
}

void sort_poles(std::vector<std::complex<double>>& poles) {
    std::sort(poles.begin(), poles.end(), [](const auto& x, const auto& y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
}

double spectral_radius(const Eigen::MatrixXd& m) {
    return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<std::complex<double>> closed_loop_poles(const LinearModel& model,
                                                    const GainVector& gain) {
    const Eigen::MatrixXd acl = model.a - model.b * gain.k;
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(acl, false).eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// -----------------------------------------------------------------------------
// Pole placement
// -----------------------------------------------------------------------------

PolePlacement place_poles(const LinearModel& model, std::span<const std::complex<double>> poles) {
    require_single_input(model);
    const auto n = model.states();
    if (static_cast<Eigen::Index>(poles.size()) != n) {
        throw ConfigError("place_poles needs exactly one pole per state");
    }

    // Conjugate closure.
    std::vector<bool> used(poles.size(), false);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (!std::isfinite(poles[i].real()) || !std::isfinite(poles[i].imag())) {
            throw ConfigError("poles must be finite");
        }
        const double tol = 1e-9 * std::max(1.0, std::abs(poles[i]));
        if (used[i] || std::abs(poles[i].imag()) <= tol) continue;
        bool paired = false;
        for (std::size_t j = i + 1; j < poles.size() && !paired; ++j) {
            if (!used[j] && std::abs(poles[j] - std::conj(poles[i])) <= tol) {
                used[j] = paired = true;
            }
        }
        if (!paired) throw ConfigError("complex poles must come in conjugate pairs");
    }

    // Desired characteristic polynomial, highest power first: s^n + c1 s^{n-1} + ...
    std::vector<std::complex<double>> poly{1.0};
    for (const auto& p : poles) {
        std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] -= p * poly[i];
        }
        poly = std::move(next);
    }

    Eigen::MatrixXd ctrb(n, n);
    ctrb.col(0) = model.b;
    for (Eigen::Index i = 1; i < n; ++i) ctrb.col(i) = model.a * ctrb.col(i - 1);

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(ctrb);
    const auto& sv = svd.singularValues();
    const double tol = 1e-9 * sv(0);
    const auto rank = (sv.array() > tol).count();
    if (rank < n) {
        std::ostringstream msg;
        msg << "(A, B) is not controllable: controllability matrix rank " << rank << " < " << n;
        throw ConfigError(msg.str());
    }

    // phi(A) by Horner.
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd phi = eye;
    for (std::size_t i = 1; i < poly.size(); ++i) phi = phi * model.a + poly[i].real() * eye;

    Eigen::VectorXd last = Eigen::VectorXd::Zero(n);
    last(n - 1) = 1.0;
    const Eigen::RowVectorXd row = ctrb.transpose().fullPivLu().solve(last).transpose();

    PolePlacement out;
    out.gain.k = row * phi;
    out.gain.sample_dt = model.dt;
    out.controllability_condition = sv(0) / sv(n - 1);
    return out;
}

// -----------------------------------------------------------------------------
// Riccati equations
// -----------------------------------------------------------------------------

Eigen::MatrixXd dare_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                              const Eigen::MatrixXd& p) {
    const Eigen::MatrixXd s = r + b.transpose() * p * b;
    const Eigen::MatrixXd pba = b.transpose() * p * a;
    return a.transpose() * p * a - pba.transpose() * s.ldlt().solve(pba) + q - p;
}

Eigen::MatrixXd care_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                              const Eigen::MatrixXd& p) {
    const Eigen::MatrixXd bp = b.transpose() * p;
    return a.transpose() * p + p * a + q - bp.transpose() * r.ldlt().solve(bp);
}

LqrSolution dlqr(const LinearModel& model, const Weighting& w) {
    require_single_input(model);
    if (!model.discrete()) throw ConfigError("dlqr needs a discrete model; discretize with c2d_zoh first");
    w.validate(model.states(), model.inputs());
    const auto n = model.states();
    const Eigen::MatrixXd& a = model.a;
    const Eigen::MatrixXd& b = model.b;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

    // Structure-preserving doubling: H_k converges quadratically to P.
    Eigen::MatrixXd ak = a;
    Eigen::MatrixXd gk = b * w.r.ldlt().solve(b.transpose());
    Eigen::MatrixXd hk = w.q;
    int it = 0;
    bool converged = false;
    constexpr int kMaxIterations = 10000;
    for (; it < kMaxIterations; ++it) {
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(eye + gk * hk);
        const Eigen::MatrixXd v1 = lu.solve(ak);
        const Eigen::MatrixXd v2 = lu.solve(gk);
        Eigen::MatrixXd h_next = hk + ak.transpose() * hk * v1;
        gk = gk + ak * v2 * ak.transpose();
        ak = ak * v1;
        h_next = 0.5 * (h_next + h_next.transpose());
        gk = 0.5 * (gk + gk.transpose());
        if (!h_next.allFinite()) break;
        const double change = (h_next - hk).norm();
        hk = std::move(h_next);
        if (change <= 1e-12 * hk.norm()) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "DARE doubling did not converge after " << it << " iterations";
        throw NumericError(msg.str());
    }

    // Newton (Hewer) polishing; kept only while the residual shrinks.
    Eigen::MatrixXd p = hk;
    double residual = dare_residual(a, b, w.q, w.r, p).norm();
    for (int polish = 0; polish < 4; ++polish) {
        const Eigen::RowVectorXd k = discrete_gain(a, b, w.r, p);
        const Eigen::MatrixXd acl = a - b * k;
        const Eigen::MatrixXd candidate = solve_stein(acl, w.q + k.transpose() * w.r * k);
        const double cand_residual = dare_residual(a, b, w.q, w.r, candidate).norm();
        if (!(cand_residual < residual)) break;
        p = candidate;
        residual = cand_residual;
    }

    LqrSolution out;
    out.p = p;
    out.gain.k = discrete_gain(a, b, w.r, p);
    out.gain.sample_dt = model.dt;
    out.iterations = it;
    out.residual = residual;

    const double rho = spectral_radius(a - b * out.gain.k);
    if (!(rho < 1.0)) {
        std::ostringstream msg;
        msg << "dlqr closed loop not stable (spectral radius " << rho
            << "); (A, B) may not be stabilizable";
        throw NumericError(msg.str());
    }
    return out;
}

LqrSolution clqr(const LinearModel& model, const Weighting& w) {
    require_single_input(model);
    if (model.discrete()) throw ConfigError("clqr needs a continuous model");
    w.validate(model.states(), model.inputs());
    const auto n = model.states();
    const Eigen::MatrixXd& a = model.a;
    const Eigen::MatrixXd& b = model.b;

    Eigen::MatrixXd ham(2 * n, 2 * n);
    ham << a, -b * w.r.ldlt().solve(b.transpose()), -w.q, -a.transpose();
    const Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(ham);
    if (es.info() != Eigen::Success) throw NumericError("Hamiltonian eigensolver failed");

    Eigen::MatrixXcd basis(2 * n, n);
    Eigen::Index found = 0;
    const double scale = std::max(1.0, ham.norm());
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
        if (es.eigenvalues()(i).real() < -1e-12 * scale) {
            if (found == n) break;
            basis.col(found++) = es.eigenvectors().col(i);
        }
    }
    if (found != n) {
        throw NumericError("Hamiltonian has eigenvalues on the imaginary axis; "
                           "(A, B) not stabilizable or (A, Q) not detectable");
    }
    const Eigen::MatrixXcd x1 = basis.topRows(n);
    const Eigen::MatrixXcd x2 = basis.bottomRows(n);
    Eigen::MatrixXd p = x1.transpose().fullPivLu().solve(x2.transpose()).transpose().real();
    p = 0.5 * (p + p.transpose());

    double residual = care_residual(a, b, w.q, w.r, p).norm();
    int it = 0;
    for (; it < 8; ++it) {
        const Eigen::RowVectorXd k = continuous_gain(b, w.r, p);
        const Eigen::MatrixXd candidate =
            solve_lyapunov(a - b * k, w.q + k.transpose() * w.r * k);
        const double cand_residual = care_residual(a, b, w.q, w.r, candidate).norm();
        if (!(cand_residual < residual)) break;
        p = candidate;
        residual = cand_residual;
    }

    LqrSolution out;
    out.p = p;
    out.gain.k = continuous_gain(b, w.r, p);
    out.iterations = it;
    out.residual = residual;

    const Eigen::VectorXcd ev =
        Eigen::EigenSolver<Eigen::MatrixXd>(a - b * out.gain.k, false).eigenvalues();
    if (!(ev.real().maxCoeff() < 0.0)) {
        throw NumericError("clqr closed loop not Hurwitz");
    }
    return out;
}

Controller feedback_controller(const GainVector& gain) {
    return {[gain](const StateVec& x) { return gain.apply(x); }, gain.sample_dt};
}

}  // namespace balancer
