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

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "balancer/linearize.hpp"
#include "balancer/simulate.hpp"

namespace balancer {

/// Single-input state feedback u = -k (x - reference).
struct GainVector {
    Eigen::RowVectorXd k;
    std::optional<double> sample_dt;  // set for digital (sample-and-hold) gains
    Eigen::VectorXd reference;        // empty means the origin

    double apply(const Eigen::VectorXd& x) const;
};

/// LQR weights. q must be symmetric with a non-negative diagonal, r positive.
struct Weighting {
    Eigen::MatrixXd q;
    Eigen::MatrixXd r;

    void validate(Eigen::Index states, Eigen::Index inputs) const;
    static Weighting diagonal(const Eigen::VectorXd& q_diag, double r);
};

struct PolePlacement {
    GainVector gain;
    /// 2-norm condition number of the controllability matrix.
    double controllability_condition = 0.0;
};

/// Ackermann's formula k = e_n^T Ctrb^{-1} phi(A). `poles` must be closed
/// under conjugation. Throws ConfigError for an uncontrollable pair (with the
/// numerical rank) or unpaired complex poles.
PolePlacement place_poles(const LinearModel& model, std::span<const std::complex<double>> poles);

struct LqrSolution {
    GainVector gain;
    Eigen::MatrixXd p;
    int iterations = 0;
    /// Frobenius norm of the Riccati residual at p.
    double residual = 0.0;
};

/// Discrete LQR with cost sum x'Qx + u'Ru (no cross term). Solves the DARE by
/// structure-preserving doubling followed by Riccati fixed-point polishing.
/// Throws NumericError on non-convergence or if A - Bk is not Schur stable.
LqrSolution dlqr(const LinearModel& model, const Weighting& w);

/// Continuous LQR. Stable invariant subspace of the Hamiltonian, refined by
/// Newton-Kleinman steps. Throws NumericError if A - Bk is not Hurwitz.
LqrSolution clqr(const LinearModel& model, const Weighting& w);

/// Residual of P = A'PA - A'PB (R + B'PB)^{-1} B'PA + Q.
Eigen::MatrixXd dare_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                              const Eigen::MatrixXd& p);

/// Residual of A'P + PA + Q - P B R^{-1} B' P.
Eigen::MatrixXd care_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                              const Eigen::MatrixXd& p);

/// Eigenvalues of A - B k.
std::vector<std::complex<double>> closed_loop_poles(const LinearModel& model,
                                                    const GainVector& gain);

double spectral_radius(const Eigen::MatrixXd& m);

/// Sort by (real, imag) for multiset comparison.
void sort_poles(std::vector<std::complex<double>>& poles);

/// Controller for the simulator. Digital gains carry their sample time so the
/// integrator holds the output between samples. Evaluating with a state of the
/// wrong dimension throws ConfigError.
Controller feedback_controller(const GainVector& gain);

}  // namespace balancer
