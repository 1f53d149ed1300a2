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

#include <string>
#include <vector>

#include <Eigen/Core>

#include "balancer/experiment.hpp"
#include "balancer/linearize.hpp"

namespace balancer {

/// `key = value` lines; angles and rates in degrees.
std::string metrics_summary(const Metrics& m);

/// Labeled matrix at 4 decimals, "-0.0000" style for tiny negatives.
std::string format_matrix(const std::string& title, const Eigen::MatrixXd& m,
                          const std::vector<std::string>& row_labels = {});

/// Full-precision matrix blocks in the config format ([matrix.A] ...).
std::string matrix_file(const LinearModel& m);

/// Gain, closed-loop eigenvalues and stability figures in the config format.
std::string gain_file(const Synthesis& s);

struct DiscrepancyRow {
    double dt;
    double a_distance;   // Frobenius
    double b_distance;
    int sign_matches;    // of 25 entries, zeros compared at the print precision
    double a01;          // x_r row, x_r' column
};

std::vector<DiscrepancyRow> discrepancy(const LinearModel& continuous,
                                        const std::vector<double>& dts);
std::string discrepancy_report(const std::vector<DiscrepancyRow>& rows);

struct CompareRow {
    std::string label;
    std::string preset;
    Metrics metrics;
    std::string expectation;
};

std::vector<CompareRow> run_comparison();
std::string compare_report(const std::vector<CompareRow>& rows);

}  // namespace balancer
