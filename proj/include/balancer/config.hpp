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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "balancer/dynamics.hpp"
#include "balancer/optimize.hpp"
#include "balancer/simulate.hpp"

namespace balancer {

// =============================================================================
// Sectioned key-value text
// =============================================================================
//
//   # comment
//   [plant]
//   kind = lateral
//   m_n = 6.6
//
//   [matrix.A]          # rows of whitespace/comma separated numbers
//   0 1
//   0 0
//
// Keys are unique within a section; sections are unique by name.

using MatrixRows = std::vector<std::vector<double>>;

struct IniSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
    MatrixRows rows;  // only for matrix.* sections

    bool is_matrix() const { return name.starts_with("matrix."); }
    const std::string* find(std::string_view key) const;
    void set(std::string key, std::string value);

    bool operator==(const IniSection&) const = default;
};

class IniDocument {
public:
    /// Throws ConfigError with the 1-based line number on malformed input.
    static IniDocument parse(std::string_view text);
    std::string serialize() const;

    const IniSection* find(std::string_view name) const;
    IniSection& section(std::string_view name);  // created on first use
    const std::vector<IniSection>& sections() const { return sections_; }

    bool operator==(const IniDocument&) const = default;

private:
    std::vector<IniSection> sections_;
};

/// Shortest round-trippable decimal form.
std::string format_number(double v);

// =============================================================================
// Experiment configuration
// =============================================================================

enum class PlantKind {
    Lateral,            // lateral pendulum bicycle
    Vertical,           // vertical balancer bicycle
    LateralMotorcycle,  // lateral pendulum on the heavier handlebar-study bicycle
    Linear,             // literal (A, B) from [matrix.A] / [matrix.B]
};

std::string_view to_string(PlantKind kind);

struct PlantSpec {
    PlantKind kind = PlantKind::Lateral;
    LateralPlant lateral;
    VerticalPlant vertical;
    /// Adds the motor torque state; input becomes the voltage.
    std::optional<MotorParams> motor;
    MatrixRows a;
    MatrixRows b;

    bool operator==(const PlantSpec&) const = default;
};

enum class ControllerKind { None, Poles, Dlqr, Clqr, Gain };

std::string_view to_string(ControllerKind kind);

struct ControllerSpec {
    ControllerKind kind = ControllerKind::None;
    std::vector<std::complex<double>> poles;
    std::vector<double> q_diag;
    double r = 1.0;
    /// Digital controller period; dlqr defaults to 0.01 s.
    std::optional<double> sample_dt;
    std::vector<double> gain;

    bool operator==(const ControllerSpec&) const = default;
};

/// Initial state in degrees at the file surface; u_torque in N m.
struct InitialState {
    double x_r_deg = 0.0;
    double x_r_dot_deg = 0.0;
    double n_deg = 0.0;
    double n_dot_deg = 0.0;
    double u_torque = 0.0;

    bool operator==(const InitialState&) const = default;
};

struct OptimizeSpec {
    /// phase1 | phase2 | sphere | constant
    std::string objective = "phase1";
    Phase1Weights weights;
    GaConfig ga;
    bool refine = false;
    double refine_step = 0.1;
    double refine_tol = 1e-4;
    /// Names: pole.K, plant.FIELD, q.K, log10_q.K, r, log10_r, or free names
    /// for the analytic objectives.
    std::vector<ParamSpec> params;
    double constant_value = 1.0;
};

struct ExperimentConfig {
    std::string name = "experiment";
    PlantSpec plant;
    ControllerSpec controller;
    InitialState initial;
    SimConfig sim;
    std::vector<double> linearize_dts;
    OptimizeSpec optimize;
    std::string trajectory_file = "trajectory.csv";
    bool svg = false;

    /// Plant invariants, controller shape and sim limits; names the field.
    void validate() const;
    /// Initial state in radians, sized for the configured plant.
    Eigen::VectorXd initial_vector() const;
    Eigen::Index state_dim() const;
};

bool operator==(const OptimizeSpec& a, const OptimizeSpec& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
IniDocument to_ini(const ExperimentConfig& cfg);
std::string serialize_config(const ExperimentConfig& cfg);

/// Writes `values` into a copy of `base` following the parameter naming
/// convention of OptimizeSpec::params.
ExperimentConfig apply_candidate(const ExperimentConfig& base, const std::vector<ParamSpec>& params,
                                 const std::vector<double>& values);

}  // namespace balancer
