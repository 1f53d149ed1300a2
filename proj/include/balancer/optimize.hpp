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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "balancer/simulate.hpp"

namespace balancer {

// =============================================================================
// Fitness functions
// =============================================================================

/// Added to (t_end - t_fall) for runs that fall, so earlier falls rank worse
/// and no fallen run can beat a survivor.
inline constexpr double kFallPenalty = 1e6;

struct Phase1Weights {
    double roll = 1.0;
    double pend_rate = 1.0;
};

/// roll * trapz|x_r| + pend_rate * trapz|n'|; kFallPenalty + remaining time
/// for fallen runs. Throws ConfigError for an empty trajectory.
double fitness_phase1(const Trajectory& traj, Phase1Weights w = {});

/// 0.01 trapz|x_r| + 30 max|n'| + 65 max|torque| + 0.1 trapz(|n'| |torque|)
/// in rad, rad/s and N m. Fallen runs get the same penalty as phase 1.
double fitness_phase2(const Trajectory& traj);

// =============================================================================
// Search space and optimizers
// =============================================================================

enum class ParamRole { PlantParameter, Pole, LqrWeight, Free };

struct ParamSpec {
    std::string name;
    double lo;
    double hi;
    ParamRole role = ParamRole::Free;
};

struct SearchSpace {
    std::vector<ParamSpec> params;

    /// lo < hi, poles strictly negative, LQR weights strictly positive.
    void validate() const;
    std::size_t size() const { return params.size(); }
    bool contains(const std::vector<double>& x) const;
    std::vector<double> clip(std::vector<double> x) const;
};

using Objective = std::function<double(const std::vector<double>&)>;

struct GaConfig {
    std::size_t population = 50;
    std::size_t generations = 100;
    double crossover_rate = 0.9;
    double mutation_rate = 0.1;
    double mutation_scale = 0.1;  // Gaussian sigma as a fraction of each range
    std::size_t elitism = 2;
    std::size_t tournament = 3;
    double blend_alpha = 0.5;
    std::uint64_t seed = 1;
    /// 0 = hardware concurrency; 1 = serial.
    unsigned threads = 1;

    void validate() const;
};

struct GenerationStats {
    std::size_t generation;
    double best;
    double mean;
    double worst;
};

struct GaResult {
    std::vector<double> best;
    double best_value;
    std::vector<GenerationStats> history;
    std::size_t evaluations = 0;
};

/// Real-coded GA: tournament selection, BLX-alpha crossover, Gaussian
/// mutation clipped to the box, elitism. Each offspring draws from its own
/// RNG stream keyed by (seed, generation, index), so results do not depend on
/// the number of evaluation threads.
GaResult ga_minimize(const SearchSpace& space, const Objective& objective, const GaConfig& cfg);

struct PatternResult {
    std::vector<double> best;
    double value;
    std::size_t evaluations = 0;
};

/// Compass search: poll +-step e_i in order, move to the first improving
/// point, halve the step after a full failed poll, stop once step < tol.
/// Points outside the box are skipped.
PatternResult pattern_search(const std::vector<double>& start, const Objective& objective,
                             const SearchSpace& space, double initial_step, double tol);

/// `generation,best,mean,worst`.
void write_history_csv(const std::vector<GenerationStats>& history, std::ostream& os);

/// Reads BALANCER_LAB_THREADS; unset or 0 means hardware concurrency.
unsigned threads_from_env();

}  // namespace balancer
