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

#include "balancer/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "balancer/errors.hpp"

namespace balancer {
namespace {

double remaining_after_fall(const Trajectory& traj) {
    const double t_fall = traj.fall_time.value_or(traj.samples.back().t);
    return kFallPenalty + std::max(0.0, traj.t_end - t_fall);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t generation, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(generation), static_cast<std::uint32_t>(index)};
    return std::mt19937_64(seq);
}

double sanitize(double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : v; }

// Evaluates objective on every candidate, in parallel when threads > 1.
std::vector<double> evaluate_all(const Objective& objective,
                                 const std::vector<std::vector<double>>& candidates,
                                 unsigned threads) {
    std::vector<double> values(candidates.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(candidates.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            values[i] = sanitize(objective(candidates[i]));
        }
        return values;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < candidates.size(); i = next++) {
                    try {
                        values[i] = sanitize(objective(candidates[i]));
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return values;
}

GenerationStats summarize(std::size_t generation, const std::vector<double>& values) {
    GenerationStats s{generation, std::numeric_limits<double>::infinity(), 0.0,
                      -std::numeric_limits<double>::infinity()};
    double sum = 0.0;
    std::size_t finite = 0;
    for (double v : values) {
        s.best = std::min(s.best, v);
        s.worst = std::max(s.worst, v);
        if (std::isfinite(v)) {
            sum += v;
            ++finite;
        }
    }
    s.mean = finite > 0 ? sum / static_cast<double>(finite)
                        : std::numeric_limits<double>::infinity();
    return s;
}

}  // namespace

// -----------------------------------------------------------------------------
// Fitness
// -----------------------------------------------------------------------------

double fitness_phase1(const Trajectory& traj, Phase1Weights w) {
    if (traj.empty()) throw ConfigError("fitness_phase1: empty trajectory");
    if (traj.fallen) return remaining_after_fall(traj);
    const Metrics m = metrics(traj);
    return w.roll * m.int_abs_roll + w.pend_rate * m.int_abs_pend_rate;
}

double fitness_phase2(const Trajectory& traj) {
    if (traj.empty()) throw ConfigError("fitness_phase2: empty trajectory");
    if (traj.fallen) return remaining_after_fall(traj);
    const Metrics m = metrics(traj);
    return 0.01 * m.int_abs_roll + 30.0 * m.max_pend_rate + 65.0 * m.max_torque +
           0.1 * m.int_abs_rate_torque;
}

// -----------------------------------------------------------------------------
// Search space
// -----------------------------------------------------------------------------

void SearchSpace::validate() const {
    if (params.empty()) throw ConfigError("search space has no parameters");
    for (const auto& p : params) {
        if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || !(p.lo < p.hi)) {
            throw ConfigError("parameter " + p.name + ": need finite lo < hi");
        }
        if (p.role == ParamRole::Pole && !(p.hi < 0.0)) {
            throw ConfigError("pole parameter " + p.name + " must have a negative range");
        }
        if (p.role == ParamRole::LqrWeight && !(p.lo > 0.0)) {
            throw ConfigError("weight parameter " + p.name + " must have a positive range");
        }
        if (p.role == ParamRole::PlantParameter && !(p.lo > 0.0)) {
            throw ConfigError("plant parameter " + p.name + " must have a positive range");
        }
    }
}

bool SearchSpace::contains(const std::vector<double>& x) const {
    if (x.size() != params.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= params[i].lo && x[i] <= params[i].hi)) return false;
    }
    return true;
}

std::vector<double> SearchSpace::clip(std::vector<double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], params[i].lo, params[i].hi);
    return x;
}

void GaConfig::validate() const {
    if (population < 4) throw ConfigError("GA population must be >= 4");
    if (crossover_rate < 0.0 || crossover_rate > 1.0) throw ConfigError("crossover rate not in [0,1]");
    if (mutation_rate < 0.0 || mutation_rate > 1.0) throw ConfigError("mutation rate not in [0,1]");
    if (!(mutation_scale > 0.0)) throw ConfigError("mutation scale must be > 0");
    if (elitism < 1 || elitism >= population) throw ConfigError("elitism must be in [1, population)");
    if (tournament < 1 || tournament > population) throw ConfigError("bad tournament size");
    if (!(blend_alpha >= 0.0)) throw ConfigError("blend alpha must be >= 0");
}

// -----------------------------------------------------------------------------
// Genetic algorithm
// -----------------------------------------------------------------------------

GaResult ga_minimize(const SearchSpace& space, const Objective& objective, const GaConfig& cfg) {
    space.validate();
    cfg.validate();
    const std::size_t dim = space.size();
    const std::size_t pop = cfg.population;

    std::vector<std::vector<double>> population(pop, std::vector<double>(dim));
    for (std::size_t i = 0; i < pop; ++i) {
        auto rng = stream(cfg.seed, 0, i);
        for (std::size_t j = 0; j < dim; ++j) {
            population[i][j] =
                std::uniform_real_distribution<double>(space.params[j].lo, space.params[j].hi)(rng);
        }
    }
    std::vector<double> fitness = evaluate_all(objective, population, cfg.threads);

    GaResult result;
    result.evaluations = pop;
    result.history.push_back(summarize(0, fitness));

    std::vector<std::size_t> order(pop);
    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

        std::vector<std::vector<double>> next(pop);
        std::vector<double> next_fitness(pop);
        for (std::size_t e = 0; e < cfg.elitism; ++e) {
            next[e] = population[order[e]];
            next_fitness[e] = fitness[order[e]];
        }

        std::vector<std::vector<double>> children;
        children.reserve(pop - cfg.elitism);
        for (std::size_t i = cfg.elitism; i < pop; ++i) {
            auto rng = stream(cfg.seed, gen, i);
            std::uniform_int_distribution<std::size_t> pick(0, pop - 1);
            auto tournament = [&] {
                std::size_t best = pick(rng);
                for (std::size_t t = 1; t < cfg.tournament; ++t) {
                    const std::size_t c = pick(rng);
                    if (fitness[c] < fitness[best]) best = c;
                }
                return best;
            };
            const auto& pa = population[tournament()];
            const auto& pb = population[tournament()];
            std::uniform_real_distribution<double> unit(0.0, 1.0);

            std::vector<double> child = pa;
            if (unit(rng) < cfg.crossover_rate) {
                for (std::size_t j = 0; j < dim; ++j) {
                    const double lo = std::min(pa[j], pb[j]);
                    const double hi = std::max(pa[j], pb[j]);
                    const double spread = cfg.blend_alpha * (hi - lo);
                    child[j] = lo - spread + unit(rng) * (hi - lo + 2.0 * spread);
                }
            }
            for (std::size_t j = 0; j < dim; ++j) {
                if (unit(rng) < cfg.mutation_rate) {
                    const double sigma =
                        cfg.mutation_scale * (space.params[j].hi - space.params[j].lo);
                    child[j] += std::normal_distribution<double>(0.0, sigma)(rng);
                }
            }
            children.push_back(space.clip(std::move(child)));
        }

        const std::vector<double> child_fitness = evaluate_all(objective, children, cfg.threads);
        result.evaluations += children.size();
        for (std::size_t i = 0; i < children.size(); ++i) {
            next[cfg.elitism + i] = std::move(children[i]);
            next_fitness[cfg.elitism + i] = child_fitness[i];
        }
        population = std::move(next);
        fitness = std::move(next_fitness);
        result.history.push_back(summarize(gen, fitness));
    }

    const auto best = static_cast<std::size_t>(
        std::min_element(fitness.begin(), fitness.end()) - fitness.begin());
    result.best = population[best];
    result.best_value = fitness[best];
    return result;
}

// -----------------------------------------------------------------------------
// Pattern search
// -----------------------------------------------------------------------------

PatternResult pattern_search(const std::vector<double>& start, const Objective& objective,
                             const SearchSpace& space, double initial_step, double tol) {
    space.validate();
    if (!space.contains(start)) throw ConfigError("pattern_search: start outside the box");
    if (!(initial_step > 0.0) || !(tol > 0.0)) {
        throw ConfigError("pattern_search: step and tol must be > 0");
    }
    PatternResult r{start, sanitize(objective(start)), 1};
    constexpr std::size_t kMaxEvaluations = 1000000;

    double step = initial_step;
    while (step >= tol && r.evaluations < kMaxEvaluations) {
        bool improved = false;
        for (std::size_t i = 0; i < start.size() && !improved; ++i) {
            for (double sign : {1.0, -1.0}) {
                std::vector<double> trial = r.best;
                trial[i] += sign * step;
                if (!space.contains(trial)) continue;
                const double v = sanitize(objective(trial));
                ++r.evaluations;
                if (v < r.value) {
                    r.best = std::move(trial);
                    r.value = v;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return r;
}

void write_history_csv(const std::vector<GenerationStats>& history, std::ostream& os) {
    os << "generation,best,mean,worst\n";
    const auto old_precision = os.precision(12);
    for (const auto& h : history) {
        os << h.generation << ',' << h.best << ',' << h.mean << ',' << h.worst << '\n';
    }
    os.precision(old_precision);
}

unsigned threads_from_env() {
    const char* raw = std::getenv("BALANCER_LAB_THREADS");
    if (raw == nullptr || *raw == '\0') return 0;
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0' || v < 0) {
        throw ConfigError("BALANCER_LAB_THREADS must be a non-negative integer");
    }
    return static_cast<unsigned>(v);
}

}  // namespace balancer
