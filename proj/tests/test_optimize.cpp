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
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <sstream>

#include "balancer/errors.hpp"
#include "balancer/experiment.hpp"
#include "balancer/optimize.hpp"
#include "balancer/presets.hpp"
#include "doctest.h"

using namespace balancer;
using doctest::Approx;

namespace {

// Fall time of the reference-weights run, frozen from the first verified build.
constexpr double kDlqrBaselineFallTime = 0.967;

Trajectory constant_traj(double roll, double rate, double torque, double t_end, double dt,
                         std::optional<double> fall_at = std::nullopt) {
    Trajectory t;
    t.dt = dt;
    t.t_end = t_end;
    const auto n = static_cast<int>(std::llround((fall_at ? *fall_at : t_end) / dt));
    for (int i = 0; i <= n; ++i) {
        StateVec x(4);
        x << roll, 0.0, 0.0, rate;
        t.samples.push_back({i * dt, x, torque, torque, torque, std::abs(rate * torque)});
    }
    if (fall_at) {
        t.fallen = true;
        t.fall_time = *fall_at;
    }
    return t;
}

SearchSpace box(std::size_t dim, double lo, double hi) {
    SearchSpace s;
    for (std::size_t i = 0; i < dim; ++i) s.params.push_back({"x" + std::to_string(i), lo, hi});
    return s;
}

double sphere(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

}  // namespace

TEST_CASE("fitness phase 1") {
    CHECK(fitness_phase1(constant_traj(0.0, 0.0, 0.0, 1.0, 0.01)) == 0.0);
    CHECK(fitness_phase1(constant_traj(0.1, 0.0, 0.0, 1.0, 0.01)) == Approx(0.1).epsilon(1e-12));
    CHECK(fitness_phase1(constant_traj(0.0, 0.0, 0.0, 5.0, 0.01, 0.5)) == Approx(1e6 + 4.5));
    CHECK(fitness_phase1(constant_traj(0.1, 2.0, 0.0, 1.0, 0.01), {1.0, 0.5}) ==
          Approx(1.1).epsilon(1e-12));
    CHECK_THROWS_AS(fitness_phase1(Trajectory{}), ConfigError);
}

TEST_CASE("fitness phase 2") {
    CHECK(fitness_phase2(constant_traj(0.0, 0.0, 0.0, 1.0, 0.01)) == 0.0);
    CHECK(fitness_phase2(constant_traj(0.0, 1.0, 1.0, 1.0, 0.01)) == Approx(95.1).epsilon(1e-12));
    CHECK(fitness_phase2(constant_traj(0.0, 1.0, 1.0, 5.0, 0.01, 2.0)) == Approx(1e6 + 3.0));
    CHECK_THROWS_AS(fitness_phase2(Trajectory{}), ConfigError);
}

TEST_CASE("fitness phase 2: reference Q/R regression baseline") {
    // The reference weights fall at 20 deg/s.
    const RunResult r = run_experiment(load_preset("dlqr-20deg"));
    CHECK(r.trajectory.fallen);
    CHECK(fitness_phase2(r.trajectory) ==
          Approx(1e6 + (5.0 - *r.trajectory.fall_time)).epsilon(1e-12));
    CHECK(*r.trajectory.fall_time == Approx(kDlqrBaselineFallTime).epsilon(1e-9));
}

TEST_CASE("search space validation") {
    SearchSpace s{{{"pole.1", -10.0, 0.0, ParamRole::Pole}}};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.params = {{"q.1", 0.0, 1.0, ParamRole::LqrWeight}};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.params = {{"x", 1.0, 1.0}};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.params = {{"x", -1.0, 1.0}};
    CHECK_NOTHROW(s.validate());
    CHECK(s.clip({3.0}) == std::vector<double>{1.0});
    GaConfig g;
    g.elitism = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("ga: sphere converges") {
    GaConfig cfg;
    cfg.population = 50;
    cfg.generations = 200;
    const GaResult r = ga_minimize(box(4, -5.0, 5.0), sphere, cfg);
    CHECK(r.best_value < 1e-3);
    CHECK(r.history.size() == 201);
    CHECK(r.evaluations == 50 + 200 * 48);
}

TEST_CASE("ga: constant objective gives a flat history") {
    GaConfig cfg;
    cfg.population = 10;
    cfg.generations = 5;
    const GaResult r = ga_minimize(box(2, -1.0, 1.0), [](const auto&) { return 2.5; }, cfg);
    CHECK(r.best_value == 2.5);
    for (const auto& h : r.history) {
        CHECK(h.best == 2.5);
        CHECK(h.mean == 2.5);
        CHECK(h.worst == 2.5);
    }
}

TEST_CASE("ga: elitist history never gets worse and stays in the box") {
    const SearchSpace space = box(3, -2.0, 3.0);
    std::mutex mu;
    bool inside = true;
    auto rastrigin = [&](const std::vector<double>& x) {
        {
            std::lock_guard lock(mu);
            inside = inside && space.contains(x);
        }
        double s = 10.0 * static_cast<double>(x.size());
        for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
        return s;
    };
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        GaConfig cfg;
        cfg.seed = seed;
        cfg.generations = 60;
        cfg.mutation_rate = 0.3;
        cfg.threads = 2;
        const GaResult r = ga_minimize(space, rastrigin, cfg);
        for (std::size_t i = 1; i < r.history.size(); ++i) {
            CHECK(r.history[i].best <= r.history[i - 1].best);
            CHECK(r.history[i].best <= r.history[i].mean);
            CHECK(r.history[i].mean <= r.history[i].worst);
        }
    }
    CHECK(inside);
}

TEST_CASE("ga: same seed, same history, for any thread count") {
    GaConfig cfg;
    cfg.generations = 30;
    cfg.seed = 42;
    const GaResult a = ga_minimize(box(3, -5.0, 5.0), sphere, cfg);
    cfg.threads = 4;
    const GaResult b = ga_minimize(box(3, -5.0, 5.0), sphere, cfg);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].best == b.history[i].best);
        CHECK(a.history[i].mean == b.history[i].mean);
    }
    CHECK(a.best == b.best);
    cfg.seed = 43;
    const GaResult c = ga_minimize(box(3, -5.0, 5.0), sphere, cfg);
    CHECK(c.history[0].mean != a.history[0].mean);
}

TEST_CASE("ga: objective errors propagate") {
    GaConfig cfg;
    cfg.threads = 3;
    auto bad = [](const std::vector<double>& x) -> double {
        if (x[0] > 0.9) throw NumericError("boom");
        return x[0];
    };
    CHECK_THROWS_AS(ga_minimize(box(1, 0.0, 1.0), bad, cfg), NumericError);
}

TEST_CASE("pattern search: 1-D absolute value") {
    const SearchSpace s{{{"x", -10.0, 10.0}}};
    const auto r = pattern_search({0.0}, [](const auto& x) { return std::abs(x[0] - 3.0); }, s, 1.0,
                                  1e-6);
    CHECK(std::abs(r.best[0] - 3.0) < 1e-5);
    CHECK(r.value < 1e-5);
}

TEST_CASE("pattern search: starting at the minimum returns the start") {
    const SearchSpace s = box(2, -1.0, 1.0);
    const auto r = pattern_search({0.0, 0.0}, sphere, s, 0.5, 1e-4);
    CHECK(r.best == std::vector<double>{0.0, 0.0});
    CHECK(r.value == 0.0);
}

TEST_CASE("pattern search: never worse than the start") {
    const SearchSpace s = box(2, -2.0, 2.0);
    auto rosen = [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    for (double a : {-1.5, -0.3, 0.7, 1.9}) {
        const std::vector<double> start{a, -a};
        const auto r = pattern_search(start, rosen, s, 0.25, 1e-6);
        CHECK(r.value <= rosen(start));
        CHECK(s.contains(r.best));
    }
    CHECK_THROWS_AS(pattern_search({5.0, 0.0}, rosen, s, 0.1, 1e-3), ConfigError);
}

TEST_CASE("history csv") {
    std::ostringstream os;
    write_history_csv({{0, 3.0, 4.5, 6.0}, {1, 2.0, 3.25, 5.0}}, os);
    CHECK(os.str() == "generation,best,mean,worst\n0,3,4.5,6\n1,2,3.25,5\n");
}

TEST_CASE("thread count from the environment") {
    ::setenv("BALANCER_LAB_THREADS", "3", 1);
    CHECK(threads_from_env() == 3);
    ::setenv("BALANCER_LAB_THREADS", "x", 1);
    CHECK_THROWS_AS(threads_from_env(), ConfigError);
    ::unsetenv("BALANCER_LAB_THREADS");
    CHECK(threads_from_env() == 0);
}

TEST_CASE("pole search keeps the lateral bicycle up from 10 deg/s") {
    const ExperimentConfig cfg = load_preset("pole-search");
    const OptimizeOutcome out = run_optimize(cfg);
    REQUIRE(out.refined);
    CHECK(out.refined->value <= out.ga.best_value);
    CHECK(out.best_value < kFallPenalty);
    const RunResult r = run_experiment(apply_candidate(cfg, cfg.optimize.params, out.best));
    CHECK_FALSE(r.metrics.fallen);
    CHECK(r.metrics.max_torque <= 6.0);
}

TEST_CASE("Q/R search beats the reference weights on phase-2 fitness") {
    const ExperimentConfig cfg = load_preset("lqr-weight-search");
    const double baseline = fitness_phase2(run_experiment(cfg).trajectory);
    const OptimizeOutcome out = run_optimize(cfg);
    CHECK(out.best_value <= baseline);
    const RunResult tuned = run_experiment(apply_candidate(cfg, cfg.optimize.params, out.best));
    CHECK_FALSE(tuned.metrics.fallen);
    CHECK(tuned.metrics.max_input <= 30.0);

    // Pattern refinement of the GA's best never loses ground.
    const SearchSpace space{cfg.optimize.params};
    const auto refined =
        pattern_search(out.best, make_objective(cfg), space, 0.25, 0.05);
    CHECK(refined.value <= out.best_value);
}
