#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "earl/env.hpp"
#include "earl/policy.hpp"
#include "earl/reward.hpp"
#include "earl/synth.hpp"
#include "earl/trainer.hpp"

namespace earl {

// Suite-level generation parameters. Per-task evidence counts are drawn
// uniformly from [k_min, k_max]; sampling geometry (initial budget, n_max)
// follows the env section so the revealability guarantee matches the
// episodes the tasks are used in.
struct SuiteConfig {
    int count = 500;
    int k_min = 1;
    int k_max = 4;
    TaskParams base;  // evidence_count is overridden per task

    void validate() const;
};

// Everything one run needs, loadable from a JSON file with sections
// (seed, init_jitter, tasks, env, schedule, train, policy). Missing keys
// keep their defaults; unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 1;
    double init_jitter = 0.05;  // uniform perturbation scale of the start weights
    SuiteConfig tasks;
    EnvConfig env;
    ScheduleConfig schedule;
    TrainConfig train;  // schedule and total_iters are folded in via resolved_train
    PolicyParams policy;

    void validate() const;
    TrainConfig resolved_train() const;
};

RunConfig default_run_config();
RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& config);
std::string run_config_to_string(const RunConfig& config);

// Applies EARL_* environment overrides: EARL_SEED, EARL_INIT_JITTER, or
// EARL_<SECTION>_<KEY> with section one of TASKS, ENV, SCHEDULE, TRAIN,
// POLICY. Policy weights address as W0..W3. Returns the (path, value) pairs
// applied, in sorted order.
std::vector<std::pair<std::string, std::string>> apply_env_overrides(
    RunConfig& config, const std::vector<std::pair<std::string, std::string>>& env_vars);
std::vector<std::pair<std::string, std::string>> apply_process_env_overrides(RunConfig& config);

// Deterministic suite expansion from the config's seed.
std::vector<SyntheticTask> generate_suite(const RunConfig& config);

}  // namespace earl
