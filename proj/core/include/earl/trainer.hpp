#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "earl/env.hpp"
#include "earl/policy.hpp"
#include "earl/reward.hpp"
#include "earl/synth.hpp"

namespace earl {

// One prompt's group of rollouts with group-centered advantages.
struct RolloutGroup {
    std::string task_id;
    std::vector<EpisodeRecord> episodes;
    std::vector<RewardBreakdown> rewards;
    std::vector<double> advantages;
};

struct TrainConfig {
    int total_iters = 300;
    int prompts_per_batch = 32;
    int group_size = 8;  // rollouts per prompt, >= 2 for group centering
    double learning_rate = 0.02;
    int pretrain_epochs = 30;
    double pretrain_lr = 0.5;
    int pretrain_task_count = 128;
    ScheduleConfig schedule;
    // ablation switches, independent of each other
    bool disable_relevance = false;           // beta forced to 0
    bool disable_iou_gate = false;            // binary correctness reward
    bool disable_dynamic_adjustment = false;  // alpha, beta frozen at the midpoints
    bool per_op_action_reward = false;        // r_action counts selection ops

    void validate() const;
    // schedule actually used for rewards, after applying the ablation flags
    ScheduleConfig effective_schedule() const;
    RewardOptions reward_options() const;
};

// one supervised example distilled from an oracle selection step
struct ImitationExample {
    Observation obs;
    SelectFrames action;
};

struct IterationMetrics {
    int iter = 0;
    double mean_reward = 0.0;
    double mean_iou = 0.0;
    double accuracy = 0.0;
    double selection_rate = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

struct TrainingReport {
    std::vector<IterationMetrics> series;
    PolicyParams params;               // final parameters
    PolicyParams pretrained_params;    // parameters after imitation, before RL
    double pretrain_nll_before = 0.0;
    double pretrain_nll_after = 0.0;
    int pretrain_examples = 0;
    int skipped_updates = 0;  // degenerate batches

    const IterationMetrics& final_metrics() const { return series.back(); }
};

// deterministic per-seed perturbation of the starting weights
PolicyParams jittered_params(PolicyParams base, std::uint64_t seed, double scale);

// Oracle selection steps that fit the policy's per-operation cap, replayed
// into (observation, selection) pairs.
std::vector<ImitationExample> collect_oracle_dataset(std::span<const SyntheticTask> tasks,
                                                     const EnvConfig& env);

double mean_selection_nll(const PolicyParams& params, std::span<const ImitationExample> data);

// Full-batch gradient descent on the imitation NLL with backtracking halving,
// so the loss decreases monotonically. Zero epochs returns params unchanged.
PolicyParams clone_pretrain(PolicyParams params, std::span<const ImitationExample> data,
                            int epochs, double learning_rate);

RolloutGroup collect_group(const SyntheticTask& task, const PolicyParams& params,
                           const EnvConfig& env, const ScheduleConfig& schedule, int iter,
                           const RewardOptions& options, int group_size, std::uint64_t seed);

// One REINFORCE ascent step over the groups' advantage-weighted score
// gradients. Throws DegenerateBatch when every advantage vanishes.
PolicyParams update_policy(const PolicyParams& params, std::span<const RolloutGroup> groups,
                           double learning_rate);

TrainingReport run_training(std::span<const SyntheticTask> suite, const TrainConfig& config,
                            const EnvConfig& env, PolicyParams init, std::uint64_t seed);

// Standardized policy evaluation on a fixed task set and seed, so different
// training arms can be compared under one reward definition.
struct EvalSummary {
    double mean_reward = 0.0;
    double mean_iou = 0.0;
    double accuracy = 0.0;
    double selection_rate = 0.0;
    int episodes = 0;
};

EvalSummary evaluate_policy(std::span<const SyntheticTask> tasks, const PolicyParams& params,
                            const EnvConfig& env, const ScheduleConfig& schedule, int iter,
                            const RewardOptions& options, int rollouts_per_task,
                            std::uint64_t seed);

}  // namespace earl
