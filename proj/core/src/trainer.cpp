#include "earl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "earl/errors.hpp"
#include "earl/rng.hpp"

namespace earl {

namespace {

constexpr double kAdvantageEps = 1e-9;   // below this every advantage counts as zero
constexpr double kAdvantageNorm = 1e-6;  // std floor in the advantage denominator
constexpr int kMaxHalvings = 20;

bool answered_correctly(const RewardBreakdown& rb) { return rb.r_correct > 0.0; }

struct Accumulator {
    double reward = 0.0;
    double iou = 0.0;
    int correct = 0;
    int selected = 0;
    int episodes = 0;

    void add(const RolloutGroup& group) {
        for (std::size_t i = 0; i < group.episodes.size(); ++i) {
            reward += group.rewards[i].r_total;
            iou += group.rewards[i].r_relevance;
            if (answered_correctly(group.rewards[i])) ++correct;
            if (group.episodes[i].trajectory.had_selection()) ++selected;
            ++episodes;
        }
    }
};

}  // namespace

void TrainConfig::validate() const {
    if (total_iters < 1) throw std::invalid_argument("total_iters must be >= 1");
    if (prompts_per_batch < 1) throw std::invalid_argument("prompts_per_batch must be >= 1");
    if (group_size < 2) throw std::invalid_argument("group_size must be >= 2");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("learning_rate must be finite and >= 0");
    if (pretrain_epochs < 0) throw std::invalid_argument("pretrain_epochs must be >= 0");
    if (!(pretrain_lr > 0.0)) throw std::invalid_argument("pretrain_lr must be > 0");
    if (pretrain_task_count < 1) throw std::invalid_argument("pretrain_task_count must be >= 1");
    ScheduleConfig sched = schedule;
    sched.total_iters = total_iters;
    sched.validate();
}

ScheduleConfig TrainConfig::effective_schedule() const {
    ScheduleConfig s = schedule;
    s.total_iters = total_iters;
    if (disable_dynamic_adjustment) {
        const double alpha_mid = 0.5 * (s.alpha_early + s.alpha_late);
        const double beta_mid = 0.5 * (s.beta_early + s.beta_late);
        s.alpha_early = s.alpha_late = alpha_mid;
        s.beta_early = s.beta_late = beta_mid;
    }
    if (disable_relevance) {
        s.beta_early = 0.0;
        s.beta_late = 0.0;
    }
    return s;
}

RewardOptions TrainConfig::reward_options() const {
    RewardOptions options;
    options.iou_gated_correctness = !disable_iou_gate;
    options.per_op_action_reward = per_op_action_reward;
    return options;
}

PolicyParams jittered_params(PolicyParams base, std::uint64_t seed, double scale) {
    Rng rng(substream(seed, "init"));
    for (double& w : base.weights) w += scale * rng.uniform_real(-1.0, 1.0);
    base.validate();
    return base;
}

std::vector<ImitationExample> collect_oracle_dataset(std::span<const SyntheticTask> tasks,
                                                     const EnvConfig& env) {
    std::vector<ImitationExample> data;
    OraclePolicy oracle(env);
    Rng rng(0);  // the oracle never draws
    for (const auto& task : tasks) {
        const EpisodeRecord rec = run_episode(task, oracle, env, rng);
        for (const auto& [obs, action] : rec.decisions) {
            const auto* select = std::get_if<SelectFrames>(&action);
            if (!select) continue;
            // selections wider than the policy's per-op cap are outside its
            // support and cannot be imitated
            if (static_cast<int>(select->frames.size()) > kMaxSelectPerOp) continue;
            data.push_back({obs, *select});
        }
    }
    return data;
}

double mean_selection_nll(const PolicyParams& params, std::span<const ImitationExample> data) {
    if (data.empty()) throw EmptyDataset("no imitation examples");
    double nll = 0.0;
    for (const auto& ex : data) nll -= selection_logprob(params, ex.obs, ex.action);
    return nll / static_cast<double>(data.size());
}

PolicyParams clone_pretrain(PolicyParams params, std::span<const ImitationExample> data,
                            int epochs, double learning_rate) {
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (epochs == 0) return params;
    if (data.empty()) throw EmptyDataset("no imitation examples");
    params.validate();

    const double inv_n = 1.0 / static_cast<double>(data.size());
    double current = mean_selection_nll(params, data);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        WeightGrad grad{};
        for (const auto& ex : data) {
            const WeightGrad g = selection_logprob_grad(params, ex.obs, ex.action);
            for (int r = 0; r < PolicyParams::kWeightCount; ++r) {
                grad[static_cast<std::size_t>(r)] -= inv_n * g[static_cast<std::size_t>(r)];
            }
        }
        // The last weight doubles as the answer threshold. Imitation data
        // holds selection steps only, so letting it drift here can silently
        // push the policy into answering at step zero; keep it at its prior.
        grad[PolicyParams::kWeightCount - 1] = 0.0;
        double step = learning_rate;
        bool accepted = false;
        for (int halving = 0; halving < kMaxHalvings; ++halving) {
            PolicyParams cand = params;
            for (int r = 0; r < PolicyParams::kWeightCount; ++r) {
                cand.weights[static_cast<std::size_t>(r)] -=
                    step * grad[static_cast<std::size_t>(r)];
            }
            const double cand_nll = mean_selection_nll(cand, data);
            if (cand_nll < current) {
                params = cand;
                current = cand_nll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no descent direction left at this resolution
    }
    return params;
}

RolloutGroup collect_group(const SyntheticTask& task, const PolicyParams& params,
                           const EnvConfig& env, const ScheduleConfig& schedule, int iter,
                           const RewardOptions& options, int group_size, std::uint64_t seed) {
    if (group_size < 2) throw std::invalid_argument("group_size must be >= 2");
    RolloutGroup group;
    group.task_id = task.task_id;
    group.episodes.reserve(static_cast<std::size_t>(group_size));
    group.rewards.reserve(static_cast<std::size_t>(group_size));
    SoftmaxPolicy policy(params);
    for (int g = 0; g < group_size; ++g) {
        Rng rng(substream(seed, "episode", static_cast<std::uint64_t>(g)));
        EpisodeRecord rec = run_episode(task, policy, env, rng);
        group.rewards.push_back(total_reward(rec.trajectory, task.annotation, task.correct_option,
                                             schedule, iter, options));
        group.episodes.push_back(std::move(rec));
    }

    bool all_equal = true;
    for (const auto& rb : group.rewards) {
        if (rb.r_total != group.rewards.front().r_total) {
            all_equal = false;
            break;
        }
    }
    group.advantages.reserve(static_cast<std::size_t>(group_size));
    if (all_equal) {
        // identical rewards center to exactly zero, not to mean-roundoff dust
        group.advantages.assign(static_cast<std::size_t>(group_size), 0.0);
        return group;
    }
    double mean = 0.0;
    for (const auto& rb : group.rewards) mean += rb.r_total;
    mean /= static_cast<double>(group_size);
    double var = 0.0;
    for (const auto& rb : group.rewards) {
        const double d = rb.r_total - mean;
        var += d * d;
    }
    var /= static_cast<double>(group_size);
    const double denom = std::sqrt(var) + kAdvantageNorm;
    for (const auto& rb : group.rewards) group.advantages.push_back((rb.r_total - mean) / denom);
    return group;
}

PolicyParams update_policy(const PolicyParams& params, std::span<const RolloutGroup> groups,
                           double learning_rate) {
    if (groups.empty()) throw DegenerateBatch("no rollout groups");
    bool informative = false;
    for (const auto& group : groups) {
        for (double a : group.advantages) {
            if (std::abs(a) > kAdvantageEps) {
                informative = true;
                break;
            }
        }
        if (informative) break;
    }
    if (!informative) throw DegenerateBatch("all advantages vanish; identical rewards");

    WeightGrad total{};
    std::size_t episode_count = 0;
    for (const auto& group : groups) {
        episode_count += group.episodes.size();
        for (std::size_t i = 0; i < group.episodes.size(); ++i) {
            const double adv = group.advantages[i];
            if (std::abs(adv) <= kAdvantageEps) continue;
            for (const auto& [obs, action] : group.episodes[i].decisions) {
                const WeightGrad g = action_logprob_grad(params, obs, action);
                for (int r = 0; r < PolicyParams::kWeightCount; ++r) {
                    total[static_cast<std::size_t>(r)] += adv * g[static_cast<std::size_t>(r)];
                }
            }
        }
    }

    // mean over episodes, so the step size is batch-size independent
    const double scale = learning_rate / static_cast<double>(episode_count);
    PolicyParams next = params;
    for (int r = 0; r < PolicyParams::kWeightCount; ++r) {
        next.weights[static_cast<std::size_t>(r)] += scale * total[static_cast<std::size_t>(r)];
        if (!std::isfinite(next.weights[static_cast<std::size_t>(r)])) {
            throw Error("policy update produced a non-finite weight");
        }
    }
    return next;
}

TrainingReport run_training(std::span<const SyntheticTask> suite, const TrainConfig& config,
                            const EnvConfig& env, PolicyParams init, std::uint64_t seed) {
    config.validate();
    init.validate();
    if (suite.empty()) throw EmptyDataset("training suite is empty");

    const ScheduleConfig schedule = config.effective_schedule();
    const RewardOptions options = config.reward_options();

    TrainingReport report;
    report.params = init;

    if (config.pretrain_epochs > 0) {
        const std::size_t n = std::min(suite.size(),
                                       static_cast<std::size_t>(config.pretrain_task_count));
        const auto data = collect_oracle_dataset(suite.subspan(0, n), env);
        report.pretrain_examples = static_cast<int>(data.size());
        if (!data.empty()) {
            report.pretrain_nll_before = mean_selection_nll(report.params, data);
            report.params = clone_pretrain(report.params, data, config.pretrain_epochs,
                                           config.pretrain_lr);
            report.pretrain_nll_after = mean_selection_nll(report.params, data);
        }
    }
    report.pretrained_params = report.params;

    const int n_tasks = static_cast<int>(suite.size());
    std::vector<int> all_indices(static_cast<std::size_t>(n_tasks));
    for (int i = 0; i < n_tasks; ++i) all_indices[static_cast<std::size_t>(i)] = i;

    report.series.reserve(static_cast<std::size_t>(config.total_iters));
    for (int t = 1; t <= config.total_iters; ++t) {
        std::vector<int> batch;
        if (n_tasks <= config.prompts_per_batch) {
            batch = all_indices;
        } else {
            Rng batch_rng(substream(seed, "batch", static_cast<std::uint64_t>(t)));
            batch = batch_rng.sample_without_replacement(
                all_indices, static_cast<std::size_t>(config.prompts_per_batch));
        }

        std::vector<RolloutGroup> groups;
        groups.reserve(batch.size());
        Accumulator acc;
        for (std::size_t slot = 0; slot < batch.size(); ++slot) {
            groups.push_back(collect_group(
                suite[static_cast<std::size_t>(batch[slot])], report.params, env, schedule, t,
                options, config.group_size,
                substream(seed, "group", static_cast<std::uint64_t>(t),
                          static_cast<std::uint64_t>(slot))));
            acc.add(groups.back());
        }

        const ScheduleWeights w = schedule_weights(schedule, t);
        IterationMetrics m;
        m.iter = t;
        m.mean_reward = acc.reward / static_cast<double>(acc.episodes);
        m.mean_iou = acc.iou / static_cast<double>(acc.episodes);
        m.accuracy = static_cast<double>(acc.correct) / static_cast<double>(acc.episodes);
        m.selection_rate = static_cast<double>(acc.selected) / static_cast<double>(acc.episodes);
        m.alpha = w.alpha;
        m.beta = w.beta;
        report.series.push_back(m);

        if (config.learning_rate > 0.0) {
            try {
                report.params = update_policy(report.params, groups, config.learning_rate);
            } catch (const DegenerateBatch&) {
                ++report.skipped_updates;
            }
        }
    }
    return report;
}

EvalSummary evaluate_policy(std::span<const SyntheticTask> tasks, const PolicyParams& params,
                            const EnvConfig& env, const ScheduleConfig& schedule, int iter,
                            const RewardOptions& options, int rollouts_per_task,
                            std::uint64_t seed) {
    if (tasks.empty()) throw EmptyDataset("evaluation suite is empty");
    if (rollouts_per_task < 1) throw std::invalid_argument("rollouts_per_task must be >= 1");
    SoftmaxPolicy policy(params);
    EvalSummary s;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        for (int g = 0; g < rollouts_per_task; ++g) {
            Rng rng(substream(seed, "eval", static_cast<std::uint64_t>(i),
                              static_cast<std::uint64_t>(g)));
            const EpisodeRecord rec = run_episode(tasks[i], policy, env, rng);
            const RewardBreakdown rb = total_reward(rec.trajectory, tasks[i].annotation,
                                                    tasks[i].correct_option, schedule, iter,
                                                    options);
            s.mean_reward += rb.r_total;
            s.mean_iou += rb.r_relevance;
            if (rb.r_correct > 0.0) s.accuracy += 1.0;
            if (rec.trajectory.had_selection()) s.selection_rate += 1.0;
            ++s.episodes;
        }
    }
    const double n = static_cast<double>(s.episodes);
    s.mean_reward /= n;
    s.mean_iou /= n;
    s.accuracy /= n;
    s.selection_rate /= n;
    return s;
}

}  // namespace earl
