#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "earl/env.hpp"
#include "earl/errors.hpp"
#include "earl/policy.hpp"
#include "earl/reward.hpp"
#include "earl/rng.hpp"
#include "earl/synth.hpp"
#include "earl/trainer.hpp"
#include "test_support.hpp"

using namespace earl;

namespace {

std::vector<SyntheticTask> make_suite(std::uint64_t seed, int count, int frame_count = 512) {
    std::vector<SyntheticTask> suite;
    suite.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        TaskParams p;
        p.frame_count = frame_count;
        p.evidence_count = 1 + i % 4;
        suite.push_back(generate_task(substream(seed, "task", static_cast<std::uint64_t>(i)), p));
    }
    return suite;
}

// advantage-weighted mean-per-episode surrogate whose ascent step is the
// policy update
double surrogate(const PolicyParams& params, std::span<const RolloutGroup> groups) {
    double total = 0.0;
    std::size_t episodes = 0;
    for (const auto& group : groups) {
        episodes += group.episodes.size();
        for (std::size_t i = 0; i < group.episodes.size(); ++i) {
            if (std::abs(group.advantages[i]) <= 1e-9) continue;
            double lp = 0.0;
            for (const auto& [obs, action] : group.episodes[i].decisions) {
                lp += action_logprob(params, obs, action);
            }
            total += group.advantages[i] * lp;
        }
    }
    return total / static_cast<double>(episodes);
}

double episode_logprob(const PolicyParams& params, const EpisodeRecord& rec) {
    double lp = 0.0;
    for (const auto& [obs, action] : rec.decisions) lp += action_logprob(params, obs, action);
    return lp;
}

}  // namespace

TEST_CASE("jittered_params is a bounded deterministic perturbation") {
    PolicyParams base;
    const auto a = jittered_params(base, 9, 0.05);
    const auto b = jittered_params(base, 9, 0.05);
    CHECK(a == b);
    const auto c = jittered_params(base, 10, 0.05);
    CHECK(a != c);
    for (std::size_t r = 0; r < base.weights.size(); ++r) {
        CHECK(std::abs(a.weights[r] - base.weights[r]) <= 0.05);
    }
    CHECK(a.temperature == base.temperature);
    CHECK(jittered_params(base, 9, 0.0) == base);
}

TEST_CASE("oracle dataset holds only imitable selection steps") {
    const auto suite = make_suite(61, 32);
    EnvConfig env;
    const auto data = collect_oracle_dataset(suite, env);
    CHECK(!data.empty());
    for (const auto& ex : data) {
        CHECK(!ex.action.frames.empty());
        CHECK(static_cast<int>(ex.action.frames.size()) <= kMaxSelectPerOp);
        CHECK(!ex.obs.frames.empty());
        for (int f : ex.action.frames) {
            bool present = false;
            for (const auto& fo : ex.obs.frames) present = present || fo.frame == f;
            CHECK(present);
        }
    }
}

TEST_CASE("mean_selection_nll rejects an empty dataset") {
    PolicyParams params;
    CHECK_THROWS_AS(mean_selection_nll(params, {}), EmptyDataset);
}

TEST_CASE("imitation pretraining lowers the selection NLL") {
    const auto suite = make_suite(62, 48);
    EnvConfig env;
    const auto data = collect_oracle_dataset(suite, env);
    REQUIRE(!data.empty());

    PolicyParams init;
    const double before = mean_selection_nll(init, data);
    const auto tuned = clone_pretrain(init, data, 30, 0.5);
    const double after = mean_selection_nll(tuned, data);
    CHECK(after < before);
    CHECK(tuned.weights[3] == init.weights[3]);  // the answer threshold never moves
    CHECK(tuned.temperature == init.temperature);

    CHECK(clone_pretrain(init, data, 0, 0.5) == init);
    CHECK_THROWS_AS(clone_pretrain(init, {}, 5, 0.5), EmptyDataset);
    CHECK_THROWS_AS(clone_pretrain(init, data, 5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(clone_pretrain(init, data, -1, 0.5), std::invalid_argument);
}

// Imitation trains the selection weights only (the answer threshold is
// masked), so the property it buys is selection relevance, not reward:
// answering stays deferred until RL lowers the threshold.
TEST_CASE("pretraining improves selection relevance on held-out tasks") {
    const auto train = make_suite(63, 48);
    const auto held_out = make_suite(64, 100);
    EnvConfig env;
    ScheduleConfig schedule;
    const auto data = collect_oracle_dataset(train, env);
    PolicyParams tuned = clone_pretrain(PolicyParams{}, data, 30, 0.5);

    const auto eval = evaluate_policy(held_out, tuned, env, schedule, schedule.total_iters, {},
                                      2, substream(64, "eval"));
    const auto eval0 = evaluate_policy(held_out, PolicyParams{}, env, schedule,
                                       schedule.total_iters, {}, 2, substream(64, "eval"));

    RandomPolicy random;
    double random_iou = 0.0;
    int episodes = 0;
    for (std::size_t i = 0; i < held_out.size(); ++i) {
        for (int g = 0; g < 2; ++g) {
            Rng rng(substream(64, "rand", i, static_cast<std::uint64_t>(g)));
            const auto rec = run_episode(held_out[i], random, env, rng);
            random_iou += total_reward(rec.trajectory, held_out[i].annotation,
                                       held_out[i].correct_option, schedule,
                                       schedule.total_iters)
                              .r_relevance;
            ++episodes;
        }
    }
    CHECK(eval.selection_rate == 1.0);  // threshold 1.5 is never crossed before RL
    CHECK(eval.mean_iou > random_iou / episodes + 0.05);
    CHECK(eval.mean_iou > eval0.mean_iou);
}

TEST_CASE("collect_group centers advantages per group") {
    const auto suite = make_suite(65, 4);
    EnvConfig env;
    ScheduleConfig schedule;
    const auto group = collect_group(suite[0], PolicyParams{}, env, schedule, 10, {}, 8, 77);
    CHECK(group.task_id == suite[0].task_id);
    CHECK(group.episodes.size() == 8);
    CHECK(group.rewards.size() == 8);
    CHECK(group.advantages.size() == 8);
    double mean_adv = 0.0;
    for (double a : group.advantages) mean_adv += a;
    CHECK(std::abs(mean_adv / 8.0) <= 1e-9);
    for (std::size_t i = 0; i < group.episodes.size(); ++i) {
        const auto again = total_reward(group.episodes[i].trajectory, suite[0].annotation,
                                        suite[0].correct_option, schedule, 10, {});
        CHECK(group.rewards[i].r_total == again.r_total);
        CHECK(group.rewards[i].recomposition_residual() == 0.0);
    }
    const auto replay = collect_group(suite[0], PolicyParams{}, env, schedule, 10, {}, 8, 77);
    CHECK(replay.advantages == group.advantages);

    CHECK_THROWS_AS(collect_group(suite[0], PolicyParams{}, env, schedule, 10, {}, 1, 77),
                    std::invalid_argument);
}

TEST_CASE("identical group rewards yield exactly zero advantages") {
    const auto suite = make_suite(66, 1);
    EnvConfig env;
    ScheduleConfig schedule;
    PolicyParams mute;
    mute.weights[3] = -10.0;  // any signal clears the bar, so every rollout answers at once
    const auto group = collect_group(suite[0], mute, env, schedule, 1, {}, 8, 5);
    for (std::size_t i = 0; i < group.rewards.size(); ++i) {
        CHECK(group.rewards[i].r_total == group.rewards.front().r_total);
        CHECK(group.advantages[i] == 0.0);
    }
    CHECK_THROWS_AS(update_policy(mute, std::vector<RolloutGroup>{group}, 0.02),
                    DegenerateBatch);
    CHECK_THROWS_AS(update_policy(mute, {}, 0.02), DegenerateBatch);
}

TEST_CASE("policy update follows the advantage-weighted surrogate gradient") {
    const auto suite = make_suite(67, 6);
    EnvConfig env;
    ScheduleConfig schedule;
    PolicyParams params;
    std::vector<RolloutGroup> groups;
    for (std::size_t i = 0; i < suite.size(); ++i) {
        groups.push_back(collect_group(suite[i], params, env, schedule, 5, {}, 8,
                                       substream(99, "g", i)));
    }

    const double lr = 1e-3;
    const auto next = update_policy(params, groups, lr);
    const double h = 1e-6;
    for (std::size_t r = 0; r < params.weights.size(); ++r) {
        PolicyParams hi = params;
        PolicyParams lo = params;
        hi.weights[r] += h;
        lo.weights[r] -= h;
        const double fd = (surrogate(hi, groups) - surrogate(lo, groups)) / (2.0 * h);
        const double applied = (next.weights[r] - params.weights[r]) / lr;
        const double scale = std::max({1.0, std::abs(fd), std::abs(applied)});
        CHECK(std::abs(applied - fd) / scale <= 1e-4);
    }

    CHECK(update_policy(params, groups, 0.0) == params);
}

TEST_CASE("update pushes probability toward the highest-advantage episode") {
    const auto suite = make_suite(68, 1);
    EnvConfig env;
    ScheduleConfig schedule;
    PolicyParams params;
    auto group = collect_group(suite[0], params, env, schedule, 5, {}, 8, 3);
    // hand-set a clean +1/-1 contrast between the first two episodes
    for (auto& a : group.advantages) a = 0.0;
    group.advantages[0] = 1.0;
    group.advantages[1] = -1.0;
    const bool distinct = episode_logprob(params, group.episodes[0]) !=
                          episode_logprob(params, group.episodes[1]);
    REQUIRE(distinct);  // different trajectories, else the signals cancel

    const auto next = update_policy(params, std::vector<RolloutGroup>{group}, 1e-3);
    const double up = episode_logprob(next, group.episodes[0]) -
                      episode_logprob(params, group.episodes[0]);
    const double down = episode_logprob(next, group.episodes[1]) -
                        episode_logprob(params, group.episodes[1]);
    CHECK(up - down > 0.0);
}

TEST_CASE("train config validation and ablation plumbing") {
    TrainConfig config;
    config.group_size = 1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = TrainConfig{};
    config.total_iters = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = TrainConfig{};
    config.learning_rate = -0.1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = TrainConfig{};
    config.pretrain_lr = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = TrainConfig{};
    config.prompts_per_batch = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);

    config = TrainConfig{};
    config.total_iters = 77;
    CHECK(config.effective_schedule().total_iters == 77);

    config.disable_dynamic_adjustment = true;
    const auto frozen = config.effective_schedule();
    CHECK(frozen.alpha_early == 0.175);
    CHECK(frozen.alpha_late == 0.175);
    CHECK(frozen.beta_early == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(frozen.beta_late == doctest::Approx(0.3).epsilon(1e-12));

    config.disable_relevance = true;
    const auto muted = config.effective_schedule();
    CHECK(muted.beta_early == 0.0);
    CHECK(muted.beta_late == 0.0);
    CHECK(muted.alpha_early == 0.175);

    config = TrainConfig{};
    CHECK(config.reward_options().iou_gated_correctness);
    CHECK(!config.reward_options().per_op_action_reward);
    config.disable_iou_gate = true;
    config.per_op_action_reward = true;
    CHECK(!config.reward_options().iou_gated_correctness);
    CHECK(config.reward_options().per_op_action_reward);
}

TEST_CASE("run_training is deterministic and switches weights exactly once") {
    const auto suite = make_suite(69, 16);
    EnvConfig env;
    TrainConfig config;
    config.total_iters = 10;
    config.prompts_per_batch = 8;
    config.group_size = 4;
    config.pretrain_epochs = 3;
    config.pretrain_task_count = 8;

    const auto a = run_training(suite, config, env, PolicyParams{}, 5);
    const auto b = run_training(suite, config, env, PolicyParams{}, 5);
    CHECK(a.params == b.params);
    CHECK(a.pretrained_params == b.pretrained_params);
    CHECK(a.pretrain_nll_before == b.pretrain_nll_before);
    CHECK(a.pretrain_nll_after == b.pretrain_nll_after);
    REQUIRE(a.series.size() == 10);
    REQUIRE(b.series.size() == 10);
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        CHECK(a.series[i].iter == static_cast<int>(i) + 1);
        CHECK(a.series[i].mean_reward == b.series[i].mean_reward);
        CHECK(a.series[i].mean_iou == b.series[i].mean_iou);
        CHECK(a.series[i].accuracy == b.series[i].accuracy);
        CHECK(a.series[i].selection_rate == b.series[i].selection_rate);
        CHECK(a.series[i].alpha == b.series[i].alpha);
        CHECK(a.series[i].beta == b.series[i].beta);
    }

    // threshold_p = 0.4 over 10 iters: early through t = 4, late from t = 5
    int switches = 0;
    for (std::size_t i = 1; i < a.series.size(); ++i) {
        if (a.series[i].alpha != a.series[i - 1].alpha) {
            ++switches;
            CHECK(a.series[i].iter == 5);
        }
    }
    CHECK(switches == 1);
    CHECK(a.series.front().alpha == 0.3);
    CHECK(a.series.front().beta == 0.1);
    CHECK(a.series.back().alpha == 0.05);
    CHECK(a.series.back().beta == 0.5);

    CHECK(a.pretrain_examples > 0);
    CHECK(a.pretrain_nll_after < a.pretrain_nll_before);
}

TEST_CASE("zero learning rate freezes the pretrained policy") {
    const auto suite = make_suite(70, 8);
    EnvConfig env;
    TrainConfig config;
    config.total_iters = 4;
    config.prompts_per_batch = 4;
    config.group_size = 4;
    config.pretrain_epochs = 3;
    config.pretrain_task_count = 8;
    config.learning_rate = 0.0;
    const auto report = run_training(suite, config, env, PolicyParams{}, 6);
    CHECK(report.params == report.pretrained_params);
    CHECK(report.series.size() == 4);
    CHECK(report.skipped_updates == 0);

    CHECK_THROWS_AS(run_training({}, config, env, PolicyParams{}, 6), EmptyDataset);
}

TEST_CASE("standardized evaluation is deterministic and validates inputs") {
    const auto suite = make_suite(71, 12);
    EnvConfig env;
    ScheduleConfig schedule;
    PolicyParams params;
    const auto a = evaluate_policy(suite, params, env, schedule, 300, {}, 2, 9);
    const auto b = evaluate_policy(suite, params, env, schedule, 300, {}, 2, 9);
    CHECK(a.mean_reward == b.mean_reward);
    CHECK(a.mean_iou == b.mean_iou);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.selection_rate == b.selection_rate);
    CHECK(a.episodes == 24);

    const auto c = evaluate_policy(suite, params, env, schedule, 300, {}, 2, 10);
    CHECK(c.episodes == 24);  // different seed, same shape

    CHECK_THROWS_AS(evaluate_policy({}, params, env, schedule, 300, {}, 2, 9), EmptyDataset);
    CHECK_THROWS_AS(evaluate_policy(suite, params, env, schedule, 300, {}, 0, 9),
                    std::invalid_argument);
}
