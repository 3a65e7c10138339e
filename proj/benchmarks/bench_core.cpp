#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "earl/env.hpp"
#include "earl/policy.hpp"
#include "earl/reward.hpp"
#include "earl/rng.hpp"
#include "earl/synth.hpp"
#include "earl/timeline.hpp"
#include "earl/trainer.hpp"

using namespace earl;

namespace {

VideoTimeline flat_timeline(int frame_count) {
    VideoTimeline t;
    t.frame_count = frame_count;
    t.signals.assign(static_cast<std::size_t>(frame_count), 0.0);
    return t;
}

void bm_localized_resample(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const VideoTimeline timeline = flat_timeline(m);
    Rng rng(1);
    std::vector<int> pool(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) pool[static_cast<std::size_t>(i)] = i;
    VisualContext context;
    context.frames = rng.sample_without_replacement(pool, 32);
    std::sort(context.frames.begin(), context.frames.end());
    const std::vector<int> selected{context.frames[5], context.frames[20]};
    for (auto _ : state) {
        benchmark::DoNotOptimize(localized_resample(timeline, context, selected, 16));
    }
}
BENCHMARK(bm_localized_resample)->Arg(512)->Arg(4096);

void bm_frame_iou(benchmark::State& state) {
    GoldenAnnotation gold;
    gold.gold_frames = {31, 117, 254, 388, 401, 450};
    gold.tolerance = 2;
    const std::vector<int> selected{30, 118, 260, 402};
    for (auto _ : state) {
        benchmark::DoNotOptimize(frame_iou(selected, gold));
    }
}
BENCHMARK(bm_frame_iou);

void bm_generate_task(benchmark::State& state) {
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_task(seed++, TaskParams{}));
    }
}
BENCHMARK(bm_generate_task);

void bm_oracle_episode(benchmark::State& state) {
    const SyntheticTask task = generate_task(7, TaskParams{});
    EnvConfig env;
    OraclePolicy oracle(env);
    for (auto _ : state) {
        Rng rng(1);
        benchmark::DoNotOptimize(run_episode(task, oracle, env, rng));
    }
}
BENCHMARK(bm_oracle_episode);

void bm_selection_logprob_grad(benchmark::State& state) {
    Rng rng(2);
    Observation obs;
    for (int i = 0; i < 32; ++i) obs.frames.push_back({i * 16, rng.uniform01()});
    const PolicyParams params;
    const SelectFrames action{{obs.frames[3].frame, obs.frames[17].frame, obs.frames[30].frame}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(selection_logprob_grad(params, obs, action));
    }
}
BENCHMARK(bm_selection_logprob_grad);

void bm_collect_group(benchmark::State& state) {
    const SyntheticTask task = generate_task(11, TaskParams{});
    EnvConfig env;
    ScheduleConfig schedule;
    const PolicyParams params;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            collect_group(task, params, env, schedule, 1, RewardOptions{}, 8, seed++));
    }
}
BENCHMARK(bm_collect_group);

void bm_training_iteration(benchmark::State& state) {
    std::vector<SyntheticTask> suite;
    for (int i = 0; i < 32; ++i) {
        suite.push_back(generate_task(substream(3, "task", static_cast<std::uint64_t>(i)),
                                      TaskParams{}));
    }
    TrainConfig config;
    config.total_iters = 1;
    config.prompts_per_batch = 8;
    config.group_size = 8;
    config.pretrain_epochs = 0;
    config.pretrain_task_count = 1;
    EnvConfig env;
    const PolicyParams init;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_training(suite, config, env, init, seed++));
    }
}
BENCHMARK(bm_training_iteration);

}  // namespace

BENCHMARK_MAIN();
