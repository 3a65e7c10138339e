#include "earl/synth.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "earl/errors.hpp"
#include "earl/rng.hpp"

namespace earl {

namespace {

constexpr int kPlacementAttempts = 10000;

// nearest context frame by absolute distance, ties to the lower index
int nearest_context_frame(const VisualContext& context, int frame) {
    const auto& f = context.frames;
    const auto it = std::lower_bound(f.begin(), f.end(), frame);
    if (it == f.begin()) return f.front();
    if (it == f.end()) return f.back();
    const int lo = *(it - 1);
    const int hi = *it;
    return (frame - lo <= hi - frame) ? lo : hi;
}

bool is_revealed(const VisualContext& context, int frame, int reveal_radius) {
    return std::abs(nearest_context_frame(context, frame) - frame) <= reveal_radius;
}

std::string hex_task_id(std::uint64_t seed) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "t%016" PRIx64, seed);
    return buf;
}

}  // namespace

void TaskParams::validate() const {
    if (frame_count < 64) throw std::invalid_argument("frame_count must be >= 64");
    if (evidence_count < 1 || evidence_count > 8)
        throw std::invalid_argument("evidence_count must be in 1..8");
    if (option_count < 2) throw std::invalid_argument("option_count must be >= 2");
    if (signal_noise < 0.0) throw std::invalid_argument("signal_noise must be >= 0");
    if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
    if (reveal_radius < 0) throw std::invalid_argument("reveal_radius must be >= 0");
    if (!(required_coverage > 0.0) || required_coverage > 1.0)
        throw std::invalid_argument("required_coverage must be in (0, 1]");
    if (initial_budget < 2) throw std::invalid_argument("initial_budget must be >= 2");
    if (grid_margin < 0) throw std::invalid_argument("grid_margin must be >= 0");
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    if (annotation_tolerance < 0) throw std::invalid_argument("annotation_tolerance must be >= 0");
}

double revealed_fraction(const std::vector<int>& evidence, const VisualContext& context,
                         int reveal_radius) {
    if (evidence.empty()) return 1.0;
    if (context.size() == 0) return 0.0;
    int covered = 0;
    for (int e : evidence) {
        if (is_revealed(context, e, reveal_radius)) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(evidence.size());
}

int answer_oracle(const SyntheticTask& task, const VisualContext& final_context) {
    const double frac = revealed_fraction(task.evidence, final_context, task.reveal_radius);
    if (frac >= task.required_coverage) return task.correct_option;
    return (task.correct_option + 1) % task.option_count;
}

std::vector<int> evidence_targets(const VisualContext& context, const std::vector<int>& evidence,
                                  int reveal_radius) {
    std::vector<int> targets;
    if (context.size() == 0) return targets;
    const auto& f = context.frames;
    for (int e : evidence) {
        const int nearest = nearest_context_frame(context, e);
        if (std::abs(nearest - e) <= reveal_radius) {
            // already revealed; selecting the revealing frame keeps it in the
            // context after re-sampling replaces everything else
            targets.push_back(nearest);
            continue;
        }
        int chosen = nearest;
        if (context.size() >= 2) {
            const auto it = std::lower_bound(f.begin(), f.end(), e);
            const int* pred = (it == f.begin()) ? nullptr : &*(it - 1);
            const int* succ = (it == f.end()) ? nullptr : &*it;
            // prefer the neighbor whose re-sampling interval spans e, so the
            // next refinement round can actually land on it
            if (pred && nearest_neighbor_interval(context, *pred).covers_interior(e)) {
                chosen = *pred;
            } else if (succ && nearest_neighbor_interval(context, *succ).covers_interior(e)) {
                chosen = *succ;
            }
        }
        targets.push_back(chosen);
    }
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    return targets;
}

bool two_round_revealable(const VideoTimeline& timeline, const std::vector<int>& evidence,
                          const TaskParams& params) {
    VisualContext ctx = uniform_sample(timeline, params.initial_budget);
    for (int round = 0; round < 2; ++round) {
        if (revealed_fraction(evidence, ctx, params.reveal_radius) >= params.required_coverage)
            return true;
        if (ctx.size() < 2) return false;
        const auto targets = evidence_targets(ctx, evidence, params.reveal_radius);
        if (targets.empty()) return false;
        ctx = localized_resample(timeline, ctx, targets, params.n_max);
    }
    return revealed_fraction(evidence, ctx, params.reveal_radius) >= params.required_coverage;
}

SyntheticTask generate_task(std::uint64_t seed, const TaskParams& params) {
    params.validate();
    const int m = params.frame_count;

    const std::vector<int> grid = uniform_sample_indices(m, params.initial_budget);
    std::vector<int> eligible;
    for (int i = 0; i < m; ++i) {
        const auto it = std::lower_bound(grid.begin(), grid.end(), i);
        int dist = m;
        if (it != grid.end()) dist = std::min(dist, *it - i);
        if (it != grid.begin()) dist = std::min(dist, i - *(it - 1));
        if (dist >= params.grid_margin) eligible.push_back(i);
    }
    if (static_cast<int>(eligible.size()) < params.evidence_count) {
        throw InfeasiblePlacement("cannot place " + std::to_string(params.evidence_count) +
                                  " evidence frames off the sampling grid of " +
                                  hex_task_id(seed) + "; only " +
                                  std::to_string(eligible.size()) + " indices are eligible");
    }

    // geometry-only timeline; the revealability check never reads signals
    VideoTimeline skeleton{m, std::vector<double>(static_cast<std::size_t>(m), 0.0)};

    Rng place(substream(seed, "placement"));
    std::vector<int> evidence;
    bool accepted = false;
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
        evidence = place.sample_without_replacement(eligible,
                                                    static_cast<std::size_t>(params.evidence_count));
        std::sort(evidence.begin(), evidence.end());
        if (!params.ensure_revealable || two_round_revealable(skeleton, evidence, params)) {
            accepted = true;
            break;
        }
    }
    if (!accepted) {
        throw InfeasiblePlacement("no placement reachable by two refinement rounds for " +
                                  hex_task_id(seed) + " after " +
                                  std::to_string(kPlacementAttempts) + " attempts");
    }

    const double sigma = params.effective_sigma();
    Rng noise(substream(seed, "signals"));
    VideoTimeline timeline;
    timeline.frame_count = m;
    timeline.signals.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        int d = m;
        for (int e : evidence) d = std::min(d, std::abs(i - e));
        const double bump = std::exp(-static_cast<double>(d) * d / (2.0 * sigma * sigma));
        const double s = bump + params.signal_noise * noise.uniform01();
        timeline.signals[static_cast<std::size_t>(i)] = std::clamp(s, 0.0, 1.0);
    }
    timeline.validate();

    Rng answer(substream(seed, "answer"));
    SyntheticTask task;
    task.task_id = hex_task_id(seed);
    task.timeline = std::move(timeline);
    task.evidence = evidence;
    task.annotation = GoldenAnnotation{evidence, params.annotation_tolerance};
    task.annotation.validate();
    task.option_count = params.option_count;
    task.correct_option = answer.uniform_int(0, params.option_count - 1);
    task.reveal_radius = params.reveal_radius;
    task.required_coverage = params.required_coverage;
    task.seed = seed;
    task.params = params;
    return task;
}

}  // namespace earl
