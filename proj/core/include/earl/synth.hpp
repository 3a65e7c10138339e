#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "earl/reward.hpp"
#include "earl/timeline.hpp"

namespace earl {

// Generation knobs for one synthetic task.
struct TaskParams {
    int frame_count = 512;  // M, >= 64
    int evidence_count = 2; // K, 1..8
    int option_count = 4;
    double signal_noise = 0.1;       // additive uniform noise amplitude
    double sigma = 0.0;              // Gaussian bump width; 0 -> frame_count/64
    int reveal_radius = 0;           // |context - evidence| <= radius counts as revealed
    double required_coverage = 1.0;  // fraction of evidence that must be revealed
    int initial_budget = 32;         // pre-sampling grid the placement avoids
    int grid_margin = 2;             // min distance between evidence and grid frames
    int n_max = 16;                  // re-sampling cap assumed by the revealability check
    int annotation_tolerance = 2;  // graded IoU keeps group rewards informative
    bool ensure_revealable = true;   // reject placements two refinement rounds cannot reach

    void validate() const;
    double effective_sigma() const { return sigma > 0.0 ? sigma : frame_count / 64.0; }
};

// A video-reasoning task with planted evidence. `evidence` is hidden from
// policies; they see only the per-frame signals.
struct SyntheticTask {
    std::string task_id;
    VideoTimeline timeline;
    std::vector<int> evidence;  // sorted, size 1..8
    GoldenAnnotation annotation;
    int option_count = 4;
    int correct_option = 0;
    int reveal_radius = 0;
    double required_coverage = 1.0;
    std::uint64_t seed = 0;  // per-task generation seed
    TaskParams params;       // stored so files can omit signals
};

// Deterministic task construction from (seed, params). Evidence lands off the
// initial sampling grid so the pre-sampled context can never reveal it, and
// (when ensure_revealable) where two localized re-sampling rounds can reach.
SyntheticTask generate_task(std::uint64_t seed, const TaskParams& params);

// fraction of evidence frames within reveal_radius of some context frame
double revealed_fraction(const std::vector<int>& evidence, const VisualContext& context,
                         int reveal_radius);

// The simulator's stand-in for the answering model: a pure function of the
// evidence visible in the final context.
int answer_oracle(const SyntheticTask& task, const VisualContext& final_context);

// Per-evidence refinement targets: the context frame that keeps an already
// revealed evidence frame visible, or the frame whose re-sampling interval
// covers an unrevealed one. Used by the generator's feasibility check and by
// the oracle policy.
std::vector<int> evidence_targets(const VisualContext& context, const std::vector<int>& evidence,
                                  int reveal_radius);

// True when <= 2 target-driven refinement rounds reveal enough evidence.
bool two_round_revealable(const VideoTimeline& timeline, const std::vector<int>& evidence,
                          const TaskParams& params);

}  // namespace earl
