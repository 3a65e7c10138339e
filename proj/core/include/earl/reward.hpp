#pragma once

#include <vector>

namespace earl {

struct Trajectory;  // env.hpp

// Ground-truth evidence frame set. At most 8 frames, never empty.
struct GoldenAnnotation {
    std::vector<int> gold_frames;  // sorted, unique
    int tolerance = 0;             // match window in original-frame units

    void validate() const;  // throws MalformedAnnotation
    bool operator==(const GoldenAnnotation&) const = default;
};

// Piecewise-constant weight schedule: (alpha_early, beta_early) while
// progress = iter/total_iters stays <= threshold_p, the late pair after.
struct ScheduleConfig {
    double alpha_early = 0.3;
    double alpha_late = 0.05;
    double beta_early = 0.1;
    double beta_late = 0.5;
    double threshold_p = 0.4;
    int total_iters = 300;

    void validate() const;
};

// Per-trajectory reward decomposition; r_total recombines the parts exactly.
struct RewardBreakdown {
    double r_action = 0.0;     // 0 or 1 (selection count in per-op mode)
    double r_relevance = 0.0;  // IoU in [0,1]
    double r_correct = 0.0;    // 1, 0.5 or -1
    double alpha = 0.0;
    double beta = 0.0;
    double r_total = 0.0;

    double recomposition_residual() const {
        return r_total - (r_correct + alpha * r_action + beta * r_relevance);
    }
};

// Ablation switches for the reward computation. Defaults reproduce the full
// gated, binary-action behavior.
struct RewardOptions {
    bool iou_gated_correctness = true;  // off: correct -> 1, incorrect -> -1
    bool per_op_action_reward = false;  // on: r_action counts selection ops
};

// Tolerance-windowed frame-set IoU. A selected frame matches a golden frame
// within `annotation.tolerance`; matching is greedy one-to-one in increasing
// index order. With tolerance 0 this is exactly |A & B| / |A | B|.
double frame_iou(const std::vector<int>& selected, const GoldenAnnotation& annotation);

double action_reward(bool trajectory_had_selection);

// identity on the IoU
double relevance_reward(double iou);

// 1 when correct with IoU >= 0.5, 0.5 when correct below the gate, -1 otherwise.
double correctness_reward(bool answer_correct, double iou);

// binary form used by the no-gate ablation: 1 correct, -1 incorrect
double binary_correctness_reward(bool answer_correct);

struct ScheduleWeights {
    double alpha = 0.0;
    double beta = 0.0;
};

ScheduleWeights schedule_weights(const ScheduleConfig& config, int iter);

RewardBreakdown total_reward(const Trajectory& trajectory, const GoldenAnnotation& annotation,
                             int correct_option, const ScheduleConfig& config, int iter,
                             const RewardOptions& options = {});

}  // namespace earl
