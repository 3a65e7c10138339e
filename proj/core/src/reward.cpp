#include "earl/reward.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "earl/env.hpp"
#include "earl/errors.hpp"

namespace earl {

void GoldenAnnotation::validate() const {
    if (gold_frames.empty())
        throw MalformedAnnotation("annotation: gold frame set is empty");
    if (gold_frames.size() > 8)
        throw MalformedAnnotation("annotation: " + std::to_string(gold_frames.size()) +
                                  " gold frames, limit is 8");
    if (!std::is_sorted(gold_frames.begin(), gold_frames.end()))
        throw MalformedAnnotation("annotation: gold frames not sorted");
    if (std::adjacent_find(gold_frames.begin(), gold_frames.end()) != gold_frames.end())
        throw MalformedAnnotation("annotation: duplicate gold frame");
    if (gold_frames.front() < 0)
        throw MalformedAnnotation("annotation: negative frame index");
    if (tolerance < 0)
        throw MalformedAnnotation("annotation: negative tolerance");
}

void ScheduleConfig::validate() const {
    if (!(threshold_p > 0.0 && threshold_p < 1.0))
        throw std::invalid_argument("schedule: threshold_p must be in (0,1)");
    if (total_iters < 1)
        throw std::invalid_argument("schedule: total_iters must be >= 1");
    if (alpha_early < 0 || alpha_late < 0 || beta_early < 0 || beta_late < 0)
        throw std::invalid_argument("schedule: weights must be non-negative");
}

double frame_iou(const std::vector<int>& selected, const GoldenAnnotation& annotation) {
    const std::vector<int>& gold = annotation.gold_frames;
    const int w = annotation.tolerance;

    // greedy one-to-one matching, both sides in increasing index order
    std::size_t i = 0, j = 0;
    int matched = 0;
    while (i < selected.size() && j < gold.size()) {
        const int s = selected[i];
        const int g = gold[j];
        if (std::abs(s - g) <= w) {
            ++matched;
            ++i;
            ++j;
        } else if (g < s) {
            ++j;
        } else {
            ++i;
        }
    }
    const int denominator = static_cast<int>(selected.size() + gold.size()) - matched;
    if (denominator == 0) return 0.0;
    return static_cast<double>(matched) / denominator;
}

double action_reward(bool trajectory_had_selection) {
    return trajectory_had_selection ? 1.0 : 0.0;
}

double relevance_reward(double iou) {
    return iou;
}

double correctness_reward(bool answer_correct, double iou) {
    if (!answer_correct) return -1.0;
    return iou >= 0.5 ? 1.0 : 0.5;
}

double binary_correctness_reward(bool answer_correct) {
    return answer_correct ? 1.0 : -1.0;
}

ScheduleWeights schedule_weights(const ScheduleConfig& config, int iter) {
    if (iter < 0 || iter > config.total_iters)
        throw std::invalid_argument("schedule_weights: iter " + std::to_string(iter) +
                                    " outside [0, " + std::to_string(config.total_iters) + "]");
    const double progress = static_cast<double>(iter) / config.total_iters;
    if (progress <= config.threshold_p) return {config.alpha_early, config.beta_early};
    return {config.alpha_late, config.beta_late};
}

RewardBreakdown total_reward(const Trajectory& trajectory, const GoldenAnnotation& annotation,
                             int correct_option, const ScheduleConfig& config, int iter,
                             const RewardOptions& options) {
    if (!trajectory.terminal)
        throw NonTerminalTrajectory("total_reward: trajectory has not terminated");

    const bool answer_correct = trajectory.predicted_answer.has_value() &&
                                *trajectory.predicted_answer == correct_option;
    const double iou = frame_iou(trajectory.selected_union, annotation);
    const ScheduleWeights w = schedule_weights(config, iter);

    RewardBreakdown out;
    out.alpha = w.alpha;
    out.beta = w.beta;
    out.r_relevance = relevance_reward(iou);
    out.r_action = options.per_op_action_reward
                       ? static_cast<double>(trajectory.selection_op_count())
                       : action_reward(trajectory.had_selection());
    out.r_correct = options.iou_gated_correctness ? correctness_reward(answer_correct, iou)
                                                  : binary_correctness_reward(answer_correct);
    out.r_total = out.r_correct + out.alpha * out.r_action + out.beta * out.r_relevance;
    return out;
}

}  // namespace earl
