#include "earl/env.hpp"

#include <algorithm>
#include <stdexcept>

#include "earl/errors.hpp"

namespace earl {

const char* action_tag(const Action& action) {
    if (std::holds_alternative<TextStep>(action)) return "text";
    if (std::holds_alternative<SelectFrames>(action)) return "select";
    return "answer";
}

int Trajectory::selection_op_count() const {
    int n = 0;
    for (const auto& s : steps) {
        if (std::holds_alternative<SelectFrames>(s.action)) ++n;
    }
    return n;
}

EpisodeState reset(const SyntheticTask& task, int initial_budget) {
    if (initial_budget < 1) throw std::invalid_argument("initial_budget must be >= 1");
    EpisodeState state;
    state.context = uniform_sample(task.timeline, initial_budget);
    return state;
}

EpisodeState step(const SyntheticTask& task, const EpisodeState& state, const Action& action,
                  const EnvConfig& config) {
    if (state.terminal) throw StepOnTerminalState("episode for " + task.task_id + " already ended");

    EpisodeState next = state;
    next.step_count = state.step_count + 1;

    if (const auto* select = std::get_if<SelectFrames>(&action)) {
        if (state.selections_used >= config.selection_budget) {
            throw SelectionBudgetExhausted("selection budget of " +
                                           std::to_string(config.selection_budget) +
                                           " already spent");
        }
        if (select->frames.empty()) throw EmptySelection("selection needs at least one frame");
        for (int f : select->frames) {
            if (!state.context.contains(f)) {
                throw SelectionOutsideContext("frame " + std::to_string(f) +
                                              " is not in the visual context");
            }
        }
        next.context = localized_resample(task.timeline, state.context, select->frames,
                                          config.n_max);
        next.selections_used = state.selections_used + 1;
        next.selected_union.insert(next.selected_union.end(), select->frames.begin(),
                                   select->frames.end());
        std::sort(next.selected_union.begin(), next.selected_union.end());
        next.selected_union.erase(
            std::unique(next.selected_union.begin(), next.selected_union.end()),
            next.selected_union.end());
    } else if (const auto* answer = std::get_if<Answer>(&action)) {
        const int choice = answer->choice ? *answer->choice : answer_oracle(task, state.context);
        if (choice < 0 || choice >= task.option_count) {
            throw std::invalid_argument("answer choice " + std::to_string(choice) +
                                        " outside 0.." + std::to_string(task.option_count - 1));
        }
        next.predicted_answer = choice;
        next.terminal = true;
    }
    // TextStep only advances the step counter

    if (!next.terminal && next.step_count >= config.max_steps) next.terminal = true;
    return next;
}

std::vector<FrameObservation> observe(const EpisodeState& state, const VideoTimeline& timeline) {
    std::vector<FrameObservation> out;
    out.reserve(state.context.frames.size());
    for (int f : state.context.frames) {
        out.push_back({f, timeline.signals[static_cast<std::size_t>(f)]});
    }
    return out;
}

Observation make_observation(const SyntheticTask& task, const EpisodeState& state,
                             const EnvConfig& config) {
    Observation obs;
    obs.frames = observe(state, task.timeline);
    obs.selections_used = state.selections_used;
    obs.selection_budget = config.selection_budget;
    obs.option_count = task.option_count;
    obs.step_count = state.step_count;
    return obs;
}

}  // namespace earl
