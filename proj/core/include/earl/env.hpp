#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "earl/synth.hpp"
#include "earl/timeline.hpp"

namespace earl {

// Policy actions. An Answer without a concrete choice defers to the
// simulator's answer oracle over the context visible at answer time, which is
// how a selection policy "reads off" an answer it cannot compute itself.
struct TextStep {
    bool operator==(const TextStep&) const = default;
};
struct SelectFrames {
    std::vector<int> frames;  // non-empty subset of the current context
    bool operator==(const SelectFrames&) const = default;
};
struct Answer {
    std::optional<int> choice;  // nullopt: resolve via the answer oracle
    bool operator==(const Answer&) const = default;
};
using Action = std::variant<TextStep, SelectFrames, Answer>;

const char* action_tag(const Action& action);  // "text" | "select" | "answer"

struct EnvConfig {
    int initial_budget = 32;   // uniform pre-sampling budget
    int n_max = 16;            // re-sampling cap per selection
    int selection_budget = 2;  // max frame-selection operations per episode
    int max_steps = 8;         // episode terminates unanswered past this
};

struct EpisodeState {
    VisualContext context;
    int selections_used = 0;
    std::vector<int> selected_union;  // all frames selected so far, sorted
    bool terminal = false;
    std::optional<int> predicted_answer;
    int step_count = 0;
};

// One recorded step: the applied action plus the context size after it.
struct TrajectoryStep {
    Action action;
    int context_size_after = 0;
    bool operator==(const TrajectoryStep&) const = default;
};

struct Trajectory {
    std::string task_id;
    std::vector<TrajectoryStep> steps;
    std::optional<int> predicted_answer;  // present iff terminal via Answer
    bool terminal = false;
    std::vector<int> selected_union;  // union of all SelectFrames payloads

    bool had_selection() const { return !selected_union.empty(); }
    int selection_op_count() const;
    bool operator==(const Trajectory&) const = default;
};

EpisodeState reset(const SyntheticTask& task, int initial_budget);

// Applies one action. Selection validates the operation budget and context
// membership, then swaps the context for the localized re-sample.
EpisodeState step(const SyntheticTask& task, const EpisodeState& state, const Action& action,
                  const EnvConfig& config);

struct FrameObservation {
    int frame = 0;
    double signal = 0.0;
};

// The policy's entire view of the episode: per-frame signals over the
// current context plus budget bookkeeping.
struct Observation {
    std::vector<FrameObservation> frames;
    int selections_used = 0;
    int selection_budget = 2;
    int option_count = 2;
    int step_count = 0;
};

std::vector<FrameObservation> observe(const EpisodeState& state, const VideoTimeline& timeline);
Observation make_observation(const SyntheticTask& task, const EpisodeState& state,
                             const EnvConfig& config);

}  // namespace earl
