#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "earl/env.hpp"
#include "earl/reward.hpp"
#include "earl/run_config.hpp"

namespace earl {

// Command implementations behind the CLI, separated so tests can drive them
// in-process. Each returns a process exit code (0 on success) and throws for
// error paths; the binary maps exception types to exit codes.

struct GenerateArgs {
    RunConfig config;
    std::string tasks_out;
    std::string annotations_out;  // empty: annotations.jsonl beside tasks_out
};
int cmd_generate(const GenerateArgs& args, std::ostream& log);

struct RolloutArgs {
    std::string tasks_path;
    std::string annotations_path;
    std::string policy_spec = "random";  // random | oracle | checkpoint:<path>
    int group_size = 1;                  // episodes per task
    std::uint64_t seed = 1;
    std::string out_path;  // optional trajectory file
    EnvConfig env;
    ScheduleConfig schedule;  // rewards audited at final progress
};
int cmd_rollout(const RolloutArgs& args, std::ostream& log);

struct TrainArgs {
    RunConfig config;
    std::string run_dir;
    std::string ablate = "none";  // none|rr|iou|da|sft|all
};
int cmd_train(const TrainArgs& args, std::ostream& log);

}  // namespace earl
