#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "earl/commands.hpp"
#include "earl/errors.hpp"
#include "earl/run_config.hpp"

namespace {

// Loads the base config (file or defaults), then layers EARL_* environment
// overrides on top. Command-line flags are applied by the caller afterwards,
// so precedence is defaults < file < environment < flags.
earl::RunConfig resolve_config(const std::string& config_path) {
    earl::RunConfig config =
        config_path.empty() ? earl::default_run_config() : earl::load_run_config(config_path);
    earl::apply_process_env_overrides(config);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"earl: a desk-scale lab for evidence-aware frame selection"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;

    CLI::App* generate = app.add_subcommand("generate", "write a synthetic task suite");
    std::string gen_out, gen_annotations;
    int gen_count = 0, gen_m = 0, gen_k = 0;
    generate->add_option("--config", config_path, "run config JSON");
    auto* gen_count_opt = generate->add_option("--count", gen_count, "number of tasks");
    auto* gen_m_opt = generate->add_option("--m", gen_m, "frames per task");
    auto* gen_k_opt = generate->add_option("--k", gen_k, "evidence frames per task (fixes K)");
    auto* gen_seed_opt = generate->add_option("--seed", seed, "root seed");
    generate->add_option("--out", gen_out, "tasks file")->required();
    generate->add_option("--annotations", gen_annotations,
                         "annotations file (default: annotations.jsonl beside --out)");

    CLI::App* rollout = app.add_subcommand("rollout", "run a policy over a task file");
    earl::RolloutArgs roll;
    rollout->add_option("--config", config_path, "run config JSON");
    rollout->add_option("--tasks", roll.tasks_path, "tasks file")->required();
    rollout->add_option("--annotations", roll.annotations_path, "annotations file")->required();
    rollout->add_option("--policy", roll.policy_spec, "random | oracle | checkpoint:<path>");
    auto* roll_group_opt = rollout->add_option("--group", roll.group_size, "episodes per task");
    auto* roll_seed_opt = rollout->add_option("--seed", seed, "root seed");
    rollout->add_option("--out", roll.out_path, "trajectory file (optional)");

    CLI::App* train = app.add_subcommand("train", "run REINFORCE training into a run directory");
    std::string run_dir, ablate = "none";
    train->add_option("--config", config_path, "run config JSON");
    train->add_option("--ablate", ablate, "none | rr | iou | da | sft | all");
    auto* train_seed_opt = train->add_option("--seed", seed, "root seed");
    train->add_option("--out", run_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (generate->parsed()) {
            earl::GenerateArgs args;
            args.config = resolve_config(config_path);
            if (gen_count_opt->count() > 0) args.config.tasks.count = gen_count;
            if (gen_m_opt->count() > 0) args.config.tasks.base.frame_count = gen_m;
            if (gen_k_opt->count() > 0) {
                args.config.tasks.k_min = gen_k;
                args.config.tasks.k_max = gen_k;
            }
            if (gen_seed_opt->count() > 0) args.config.seed = seed;
            args.tasks_out = gen_out;
            args.annotations_out = gen_annotations;
            return earl::cmd_generate(args, std::cout);
        }
        if (rollout->parsed()) {
            earl::RunConfig config = resolve_config(config_path);
            roll.env = config.env;
            roll.schedule = config.schedule;
            roll.schedule.total_iters = config.train.total_iters;
            roll.seed = roll_seed_opt->count() > 0 ? seed : config.seed;
            if (roll_group_opt->count() == 0) roll.group_size = 1;
            return earl::cmd_rollout(roll, std::cout);
        }
        earl::TrainArgs args;
        args.config = resolve_config(config_path);
        if (train_seed_opt->count() > 0) args.config.seed = seed;
        args.run_dir = run_dir;
        args.ablate = ablate;
        return earl::cmd_train(args, std::cout);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const earl::MalformedRecord& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const earl::MalformedAnnotation& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const earl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
