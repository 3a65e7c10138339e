#include "earl/commands.hpp"

#include <algorithm>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "earl/errors.hpp"
#include "earl/policy.hpp"
#include "earl/rng.hpp"
#include "earl/serialize.hpp"
#include "earl/trainer.hpp"

namespace fs = std::filesystem;

namespace earl {
namespace {

std::string strf(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buf[512];
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

struct AuditRow {
    std::string task_id;
    std::string policy;
    std::string answer;  // predicted option or "-" when unanswered
    RewardBreakdown reward;
};

void write_audit_table(std::ostream& out, const std::vector<AuditRow>& rows) {
    out << strf("%-18s %-8s %6s %8s %11s %9s %7s %7s %9s %9s\n", "task_id", "policy", "answer",
                "r_action", "r_relevance", "r_correct", "alpha", "beta", "r_total", "residual");
    for (const AuditRow& row : rows) {
        const RewardBreakdown& r = row.reward;
        out << strf("%-18s %-8s %6s %8.4f %11.4f %9.4f %7.4f %7.4f %9.4f %9g\n",
                    row.task_id.c_str(), row.policy.c_str(), row.answer.c_str(), r.r_action,
                    r.r_relevance, r.r_correct, r.alpha, r.beta, r.r_total,
                    r.recomposition_residual());
    }
}

std::unique_ptr<Policy> make_policy(const std::string& spec, const EnvConfig& env) {
    if (spec == "random") return std::make_unique<RandomPolicy>();
    if (spec == "oracle") return std::make_unique<OraclePolicy>(env);
    const std::string prefix = "checkpoint:";
    if (spec.rfind(prefix, 0) == 0) {
        return std::make_unique<SoftmaxPolicy>(load_checkpoint(spec.substr(prefix.size())));
    }
    throw std::invalid_argument("unknown policy spec '" + spec +
                                "' (expected random, oracle or checkpoint:<path>)");
}

void create_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out.flush()) throw Error("write failed: " + path.string());
}

std::string metrics_csv(const TrainingReport& report) {
    std::string csv = "iter,mean_reward,mean_iou,accuracy,selection_rate,alpha,beta\n";
    for (const IterationMetrics& m : report.series) {
        csv += strf("%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", m.iter, m.mean_reward, m.mean_iou,
                    m.accuracy, m.selection_rate, m.alpha, m.beta);
    }
    return csv;
}

std::string metrics_line(const char* label, const IterationMetrics& m) {
    return strf("%s: iter=%d mean_reward=%.6f mean_iou=%.6f accuracy=%.6f selection_rate=%.6f "
                "alpha=%.6f beta=%.6f\n",
                label, m.iter, m.mean_reward, m.mean_iou, m.accuracy, m.selection_rate, m.alpha,
                m.beta);
}

constexpr int kEvalRolloutsPerTask = 2;
constexpr int kTrajectorySample = 64;  // tasks logged to trajectories/final.jsonl
constexpr int kAuditSample = 8;

struct ArmResult {
    std::string name;
    TrainingReport report;
    EvalSummary eval;
};

// Trains one ablation arm into `dir`. Evaluation always uses the un-ablated
// schedule and reward options at the final iteration, so arms stay comparable
// no matter which reward terms they trained with.
ArmResult run_arm(const std::string& name, const RunConfig& config,
                  std::span<const SyntheticTask> suite, const fs::path& dir, std::ostream& log) {
    create_dir(dir / "checkpoints");
    create_dir(dir / "trajectories");
    save_run_config((dir / "config.json").string(), config);

    const TrainConfig train = config.resolved_train();
    const PolicyParams init = jittered_params(config.policy, config.seed, config.init_jitter);
    TrainingReport report = run_training(suite, train, config.env, init, config.seed);

    write_text_file(dir / "metrics.csv", metrics_csv(report));
    save_checkpoint((dir / "checkpoints" / "pretrain.ckpt").string(), report.pretrained_params);
    save_checkpoint((dir / "checkpoints" / "final.ckpt").string(), report.params);

    ScheduleConfig canonical = config.schedule;
    canonical.total_iters = train.total_iters;
    const RewardOptions canonical_options{};
    const std::uint64_t eval_seed = substream(config.seed, "final-eval");
    const EvalSummary eval =
        evaluate_policy(suite, report.params, config.env, canonical, canonical.total_iters,
                        canonical_options, kEvalRolloutsPerTask, eval_seed);

    // final-policy trajectory sample plus its reward audit
    SoftmaxPolicy policy(report.params);
    std::vector<Trajectory> trajectories;
    std::vector<AuditRow> audit;
    const int sample = std::min<int>(kTrajectorySample, static_cast<int>(suite.size()));
    for (int i = 0; i < sample; ++i) {
        Rng rng(substream(eval_seed, "traj", static_cast<std::uint64_t>(i)));
        EpisodeRecord episode = run_episode(suite[i], policy, config.env, rng);
        const Trajectory& t = episode.trajectory;
        if (static_cast<int>(audit.size()) < kAuditSample) {
            RewardBreakdown r =
                total_reward(t, suite[i].annotation, suite[i].correct_option, canonical,
                             canonical.total_iters, canonical_options);
            std::string answer =
                t.predicted_answer ? std::to_string(*t.predicted_answer) : std::string("-");
            audit.push_back({t.task_id, policy.name(), answer, r});
        }
        trajectories.push_back(std::move(episode.trajectory));
    }
    save_trajectories((dir / "trajectories" / "final.jsonl").string(), trajectories);

    std::string text;
    text += "arm=" + name + "\n";
    text += strf("seed=%llu\n", static_cast<unsigned long long>(config.seed));
    text += strf("pretrain_examples=%d\n", report.pretrain_examples);
    text += strf("pretrain_nll_before=%.6f\n", report.pretrain_nll_before);
    text += strf("pretrain_nll_after=%.6f\n", report.pretrain_nll_after);
    text += strf("skipped_updates=%d\n", report.skipped_updates);
    text += metrics_line("first", report.series.front());
    text += metrics_line("final", report.final_metrics());
    text += strf("eval: episodes=%d accuracy=%.6f mean_iou=%.6f mean_reward=%.6f "
                 "selection_rate=%.6f\n",
                 eval.episodes, eval.accuracy, eval.mean_iou, eval.mean_reward,
                 eval.selection_rate);
    text += "\nreward audit (canonical weights, final iteration):\n";
    {
        std::ostringstream table;
        write_audit_table(table, audit);
        text += table.str();
    }
    write_text_file(dir / "report.txt", text);

    log << strf("[%s] eval accuracy=%.4f mean_iou=%.4f mean_reward=%.4f (episodes=%d) -> %s\n",
                name.c_str(), eval.accuracy, eval.mean_iou, eval.mean_reward, eval.episodes,
                dir.string().c_str());
    return {name, std::move(report), eval};
}

RunConfig arm_config(const RunConfig& base, const std::string& arm) {
    RunConfig config = base;
    if (arm == "full") {
        // trains with every reward term active
    } else if (arm == "no_rr") {
        config.train.disable_relevance = true;
    } else if (arm == "no_iou") {
        config.train.disable_iou_gate = true;
    } else if (arm == "no_da") {
        config.train.disable_dynamic_adjustment = true;
    } else if (arm == "sft") {
        config.train.learning_rate = 0.0;
    } else {
        throw std::invalid_argument("unknown ablation arm: " + arm);
    }
    return config;
}

}  // namespace

int cmd_generate(const GenerateArgs& args, std::ostream& log) {
    if (args.tasks_out.empty()) throw std::invalid_argument("generate: missing output path");
    args.config.validate();

    const std::vector<SyntheticTask> suite = generate_suite(args.config);
    std::string annotations_out = args.annotations_out;
    if (annotations_out.empty()) {
        annotations_out = (fs::path(args.tasks_out).parent_path() / "annotations.jsonl").string();
    }

    save_tasks(args.tasks_out, suite);
    save_annotations(annotations_out, suite);
    log << "wrote " << suite.size() << " tasks -> " << args.tasks_out << "\n";
    log << "wrote " << suite.size() << " annotations -> " << annotations_out << "\n";
    return 0;
}

int cmd_rollout(const RolloutArgs& args, std::ostream& log) {
    if (args.group_size < 1) throw std::invalid_argument("rollout: --group must be >= 1");
    args.schedule.validate();

    const std::vector<SyntheticTask> tasks = load_tasks(args.tasks_path);
    const std::map<std::string, GoldenAnnotation> annotations =
        load_annotations(args.annotations_path);
    std::unique_ptr<Policy> policy = make_policy(args.policy_spec, args.env);

    // rewards are audited at the end of the schedule (late alpha, beta)
    const int iter = args.schedule.total_iters;
    const RewardOptions options{};

    std::vector<Trajectory> trajectories;
    std::vector<AuditRow> audit;
    double sum_reward = 0.0, sum_iou = 0.0;
    int correct = 0, selected = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const SyntheticTask& task = tasks[i];
        auto found = annotations.find(task.task_id);
        if (found == annotations.end()) {
            throw MalformedAnnotation(args.annotations_path + ": no annotation for task " +
                                      task.task_id);
        }
        for (int g = 0; g < args.group_size; ++g) {
            Rng rng(substream(args.seed, "rollout", static_cast<std::uint64_t>(i),
                              static_cast<std::uint64_t>(g)));
            EpisodeRecord episode = run_episode(task, *policy, args.env, rng);
            const Trajectory& t = episode.trajectory;
            RewardBreakdown r =
                total_reward(t, found->second, task.correct_option, args.schedule, iter, options);
            sum_reward += r.r_total;
            sum_iou += r.r_relevance;
            if (r.r_correct > 0.0) ++correct;
            if (t.had_selection()) ++selected;
            std::string answer =
                t.predicted_answer ? std::to_string(*t.predicted_answer) : std::string("-");
            audit.push_back({t.task_id, policy->name(), answer, r});
            trajectories.push_back(std::move(episode.trajectory));
        }
    }

    write_audit_table(log, audit);
    const double n = trajectories.empty() ? 1.0 : static_cast<double>(trajectories.size());
    log << strf("episodes=%zu accuracy=%.6f mean_reward=%.6f mean_iou=%.6f "
                "selection_rate=%.6f\n",
                trajectories.size(), correct / n, sum_reward / n, sum_iou / n, selected / n);
    if (!args.out_path.empty()) {
        save_trajectories(args.out_path, trajectories);
        log << "wrote " << trajectories.size() << " trajectories -> " << args.out_path << "\n";
    }
    return 0;
}

int cmd_train(const TrainArgs& args, std::ostream& log) {
    if (args.run_dir.empty()) throw std::invalid_argument("train: missing run directory");
    args.config.validate();

    static const std::vector<std::string> kAllArms = {"full", "sft", "no_rr", "no_iou", "no_da"};
    std::string single;
    if (args.ablate == "none") {
        single = "full";
    } else if (args.ablate == "rr") {
        single = "no_rr";
    } else if (args.ablate == "iou") {
        single = "no_iou";
    } else if (args.ablate == "da") {
        single = "no_da";
    } else if (args.ablate == "sft") {
        single = "sft";
    } else if (args.ablate != "all") {
        throw std::invalid_argument("unknown --ablate value: " + args.ablate +
                                    " (expected none|rr|iou|da|sft|all)");
    }

    // the arm flags never touch generation, so every arm shares one suite
    const std::vector<SyntheticTask> suite = generate_suite(args.config);

    const fs::path run_dir(args.run_dir);
    if (!single.empty()) {
        run_arm(single, arm_config(args.config, single), suite, run_dir, log);
        return 0;
    }

    std::vector<ArmResult> results;
    for (const std::string& arm : kAllArms) {
        results.push_back(run_arm(arm, arm_config(args.config, arm), suite, run_dir / arm, log));
    }

    std::string text = "ablation comparison (standardized eval, canonical rewards)\n";
    text += strf("%-8s %10s %10s %12s %15s\n", "arm", "accuracy", "mean_iou", "mean_reward",
                 "selection_rate");
    for (const ArmResult& r : results) {
        text += strf("%-8s %10.6f %10.6f %12.6f %15.6f\n", r.name.c_str(), r.eval.accuracy,
                     r.eval.mean_iou, r.eval.mean_reward, r.eval.selection_rate);
    }
    auto find = [&](const std::string& name) -> const ArmResult& {
        for (const ArmResult& r : results) {
            if (r.name == name) return r;
        }
        throw Error("missing arm " + name);
    };
    const EvalSummary& full = find("full").eval;
    text += strf("full_minus_sft_accuracy=%.6f\n", full.accuracy - find("sft").eval.accuracy);
    text += strf("full_minus_no_rr_iou=%.6f\n", full.mean_iou - find("no_rr").eval.mean_iou);
    text += strf("full_minus_no_iou_accuracy=%.6f\n",
                 full.accuracy - find("no_iou").eval.accuracy);
    text += strf("full_minus_no_da_reward=%.6f\n",
                 full.mean_reward - find("no_da").eval.mean_reward);
    write_text_file(run_dir / "report.txt", text);
    log << text;
    return 0;
}

}  // namespace earl
