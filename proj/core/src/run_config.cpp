#include "earl/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "earl/errors.hpp"
#include "earl/rng.hpp"
#include "json_io.hpp"

extern char** environ;

namespace earl {

namespace {

json env_to_json(const EnvConfig& e) {
    return json{{"initial_budget", e.initial_budget},
                {"max_steps", e.max_steps},
                {"n_max", e.n_max},
                {"selection_budget", e.selection_budget}};
}

void set_env_field(EnvConfig& e, const std::string& key, const json& v) {
    if (key == "initial_budget") e.initial_budget = v.get<int>();
    else if (key == "max_steps") e.max_steps = v.get<int>();
    else if (key == "n_max") e.n_max = v.get<int>();
    else if (key == "selection_budget") e.selection_budget = v.get<int>();
    else throw MalformedRecord("unknown env key '" + key + "'");
}

json schedule_to_json(const ScheduleConfig& s) {
    return json{{"alpha_early", s.alpha_early},
                {"alpha_late", s.alpha_late},
                {"beta_early", s.beta_early},
                {"beta_late", s.beta_late},
                {"threshold_p", s.threshold_p}};
}

void set_schedule_field(ScheduleConfig& s, const std::string& key, const json& v) {
    if (key == "alpha_early") s.alpha_early = v.get<double>();
    else if (key == "alpha_late") s.alpha_late = v.get<double>();
    else if (key == "beta_early") s.beta_early = v.get<double>();
    else if (key == "beta_late") s.beta_late = v.get<double>();
    else if (key == "threshold_p") s.threshold_p = v.get<double>();
    else throw MalformedRecord("unknown schedule key '" + key + "'");
}

json train_to_json(const TrainConfig& t) {
    return json{{"disable_dynamic_adjustment", t.disable_dynamic_adjustment},
                {"disable_iou_gate", t.disable_iou_gate},
                {"disable_relevance", t.disable_relevance},
                {"group_size", t.group_size},
                {"learning_rate", t.learning_rate},
                {"per_op_action_reward", t.per_op_action_reward},
                {"pretrain_epochs", t.pretrain_epochs},
                {"pretrain_lr", t.pretrain_lr},
                {"pretrain_task_count", t.pretrain_task_count},
                {"prompts_per_batch", t.prompts_per_batch},
                {"total_iters", t.total_iters}};
}

void set_train_field(TrainConfig& t, const std::string& key, const json& v) {
    if (key == "disable_dynamic_adjustment") t.disable_dynamic_adjustment = json_bool(v, key);
    else if (key == "disable_iou_gate") t.disable_iou_gate = json_bool(v, key);
    else if (key == "disable_relevance") t.disable_relevance = json_bool(v, key);
    else if (key == "group_size") t.group_size = v.get<int>();
    else if (key == "learning_rate") t.learning_rate = v.get<double>();
    else if (key == "per_op_action_reward") t.per_op_action_reward = json_bool(v, key);
    else if (key == "pretrain_epochs") t.pretrain_epochs = v.get<int>();
    else if (key == "pretrain_lr") t.pretrain_lr = v.get<double>();
    else if (key == "pretrain_task_count") t.pretrain_task_count = v.get<int>();
    else if (key == "prompts_per_batch") t.prompts_per_batch = v.get<int>();
    else if (key == "total_iters") t.total_iters = v.get<int>();
    else throw MalformedRecord("unknown train key '" + key + "'");
}

json policy_to_json(const PolicyParams& p) {
    return json{{"temperature", p.temperature},
                {"weights", std::vector<double>(p.weights.begin(), p.weights.end())}};
}

void set_policy_field(PolicyParams& p, const std::string& key, const json& v) {
    if (key == "temperature") {
        p.temperature = v.get<double>();
    } else if (key == "weights") {
        const auto w = v.get<std::vector<double>>();
        if (w.size() != p.weights.size()) {
            throw MalformedRecord("policy weights must have " +
                                  std::to_string(p.weights.size()) + " entries");
        }
        std::copy(w.begin(), w.end(), p.weights.begin());
    } else if (key.size() == 2 && key[0] == 'w' && key[1] >= '0' &&
               key[1] < '0' + PolicyParams::kWeightCount) {
        p.weights[static_cast<std::size_t>(key[1] - '0')] = v.get<double>();
    } else {
        throw MalformedRecord("unknown policy key '" + key + "'");
    }
}

void set_tasks_field(SuiteConfig& s, const std::string& key, const json& v) {
    if (key == "count") s.count = v.get<int>();
    else if (key == "k_min") s.k_min = v.get<int>();
    else if (key == "k_max") s.k_max = v.get<int>();
    else if (key == "base") {
        if (!v.is_object()) throw MalformedRecord("tasks.base: expected an object");
        for (const auto& [bk, bv] : v.items()) set_task_params_field(s.base, bk, bv);
    } else {
        // any other key addresses the base task parameters directly, which is
        // what the flat environment-variable grammar produces
        set_task_params_field(s.base, key, v);
    }
}

json config_to_json(const RunConfig& c) {
    json base = task_params_to_json(c.tasks.base);
    base.erase("evidence_count");  // per-task, drawn from [k_min, k_max]
    return json{{"env", env_to_json(c.env)},
                {"init_jitter", c.init_jitter},
                {"policy", policy_to_json(c.policy)},
                {"schedule", schedule_to_json(c.schedule)},
                {"seed", c.seed},
                {"tasks", json{{"base", std::move(base)},
                               {"count", c.tasks.count},
                               {"k_max", c.tasks.k_max},
                               {"k_min", c.tasks.k_min}}},
                {"train", train_to_json(c.train)}};
}

void apply_config_json(RunConfig& c, const json& j) {
    if (!j.is_object()) throw MalformedRecord("config: expected a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "init_jitter") c.init_jitter = value.get<double>();
            else if (key == "env") {
                for (const auto& [k, v] : value.items()) set_env_field(c.env, k, v);
            } else if (key == "policy") {
                for (const auto& [k, v] : value.items()) set_policy_field(c.policy, k, v);
            } else if (key == "schedule") {
                for (const auto& [k, v] : value.items()) set_schedule_field(c.schedule, k, v);
            } else if (key == "tasks") {
                for (const auto& [k, v] : value.items()) set_tasks_field(c.tasks, k, v);
            } else if (key == "train") {
                for (const auto& [k, v] : value.items()) set_train_field(c.train, k, v);
            } else {
                throw MalformedRecord("unknown config section '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw MalformedRecord(std::string("config: ") + e.what());
    }
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

json parse_override_value(const std::string& value) {
    json v = json::parse(value, nullptr, false);
    if (v.is_discarded()) throw MalformedRecord("override value '" + value + "' is not valid");
    return v;
}

}  // namespace

void SuiteConfig::validate() const {
    if (count < 1) throw std::invalid_argument("tasks.count must be >= 1");
    if (k_min < 1 || k_max > 8 || k_min > k_max)
        throw std::invalid_argument("evidence count range must satisfy 1 <= k_min <= k_max <= 8");
    TaskParams p = base;
    p.evidence_count = k_min;
    p.validate();
}

void RunConfig::validate() const {
    tasks.validate();
    if (env.initial_budget < 2) throw std::invalid_argument("env.initial_budget must be >= 2");
    if (env.n_max < 1) throw std::invalid_argument("env.n_max must be >= 1");
    if (env.selection_budget < 1) throw std::invalid_argument("env.selection_budget must be >= 1");
    if (env.max_steps < 1) throw std::invalid_argument("env.max_steps must be >= 1");
    if (!(init_jitter >= 0.0)) throw std::invalid_argument("init_jitter must be >= 0");
    policy.validate();
    resolved_train().validate();
}

TrainConfig RunConfig::resolved_train() const {
    TrainConfig t = train;
    t.schedule = schedule;
    t.schedule.total_iters = t.total_iters;
    return t;
}

RunConfig default_run_config() { return RunConfig{}; }

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedRecord("cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw MalformedRecord(path + ": not valid JSON");
    RunConfig c;
    apply_config_json(c, j);
    return c;
}

std::string run_config_to_string(const RunConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

void save_run_config(const std::string& path, const RunConfig& config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << run_config_to_string(config);
    if (!out) throw Error("write failed for " + path);
}

std::vector<std::pair<std::string, std::string>> apply_env_overrides(
    RunConfig& config, const std::vector<std::pair<std::string, std::string>>& env_vars) {
    std::vector<std::pair<std::string, std::string>> applied;
    std::vector<std::pair<std::string, std::string>> sorted = env_vars;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [name, value] : sorted) {
        if (name.rfind("EARL_", 0) != 0) continue;
        const std::string rest = name.substr(5);
        const json v = parse_override_value(value);
        if (rest == "SEED") {
            config.seed = v.get<std::uint64_t>();
        } else if (rest == "INIT_JITTER") {
            config.init_jitter = v.get<double>();
        } else {
            const auto sep = rest.find('_');
            if (sep == std::string::npos || sep + 1 >= rest.size()) {
                throw MalformedRecord("override " + name + ": expected EARL_<SECTION>_<KEY>");
            }
            const std::string section = rest.substr(0, sep);
            const std::string key = lower(rest.substr(sep + 1));
            try {
                if (section == "ENV") set_env_field(config.env, key, v);
                else if (section == "POLICY") set_policy_field(config.policy, key, v);
                else if (section == "SCHEDULE") set_schedule_field(config.schedule, key, v);
                else if (section == "TASKS") set_tasks_field(config.tasks, key, v);
                else if (section == "TRAIN") set_train_field(config.train, key, v);
                else throw MalformedRecord("override " + name + ": unknown section");
            } catch (const json::exception& e) {
                throw MalformedRecord("override " + name + ": " + e.what());
            }
        }
        applied.emplace_back(name, value);
    }
    return applied;
}

std::vector<std::pair<std::string, std::string>> apply_process_env_overrides(RunConfig& config) {
    std::vector<std::pair<std::string, std::string>> vars;
    for (char** e = environ; e && *e; ++e) {
        const std::string entry(*e);
        if (entry.rfind("EARL_", 0) != 0) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        vars.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
    }
    return apply_env_overrides(config, vars);
}

std::vector<SyntheticTask> generate_suite(const RunConfig& config) {
    config.validate();
    std::vector<SyntheticTask> suite;
    suite.reserve(static_cast<std::size_t>(config.tasks.count));
    for (int i = 0; i < config.tasks.count; ++i) {
        TaskParams params = config.tasks.base;
        params.initial_budget = config.env.initial_budget;
        params.n_max = config.env.n_max;
        if (config.tasks.k_max > config.tasks.k_min) {
            Rng kr(substream(config.seed, "evidence-count", static_cast<std::uint64_t>(i)));
            params.evidence_count = kr.uniform_int(config.tasks.k_min, config.tasks.k_max);
        } else {
            params.evidence_count = config.tasks.k_min;
        }
        suite.push_back(
            generate_task(substream(config.seed, "task", static_cast<std::uint64_t>(i)), params));
    }
    return suite;
}

}  // namespace earl
