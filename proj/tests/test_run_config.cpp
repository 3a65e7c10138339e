#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "earl/errors.hpp"
#include "earl/run_config.hpp"
#include "test_support.hpp"

using namespace earl;

namespace {

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
}

RunConfig quirky_config() {
    RunConfig c;
    c.seed = 42;
    c.init_jitter = 0.125;
    c.tasks.count = 7;
    c.tasks.k_min = 2;
    c.tasks.k_max = 3;
    c.tasks.base.frame_count = 128;
    c.tasks.base.signal_noise = 0.2;
    c.tasks.base.annotation_tolerance = 1;
    c.env.initial_budget = 16;
    c.env.n_max = 8;
    c.env.max_steps = 6;
    c.schedule.beta_late = 0.7;
    c.schedule.threshold_p = 0.3;
    c.train.total_iters = 40;
    c.train.group_size = 4;
    c.train.disable_iou_gate = true;
    c.policy.weights = {0.5, 0.25, -0.75, 1.25};
    c.policy.temperature = 0.8;
    return c;
}

}  // namespace

TEST_CASE("defaults form a valid desk-scale run") {
    const RunConfig c = default_run_config();
    c.validate();
    CHECK(c.seed == 1);
    CHECK(c.tasks.count == 500);
    CHECK(c.tasks.k_min == 1);
    CHECK(c.tasks.k_max == 4);
    CHECK(c.tasks.base.frame_count == 512);
    CHECK(c.env.initial_budget == 32);
    CHECK(c.env.n_max == 16);
    CHECK(c.env.selection_budget == 2);
    CHECK(c.train.total_iters == 300);
    CHECK(c.train.prompts_per_batch == 32);
    CHECK(c.train.group_size == 8);
    CHECK(c.train.learning_rate == 0.02);
    CHECK(c.schedule.threshold_p == 0.4);
}

TEST_CASE("config files round trip exactly") {
    test::TempDir dir;
    const auto path = dir.file("config.json");
    const RunConfig original = quirky_config();
    save_run_config(path, original);
    const RunConfig loaded = load_run_config(path);
    CHECK(run_config_to_string(loaded) == run_config_to_string(original));
    CHECK(loaded.seed == 42);
    CHECK(loaded.tasks.base.frame_count == 128);
    CHECK(loaded.train.disable_iou_gate);
    CHECK(loaded.policy.weights[3] == 1.25);
}

TEST_CASE("partial configs keep defaults for missing keys") {
    test::TempDir dir;
    const auto path = dir.file("config.json");
    spit(path, "{\"seed\": 9, \"train\": {\"total_iters\": 50}}\n");
    const RunConfig c = load_run_config(path);
    CHECK(c.seed == 9);
    CHECK(c.train.total_iters == 50);
    CHECK(c.tasks.count == 500);
    CHECK(c.train.group_size == 8);
}

TEST_CASE("unknown sections and keys are rejected") {
    test::TempDir dir;
    const auto path = dir.file("config.json");
    spit(path, "{\"bogus\": {}}");
    CHECK_THROWS_AS(load_run_config(path), MalformedRecord);
    spit(path, "{\"env\": {\"warp\": 1}}");
    CHECK_THROWS_AS(load_run_config(path), MalformedRecord);
    spit(path, "{\"train\": {\"momentum\": 0.9}}");
    CHECK_THROWS_AS(load_run_config(path), MalformedRecord);
    spit(path, "{\"tasks\": {\"warp\": 1}}");
    CHECK_THROWS_AS(load_run_config(path), MalformedRecord);
    spit(path, "{\"policy\": {\"weights\": [1, 2]}}");
    CHECK_THROWS_AS(load_run_config(path), MalformedRecord);
    spit(path, "{\"seed\": }");
    CHECK_THROWS_AS(load_run_config(path), MalformedRecord);
    spit(path, "[]");
    CHECK_THROWS_AS(load_run_config(path), MalformedRecord);
    CHECK_THROWS_AS(load_run_config(dir.file("absent.json")), MalformedRecord);
}

TEST_CASE("environment overrides address every section") {
    RunConfig c;
    const std::vector<std::pair<std::string, std::string>> vars{
        {"PATH", "/usr/bin"},
        {"EARL_TRAIN_LEARNING_RATE", "0.5"},
        {"EARL_SEED", "12"},
        {"EARL_POLICY_W3", "2.5"},
        {"EARL_TASKS_FRAME_COUNT", "256"},
        {"EARL_ENV_N_MAX", "8"},
        {"EARL_SCHEDULE_THRESHOLD_P", "0.25"},
        {"EARL_INIT_JITTER", "0.75"},
        {"HOME", "/root"},
    };
    const auto applied = apply_env_overrides(c, vars);
    CHECK(c.seed == 12);
    CHECK(c.init_jitter == 0.75);
    CHECK(c.train.learning_rate == 0.5);
    CHECK(c.policy.weights[3] == 2.5);
    CHECK(c.tasks.base.frame_count == 256);
    CHECK(c.env.n_max == 8);
    CHECK(c.schedule.threshold_p == 0.25);

    REQUIRE(applied.size() == 7);  // only the EARL_* entries
    CHECK(std::is_sorted(applied.begin(), applied.end()));
    for (const auto& [name, value] : applied) {
        CHECK(name.rfind("EARL_", 0) == 0);
    }

    RunConfig fresh;
    CHECK_THROWS_AS(apply_env_overrides(fresh, {{"EARL_SEED", "banana"}}), MalformedRecord);
    CHECK_THROWS_AS(apply_env_overrides(fresh, {{"EARL_BOGUS_KEY", "1"}}), MalformedRecord);
    CHECK_THROWS_AS(apply_env_overrides(fresh, {{"EARL_TRAIN_MOMENTUM", "1"}}), MalformedRecord);
    CHECK_THROWS_AS(apply_env_overrides(fresh, {{"EARL_SEED", ""}}), MalformedRecord);
}

TEST_CASE("resolved train folds the schedule in") {
    RunConfig c = quirky_config();
    const TrainConfig t = c.resolved_train();
    CHECK(t.schedule.total_iters == 40);
    CHECK(t.schedule.threshold_p == 0.3);
    CHECK(t.schedule.beta_late == 0.7);
    CHECK(t.group_size == 4);
}

TEST_CASE("suite validation bounds") {
    SuiteConfig s;
    s.k_max = 9;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = SuiteConfig{};
    s.count = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = SuiteConfig{};
    s.k_min = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = SuiteConfig{};
    s.k_min = 3;
    s.k_max = 2;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    SuiteConfig{}.validate();
}

TEST_CASE("generate_suite is deterministic and follows the env geometry") {
    RunConfig c;
    c.tasks.count = 64;
    c.env.initial_budget = 16;
    c.env.n_max = 8;
    const auto a = generate_suite(c);
    const auto b = generate_suite(c);
    REQUIRE(a.size() == 64);
    REQUIRE(b.size() == 64);
    bool saw_min = false;
    bool saw_max = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].task_id == b[i].task_id);
        CHECK(a[i].evidence == b[i].evidence);
        const int k = static_cast<int>(a[i].evidence.size());
        CHECK(k >= c.tasks.k_min);
        CHECK(k <= c.tasks.k_max);
        saw_min = saw_min || k == c.tasks.k_min;
        saw_max = saw_max || k == c.tasks.k_max;
        CHECK(a[i].params.initial_budget == 16);
        CHECK(a[i].params.n_max == 8);
    }
    CHECK(saw_min);
    CHECK(saw_max);

    RunConfig other = c;
    other.seed = 2;
    const auto shifted = generate_suite(other);
    bool any_difference = false;
    for (std::size_t i = 0; i < shifted.size(); ++i) {
        any_difference = any_difference || shifted[i].evidence != a[i].evidence;
    }
    CHECK(any_difference);

    RunConfig fixed_k = c;
    fixed_k.tasks.k_min = 2;
    fixed_k.tasks.k_max = 2;
    for (const auto& task : generate_suite(fixed_k)) {
        CHECK(task.evidence.size() == 2);
    }

    RunConfig bad = c;
    bad.tasks.count = 0;
    CHECK_THROWS_AS(generate_suite(bad), std::invalid_argument);
}
