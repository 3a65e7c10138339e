#include "earl/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "earl/errors.hpp"
#include "json_io.hpp"

namespace earl {

namespace {

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    return out;
}

std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedRecord("cannot open " + path);
    return in;
}

// yields (line, number) pairs after checking the format header
class LineReader {
public:
    explicit LineReader(const std::string& path) : path_(path), in_(open_for_read(path)) {
        std::string header;
        if (!std::getline(in_, header) || header != kFormatHeader) {
            throw MalformedRecord(path + ": missing '" + std::string(kFormatHeader) +
                                  "' header line");
        }
        line_number_ = 1;
    }

    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++line_number_;
            if (!line.empty()) return true;
        }
        return false;
    }

    int line_number() const { return line_number_; }

    json parse(const std::string& line) const {
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw MalformedRecord(path_ + ":" + std::to_string(line_number_) +
                                  ": not a JSON object");
        }
        return j;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw MalformedRecord(path_ + ":" + std::to_string(line_number_) + ": " + what);
    }

private:
    std::string path_;
    std::ifstream in_;
    int line_number_ = 0;
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json action_to_json(const Action& action, int context_size_after) {
    json j;
    j["context_size"] = context_size_after;
    j["tag"] = action_tag(action);
    if (const auto* select = std::get_if<SelectFrames>(&action)) {
        j["frames"] = select->frames;
    } else if (const auto* answer = std::get_if<Answer>(&action)) {
        if (answer->choice) j["choice"] = *answer->choice;
        else j["choice"] = nullptr;
    }
    return j;
}

TrajectoryStep step_from_json(const json& j, const LineReader& reader) {
    TrajectoryStep step;
    step.context_size_after = j.at("context_size").get<int>();
    const std::string tag = j.at("tag").get<std::string>();
    if (tag == "text") {
        step.action = TextStep{};
    } else if (tag == "select") {
        SelectFrames sf;
        sf.frames = j.at("frames").get<std::vector<int>>();
        step.action = sf;
    } else if (tag == "answer") {
        Answer a;
        const auto& choice = j.at("choice");
        if (!choice.is_null()) a.choice = choice.get<int>();
        step.action = a;
    } else {
        reader.fail("unknown action tag '" + tag + "'");
    }
    return step;
}

}  // namespace

void save_tasks(const std::string& path, std::span<const SyntheticTask> tasks) {
    auto out = open_for_write(path);
    out << kFormatHeader << "\n";
    for (const auto& task : tasks) {
        json j{{"correct_option", task.correct_option},
               {"evidence", task.evidence},
               {"params", task_params_to_json(task.params)},
               {"seed", task.seed},
               {"task_id", task.task_id}};
        out << j.dump() << "\n";
    }
    if (!out) throw Error("write failed for " + path);
}

std::vector<SyntheticTask> load_tasks(const std::string& path) {
    LineReader reader(path);
    std::vector<SyntheticTask> tasks;
    std::string line;
    while (reader.next(line)) {
        const json j = reader.parse(line);
        try {
            const auto seed = j.at("seed").get<std::uint64_t>();
            const TaskParams params = task_params_from_json(j.at("params"));
            SyntheticTask task = generate_task(seed, params);
            if (task.task_id != j.at("task_id").get<std::string>() ||
                task.evidence != j.at("evidence").get<std::vector<int>>() ||
                task.correct_option != j.at("correct_option").get<int>()) {
                reader.fail("stored task fields disagree with regeneration from seed");
            }
            tasks.push_back(std::move(task));
        } catch (const MalformedRecord&) {
            throw;
        } catch (const json::exception& e) {
            reader.fail(e.what());
        } catch (const std::invalid_argument& e) {
            reader.fail(e.what());
        }
    }
    return tasks;
}

void save_annotations(const std::string& path, std::span<const SyntheticTask> tasks) {
    auto out = open_for_write(path);
    out << kFormatHeader << "\n";
    for (const auto& task : tasks) {
        task.annotation.validate();
        json j{{"gold_frames", task.annotation.gold_frames},
               {"task_id", task.task_id},
               {"tolerance", task.annotation.tolerance}};
        out << j.dump() << "\n";
    }
    if (!out) throw Error("write failed for " + path);
}

void save_annotations(const std::string& path,
                      const std::map<std::string, GoldenAnnotation>& annotations) {
    auto out = open_for_write(path);
    out << kFormatHeader << "\n";
    for (const auto& [task_id, annotation] : annotations) {
        annotation.validate();
        json j{{"gold_frames", annotation.gold_frames},
               {"task_id", task_id},
               {"tolerance", annotation.tolerance}};
        out << j.dump() << "\n";
    }
    if (!out) throw Error("write failed for " + path);
}

std::map<std::string, GoldenAnnotation> load_annotations(const std::string& path) {
    LineReader reader(path);
    std::map<std::string, GoldenAnnotation> annotations;
    std::string line;
    while (reader.next(line)) {
        const json j = reader.parse(line);
        try {
            GoldenAnnotation a;
            a.gold_frames = j.at("gold_frames").get<std::vector<int>>();
            a.tolerance = j.at("tolerance").get<int>();
            a.validate();
            const auto task_id = j.at("task_id").get<std::string>();
            if (!annotations.emplace(task_id, std::move(a)).second) {
                reader.fail("duplicate annotation for task '" + task_id + "'");
            }
        } catch (const Error&) {
            throw;  // MalformedAnnotation and reader failures carry context
        } catch (const json::exception& e) {
            reader.fail(e.what());
        }
    }
    return annotations;
}

void save_trajectories(const std::string& path, std::span<const Trajectory> trajectories) {
    auto out = open_for_write(path);
    out << kFormatHeader << "\n";
    for (const auto& t : trajectories) {
        json steps = json::array();
        for (const auto& step : t.steps) {
            steps.push_back(action_to_json(step.action, step.context_size_after));
        }
        json j{{"predicted_answer", nullptr},
               {"selected_union", t.selected_union},
               {"steps", std::move(steps)},
               {"task_id", t.task_id},
               {"terminal", t.terminal}};
        if (t.predicted_answer) j["predicted_answer"] = *t.predicted_answer;
        out << j.dump() << "\n";
    }
    if (!out) throw Error("write failed for " + path);
}

std::vector<Trajectory> load_trajectories(const std::string& path) {
    LineReader reader(path);
    std::vector<Trajectory> trajectories;
    std::string line;
    while (reader.next(line)) {
        const json j = reader.parse(line);
        try {
            Trajectory t;
            t.task_id = j.at("task_id").get<std::string>();
            t.terminal = json_bool(j.at("terminal"), "terminal");
            const auto& answer = j.at("predicted_answer");
            if (!answer.is_null()) t.predicted_answer = answer.get<int>();
            t.selected_union = j.at("selected_union").get<std::vector<int>>();
            for (const auto& step : j.at("steps")) {
                t.steps.push_back(step_from_json(step, reader));
            }
            trajectories.push_back(std::move(t));
        } catch (const Error&) {
            throw;
        } catch (const json::exception& e) {
            reader.fail(e.what());
        }
    }
    return trajectories;
}

void save_checkpoint(const std::string& path, const PolicyParams& params) {
    params.validate();
    auto out = open_for_write(path);
    out << kFormatHeader << "\n";
    out << "temperature=" << format_double(params.temperature) << "\n";
    for (int r = 0; r < PolicyParams::kWeightCount; ++r) {
        out << "w" << r << "=" << format_double(params.weights[static_cast<std::size_t>(r)])
            << "\n";
    }
    if (!out) throw Error("write failed for " + path);
}

PolicyParams load_checkpoint(const std::string& path) {
    LineReader reader(path);
    PolicyParams params;
    bool seen[1 + PolicyParams::kWeightCount] = {};
    std::string line;
    while (reader.next(line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) reader.fail("expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end != value.c_str() + value.size() || value.empty()) {
            reader.fail("bad numeric value '" + value + "'");
        }
        if (key == "temperature") {
            params.temperature = v;
            seen[0] = true;
        } else if (key.size() == 2 && key[0] == 'w' && key[1] >= '0' &&
                   key[1] < '0' + PolicyParams::kWeightCount) {
            const int r = key[1] - '0';
            params.weights[static_cast<std::size_t>(r)] = v;
            seen[1 + r] = true;
        } else {
            reader.fail("unknown checkpoint key '" + key + "'");
        }
    }
    for (bool s : seen) {
        if (!s) throw MalformedRecord(path + ": incomplete checkpoint");
    }
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw MalformedRecord(path + ": " + e.what());
    }
    return params;
}

}  // namespace earl
