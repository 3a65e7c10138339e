#pragma once

// Private JSON codecs shared by the serialization and config translation
// units. Not installed; public headers stay free of the JSON dependency.

#include <string>

#include <json.hpp>

#include "earl/errors.hpp"
#include "earl/synth.hpp"

namespace earl {

using json = nlohmann::json;

// tolerant boolean read: accepts true/false and 0/1
inline bool json_bool(const json& v, const std::string& where) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer()) return v.get<long long>() != 0;
    throw MalformedRecord(where + ": expected a boolean");
}

inline json task_params_to_json(const TaskParams& p) {
    return json{{"annotation_tolerance", p.annotation_tolerance},
                {"ensure_revealable", p.ensure_revealable},
                {"evidence_count", p.evidence_count},
                {"frame_count", p.frame_count},
                {"grid_margin", p.grid_margin},
                {"initial_budget", p.initial_budget},
                {"n_max", p.n_max},
                {"option_count", p.option_count},
                {"required_coverage", p.required_coverage},
                {"reveal_radius", p.reveal_radius},
                {"sigma", p.sigma},
                {"signal_noise", p.signal_noise}};
}

inline void set_task_params_field(TaskParams& p, const std::string& key, const json& v) {
    if (key == "annotation_tolerance") p.annotation_tolerance = v.get<int>();
    else if (key == "ensure_revealable") p.ensure_revealable = json_bool(v, key);
    else if (key == "evidence_count") p.evidence_count = v.get<int>();
    else if (key == "frame_count") p.frame_count = v.get<int>();
    else if (key == "grid_margin") p.grid_margin = v.get<int>();
    else if (key == "initial_budget") p.initial_budget = v.get<int>();
    else if (key == "n_max") p.n_max = v.get<int>();
    else if (key == "option_count") p.option_count = v.get<int>();
    else if (key == "required_coverage") p.required_coverage = v.get<double>();
    else if (key == "reveal_radius") p.reveal_radius = v.get<int>();
    else if (key == "sigma") p.sigma = v.get<double>();
    else if (key == "signal_noise") p.signal_noise = v.get<double>();
    else throw MalformedRecord("unknown task parameter key '" + key + "'");
}

inline TaskParams task_params_from_json(const json& j) {
    if (!j.is_object()) throw MalformedRecord("task params: expected an object");
    TaskParams p;
    for (const auto& [key, value] : j.items()) set_task_params_field(p, key, value);
    return p;
}

}  // namespace earl
