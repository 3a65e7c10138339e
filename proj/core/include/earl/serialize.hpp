#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "earl/env.hpp"
#include "earl/policy.hpp"
#include "earl/reward.hpp"
#include "earl/synth.hpp"

namespace earl {

// Leading line of every file the lab writes. Readers reject anything else.
inline constexpr const char* kFormatHeader = "format=earl-lab/v1";

// Task files store (seed, params) plus the derived fields for verification;
// signals are regenerated on load. Loading re-runs the generator and fails
// with MalformedRecord if the stored derivations no longer match.
void save_tasks(const std::string& path, std::span<const SyntheticTask> tasks);
std::vector<SyntheticTask> load_tasks(const std::string& path);

void save_annotations(const std::string& path, std::span<const SyntheticTask> tasks);
void save_annotations(const std::string& path,
                      const std::map<std::string, GoldenAnnotation>& annotations);
std::map<std::string, GoldenAnnotation> load_annotations(const std::string& path);

// bit-exact round trip
void save_trajectories(const std::string& path, std::span<const Trajectory> trajectories);
std::vector<Trajectory> load_trajectories(const std::string& path);

// Plain key=value checkpoint; doubles printed with 17 significant digits so
// reloading reproduces them bit for bit.
void save_checkpoint(const std::string& path, const PolicyParams& params);
PolicyParams load_checkpoint(const std::string& path);

}  // namespace earl
