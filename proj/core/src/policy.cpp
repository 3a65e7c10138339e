#include "earl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "earl/errors.hpp"

namespace earl {

namespace {

constexpr double kProbEps = 1e-12;
constexpr int kSampleAttempts = 64;

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<std::array<double, 4>> all_features(const Observation& obs) {
    const int n = static_cast<int>(obs.frames.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = obs.frames[static_cast<std::size_t>(a)].signal;
        const double sb = obs.frames[static_cast<std::size_t>(b)].signal;
        if (sa != sb) return sa < sb;
        return a < b;
    });
    std::vector<double> rank(static_cast<std::size_t>(n), 1.0);
    for (int pos = 0; pos < n; ++pos) {
        rank[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] =
            n > 1 ? static_cast<double>(pos) / static_cast<double>(n - 1) : 1.0;
    }
    std::vector<std::array<double, 4>> feats(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double s = obs.frames[static_cast<std::size_t>(i)].signal;
        double neighbor_sum = 0.0;
        int neighbor_count = 0;
        if (i > 0) {
            neighbor_sum += obs.frames[static_cast<std::size_t>(i - 1)].signal;
            ++neighbor_count;
        }
        if (i + 1 < n) {
            neighbor_sum += obs.frames[static_cast<std::size_t>(i + 1)].signal;
            ++neighbor_count;
        }
        const double contrast =
            neighbor_count > 0 ? s - neighbor_sum / static_cast<double>(neighbor_count) : 0.0;
        feats[static_cast<std::size_t>(i)] = {s, rank[static_cast<std::size_t>(i)], 1.0, contrast};
    }
    return feats;
}

// positions of the action's frames within the observation
std::vector<int> selected_positions(const Observation& obs, const SelectFrames& action) {
    if (action.frames.empty()) throw EmptySelection("selection needs at least one frame");
    if (static_cast<int>(action.frames.size()) > kMaxSelectPerOp) {
        throw std::invalid_argument("selection of " + std::to_string(action.frames.size()) +
                                    " frames exceeds the per-operation cap of " +
                                    std::to_string(kMaxSelectPerOp));
    }
    std::vector<int> pos;
    pos.reserve(action.frames.size());
    for (int f : action.frames) {
        int found = -1;
        for (int i = 0; i < static_cast<int>(obs.frames.size()); ++i) {
            if (obs.frames[static_cast<std::size_t>(i)].frame == f) {
                found = i;
                break;
            }
        }
        if (found < 0) {
            throw SelectionOutsideContext("frame " + std::to_string(f) +
                                          " is not in the observed context");
        }
        pos.push_back(found);
    }
    return pos;
}

// P(k successes) for k = 0..kMaxSelectPerOp over `p` with index `skip` left out
std::array<double, kMaxSelectPerOp + 2> head_without(std::span<const double> p, int skip) {
    std::array<double, kMaxSelectPerOp + 2> f{};
    f[0] = 1.0;
    for (int i = 0; i < static_cast<int>(p.size()); ++i) {
        if (i == skip) continue;
        const double q = p[static_cast<std::size_t>(i)];
        f[kMaxSelectPerOp + 1] += f[kMaxSelectPerOp] * q;
        for (int k = kMaxSelectPerOp; k >= 1; --k) f[k] = f[k] * (1.0 - q) + f[k - 1] * q;
        f[0] *= 1.0 - q;
    }
    return f;
}

}  // namespace

void PolicyParams::validate() const {
    for (double w : weights) {
        if (!std::isfinite(w)) throw std::invalid_argument("policy weights must be finite");
    }
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw std::invalid_argument("temperature must be positive and finite");
    }
}

std::array<double, 4> frame_features(const Observation& obs, int i) {
    if (obs.frames.empty()) throw EmptyObservation("observation has no frames");
    if (i < 0 || i >= static_cast<int>(obs.frames.size())) {
        throw std::invalid_argument("frame position out of range");
    }
    return all_features(obs)[static_cast<std::size_t>(i)];
}

std::vector<double> selection_probabilities(const PolicyParams& params, const Observation& obs) {
    if (obs.frames.empty()) throw EmptyObservation("observation has no frames");
    const auto feats = all_features(obs);
    std::vector<double> p(feats.size());
    for (std::size_t i = 0; i < feats.size(); ++i) {
        double score = 0.0;
        for (int r = 0; r < PolicyParams::kWeightCount; ++r) score += params.weights[static_cast<std::size_t>(r)] * feats[i][static_cast<std::size_t>(r)];
        p[i] = std::clamp(stable_sigmoid(score / params.temperature), kProbEps, 1.0 - kProbEps);
    }
    return p;
}

std::array<double, kMaxSelectPerOp + 2> poisson_binomial_head(std::span<const double> p) {
    return head_without(p, -1);
}

double selection_normalizer(std::span<const double> p) {
    const auto f = poisson_binomial_head(p);
    double z = 0.0;
    for (int k = 1; k <= kMaxSelectPerOp; ++k) z += f[static_cast<std::size_t>(k)];
    return z;
}

double selection_logprob(const PolicyParams& params, const Observation& obs,
                         const SelectFrames& action) {
    const auto pos = selected_positions(obs, action);
    const auto p = selection_probabilities(params, obs);
    std::vector<char> in_set(p.size(), 0);
    for (int i : pos) in_set[static_cast<std::size_t>(i)] = 1;
    double lp = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        lp += in_set[i] ? std::log(p[i]) : std::log1p(-p[i]);
    }
    return lp - std::log(selection_normalizer(p));
}

WeightGrad selection_logprob_grad(const PolicyParams& params, const Observation& obs,
                                  const SelectFrames& action) {
    const auto pos = selected_positions(obs, action);
    const auto feats = all_features(obs);
    const auto p = selection_probabilities(params, obs);
    std::vector<char> in_set(p.size(), 0);
    for (int i : pos) in_set[static_cast<std::size_t>(i)] = 1;

    const double z = selection_normalizer(p);
    WeightGrad grad{};
    for (std::size_t i = 0; i < p.size(); ++i) {
        // d log pi / d score_i, combining the membership term with the
        // normalizer P(1 <= |S| <= cap) whose sensitivity to p_i telescopes
        // to P_-i(0) - P_-i(cap)
        const auto rest = head_without(p, static_cast<int>(i));
        const double dz_dp = rest[0] - rest[kMaxSelectPerOp];
        const double member = in_set[i] ? 1.0 - p[i] : -p[i];
        const double dscore = (member - dz_dp * p[i] * (1.0 - p[i]) / z) / params.temperature;
        for (int r = 0; r < PolicyParams::kWeightCount; ++r) {
            grad[static_cast<std::size_t>(r)] += dscore * feats[i][static_cast<std::size_t>(r)];
        }
    }
    return grad;
}

double action_logprob(const PolicyParams& params, const Observation& obs, const Action& action) {
    if (const auto* select = std::get_if<SelectFrames>(&action)) {
        return selection_logprob(params, obs, *select);
    }
    return 0.0;
}

WeightGrad action_logprob_grad(const PolicyParams& params, const Observation& obs,
                               const Action& action) {
    if (const auto* select = std::get_if<SelectFrames>(&action)) {
        return selection_logprob_grad(params, obs, *select);
    }
    return WeightGrad{};
}

Action act_random(const RandomPolicyConfig& config, const Observation& obs, Rng& rng) {
    if (obs.frames.empty()) throw EmptyObservation("observation has no frames");
    const int n = static_cast<int>(obs.frames.size());
    const bool can_select = obs.selections_used < obs.selection_budget && n >= 2;
    if (can_select && rng.bernoulli(config.select_prob)) {
        const int take = rng.uniform_int(1, std::min(config.max_select, n));
        std::vector<int> ids;
        ids.reserve(static_cast<std::size_t>(n));
        for (const auto& fo : obs.frames) ids.push_back(fo.frame);
        auto chosen = rng.sample_without_replacement(std::move(ids),
                                                     static_cast<std::size_t>(take));
        std::sort(chosen.begin(), chosen.end());
        return SelectFrames{std::move(chosen)};
    }
    return Answer{rng.uniform_int(0, obs.option_count - 1)};
}

Action act_oracle(const SyntheticTask& task, const EpisodeState& state, const EnvConfig& config) {
    const bool covered = revealed_fraction(task.evidence, state.context, task.reveal_radius) >=
                         task.required_coverage;
    if (covered || state.selections_used >= config.selection_budget || state.context.size() < 2) {
        return Answer{answer_oracle(task, state.context)};
    }
    auto targets = evidence_targets(state.context, task.evidence, task.reveal_radius);
    if (targets.empty()) return Answer{answer_oracle(task, state.context)};
    return SelectFrames{std::move(targets)};
}

Action act_softmax(const PolicyParams& params, const Observation& obs, Rng& rng) {
    params.validate();
    if (obs.frames.empty()) throw EmptyObservation("observation has no frames");
    const int n = static_cast<int>(obs.frames.size());

    double max_signal = 0.0;
    for (const auto& fo : obs.frames) max_signal = std::max(max_signal, fo.signal);
    if (obs.selections_used >= obs.selection_budget || n < 2 ||
        max_signal > params.weights[3]) {
        return Answer{std::nullopt};
    }

    const auto p = selection_probabilities(params, obs);
    for (int attempt = 0; attempt < kSampleAttempts; ++attempt) {
        std::vector<int> chosen;
        for (int i = 0; i < n; ++i) {
            if (rng.bernoulli(p[static_cast<std::size_t>(i)])) {
                chosen.push_back(obs.frames[static_cast<std::size_t>(i)].frame);
            }
        }
        if (!chosen.empty() && static_cast<int>(chosen.size()) <= kMaxSelectPerOp) {
            return SelectFrames{std::move(chosen)};
        }
    }

    // degenerate probabilities; fall back to the highest-probability frames
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double pa = p[static_cast<std::size_t>(a)];
        const double pb = p[static_cast<std::size_t>(b)];
        if (pa != pb) return pa > pb;
        return a < b;
    });
    std::vector<int> chosen;
    for (int k = 0; k < std::min(kMaxSelectPerOp, n); ++k) {
        chosen.push_back(obs.frames[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])].frame);
    }
    std::sort(chosen.begin(), chosen.end());
    return SelectFrames{std::move(chosen)};
}

EpisodeRecord run_episode(const SyntheticTask& task, Policy& policy, const EnvConfig& config,
                          Rng& rng) {
    EpisodeState state = reset(task, config.initial_budget);
    EpisodeRecord rec;
    rec.trajectory.task_id = task.task_id;
    while (!state.terminal) {
        Observation obs = make_observation(task, state, config);
        const Action action = policy.act(task, state, obs, rng);
        EpisodeState next = step(task, state, action, config);
        rec.decisions.emplace_back(std::move(obs), action);
        rec.trajectory.steps.push_back({action, next.context.size()});
        state = std::move(next);
    }
    rec.trajectory.predicted_answer = state.predicted_answer;
    rec.trajectory.terminal = true;
    rec.trajectory.selected_union = state.selected_union;
    return rec;
}

}  // namespace earl
