#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "earl/env.hpp"
#include "earl/rng.hpp"
#include "earl/synth.hpp"

namespace earl {

// At most this many frames per selection operation, so a two-round union
// stays comparable to the <= 8 golden frames.
inline constexpr int kMaxSelectPerOp = 4;

// Learnable selection policy parameters. Weight order matches the feature
// vector (signal, signal rank, constant bias, local contrast); weights[3]
// doubles as the answer threshold on the maximum context signal.
struct PolicyParams {
    std::array<double, 4> weights{1.0, 0.5, -1.0, 1.5};
    double temperature = 0.5;

    static constexpr int kWeightCount = 4;
    void validate() const;
    bool operator==(const PolicyParams&) const = default;
};

using WeightGrad = std::array<double, PolicyParams::kWeightCount>;

// feature vector of the context frame at position `i` of the observation
std::array<double, 4> frame_features(const Observation& obs, int i);

// per-frame Bernoulli selection probabilities sigmoid(score / temperature)
std::vector<double> selection_probabilities(const PolicyParams& params, const Observation& obs);

// P(|S| = k) for k = 0..kMaxSelectPerOp plus the overflow mass, |S| the
// number of successes among independent Bernoulli draws p.
std::array<double, kMaxSelectPerOp + 2> poisson_binomial_head(std::span<const double> p);

// normalizer P(1 <= |S| <= kMaxSelectPerOp) of the conditioned selection set
double selection_normalizer(std::span<const double> p);

// Exact log-probability of a realized selection set under the conditioned
// independent-Bernoulli model, and its gradient in the four weights.
double selection_logprob(const PolicyParams& params, const Observation& obs,
                         const SelectFrames& action);
WeightGrad selection_logprob_grad(const PolicyParams& params, const Observation& obs,
                                  const SelectFrames& action);

// Selection steps carry the whole stochastic mass; text and answer decisions
// are deterministic given the observation and contribute zero.
double action_logprob(const PolicyParams& params, const Observation& obs, const Action& action);
WeightGrad action_logprob_grad(const PolicyParams& params, const Observation& obs,
                               const Action& action);

struct RandomPolicyConfig {
    double select_prob = 0.5;              // chance of selecting while budget remains
    int max_select = kMaxSelectPerOp;
};

Action act_random(const RandomPolicyConfig& config, const Observation& obs, Rng& rng);

// Privileged upper-bound policy: reads the hidden evidence, steers each
// re-sampling interval over it, and answers once coverage is met.
Action act_oracle(const SyntheticTask& task, const EpisodeState& state, const EnvConfig& config);

Action act_softmax(const PolicyParams& params, const Observation& obs, Rng& rng);

// -- pluggable policy interface over the three implementations --

class Policy {
public:
    virtual ~Policy() = default;
    virtual Action act(const SyntheticTask& task, const EpisodeState& state,
                       const Observation& obs, Rng& rng) = 0;
    virtual const char* name() const = 0;
};

class RandomPolicy final : public Policy {
public:
    explicit RandomPolicy(RandomPolicyConfig config = {}) : config_(config) {}
    Action act(const SyntheticTask&, const EpisodeState&, const Observation& obs,
               Rng& rng) override {
        return act_random(config_, obs, rng);
    }
    const char* name() const override { return "random"; }

private:
    RandomPolicyConfig config_;
};

class OraclePolicy final : public Policy {
public:
    explicit OraclePolicy(EnvConfig env) : env_(env) {}
    Action act(const SyntheticTask& task, const EpisodeState& state, const Observation&,
               Rng&) override {
        return act_oracle(task, state, env_);
    }
    const char* name() const override { return "oracle"; }

private:
    EnvConfig env_;
};

class SoftmaxPolicy final : public Policy {
public:
    explicit SoftmaxPolicy(PolicyParams params) : params_(params) {}
    Action act(const SyntheticTask&, const EpisodeState&, const Observation& obs,
               Rng& rng) override {
        return act_softmax(params_, obs, rng);
    }
    const char* name() const override { return "softmax"; }
    const PolicyParams& params() const { return params_; }
    void set_params(const PolicyParams& p) { params_ = p; }

private:
    PolicyParams params_;
};

// One full episode under `policy`; the decision log pairs every observation
// with the action taken, for imitation data and gradient replay.
struct EpisodeRecord {
    Trajectory trajectory;
    std::vector<std::pair<Observation, Action>> decisions;
};

EpisodeRecord run_episode(const SyntheticTask& task, Policy& policy, const EnvConfig& config,
                          Rng& rng);

}  // namespace earl
