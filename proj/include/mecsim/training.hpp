#pragma once

#include "mecsim/agents.hpp"
#include "mecsim/environment.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace mecsim {

/// Independent seed streams derived from one run seed.
enum class Stream : std::uint64_t {
    scenario = 1,
    training = 2,
    calibration = 3,
    evaluation = 4,
    exploration = 5,
    weights = 6,
    baseline = 7,
};

inline std::uint64_t stream_seed(std::uint64_t seed, Stream s, std::uint64_t index = 0) {
    return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(s)), index);
}

/// Episode aggregates. "slot" quantities are per-slot sums over MIoTs
/// averaged over the episode; "task" quantities are per-task means.
struct EpisodeMetrics {
    int episode = 0;
    bool training = false;
    bool aborted = false;
    double mean_slot_time_s = 0.0;
    double mean_slot_energy_j = 0.0;
    double mean_task_time_s = 0.0;
    double mean_task_energy_j = 0.0;
    double mean_cost = 0.0;           // weight_energy * energy + weight_time * time, per slot
    double norm_time = 1.0;
    double norm_energy = 1.0;
    double time_ratio = 0.0;          // MIoT mean of the time-averaged T/T-bar
    double energy_ratio = 0.0;
    double final_vt_mean = 0.0;
    double final_vt_max = 0.0;
    double final_ve_mean = 0.0;
    double final_ve_max = 0.0;
    double platform_energy_j = 0.0;   // per slot, shared UAV costs counted once
    double penalty_sum = 0.0;         // sum of drift-plus-penalty over the episode
    long tasks = 0;
    long deferred = 0;
};

using SlotSink = std::function<void(const StepOutcome&)>;

/// Runs one episode from reset(episode_seed) to the horizon.
EpisodeMetrics run_episode(Environment& env, Controller& controller, std::uint64_t episode_seed,
                           const SlotSink& sink = {});

/// Fills norm_time / norm_energy relative to `reference`.
void normalize(std::vector<EpisodeMetrics>& series, const EpisodeMetrics& reference);

struct TrainResult {
    Policy policy;
    std::vector<EpisodeMetrics> episodes;
};

/// The virtual-queue Q-learning loop: epochs x horizon slots of epsilon-greedy
/// selection, environment step, per-MIoT Q update. Tabular agents first
/// calibrate their state bins on random-policy episodes. An epoch whose loss
/// goes non-finite is abandoned and reported as aborted.
TrainResult train_vqq(const Environment& prototype, AgentKind kind, const AgentConfig& cfg,
                      std::uint64_t seed, const SlotSink& sink = {});

/// Frozen, epsilon = 0 controller for a trained policy.
std::unique_ptr<Controller> make_policy_controller(const Policy& policy, const AgentConfig& cfg,
                                                   std::uint64_t seed);

/// Controller for a baseline kind (greedy or random).
std::unique_ptr<Controller> make_baseline_controller(AgentKind kind, std::uint64_t seed);

/// Evaluation episodes use the evaluation stream, shared by every agent.
std::vector<EpisodeMetrics> evaluate(const Environment& prototype, Controller& controller,
                                     int episodes, std::uint64_t seed);

} // namespace mecsim
