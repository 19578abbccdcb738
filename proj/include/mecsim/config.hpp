#pragma once

#include "mecsim/agents.hpp"
#include "mecsim/channel.hpp"
#include "mecsim/lyapunov.hpp"
#include "mecsim/world.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mecsim {

/// Everything a run needs. Files are line-oriented `section.key = value`
/// with `#` comments; absent keys keep their defaults.
struct ExperimentConfig {
    ScenarioConfig scenario;
    ChannelParams channel;
    double noise_dbm = -114.0;   // channel.noise_power_w is derived from this
    ConstraintBounds bounds;
    AgentConfig agent;

    std::vector<AgentKind> agents{AgentKind::vqq, AgentKind::greedy, AgentKind::random};
    std::vector<int> sweep;                 // MIoT counts; empty means scenario.I only
    std::vector<std::uint64_t> seeds{1};
    int eval_episodes = 3;
    std::string output_dir = "runs";

    /// Derives dependent fields and validates every section.
    void resolve();
    std::vector<int> miot_counts() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Complete, re-parseable listing of every key.
std::string emit_config(const ExperimentConfig& cfg);
/// FNV-1a over emit_config.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// "1..10" or "1,2,5".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

} // namespace mecsim
