#pragma once

#include "mecsim/config.hpp"
#include "mecsim/training.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mecsim {

struct MetricRecord {
    AgentKind agent = AgentKind::greedy;
    int miots = 0;
    std::uint64_t seed = 0;
    bool training = false;
    EpisodeMetrics metrics;
};

/// One (agent, I, seed) run.
struct CellResult {
    AgentKind agent = AgentKind::greedy;
    int miots = 0;
    std::uint64_t seed = 0;
    std::vector<EpisodeMetrics> train;
    std::vector<EpisodeMetrics> eval;
    std::optional<Policy> policy;
    double wall_s = 0.0;
    std::string error;   // non-empty when the cell failed

    std::vector<MetricRecord> records() const;
};

/// Evaluation averages per (agent, I): mean and sample stddev across seeds
/// of each seed's evaluation mean.
struct SummaryRow {
    AgentKind agent = AgentKind::greedy;
    int miots = 0;
    int seeds = 0;
    double time_mean = 0.0, time_std = 0.0;
    double energy_mean = 0.0, energy_std = 0.0;
    double cost_mean = 0.0, cost_std = 0.0;
    double task_time_mean = 0.0, task_energy_mean = 0.0;
    double time_ratio_mean = 0.0, energy_ratio_mean = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<MetricRecord>& records);

std::string metrics_csv(const std::vector<MetricRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);

struct ExperimentResult {
    std::vector<CellResult> cells;
    std::vector<SummaryRow> summary;
};

class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Builds the environment for one cell: scenario.I replaced by `miots`.
Environment make_environment(const ExperimentConfig& cfg, int miots, std::uint64_t seed);

/// Runs one cell to completion; exceptions propagate.
CellResult run_cell(const ExperimentConfig& cfg, AgentKind agent, int miots, std::uint64_t seed);

/// Runs every (seed, agent, I) cell on up to `threads` workers (0 = use
/// MEC_SIM_THREADS or the hardware count). With write_files, outputs go to
/// cfg.output_dir: config.resolved, metrics.csv, summary.csv, timings.csv,
/// and per cell <agent>_I<n>_seed<s>/ with series.csv and policy.txt.
/// Metrics files depend only on the config. If any cell fails, the finished
/// cells are still written and ExperimentError is thrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true, int threads = 0);

int default_thread_count();

} // namespace mecsim
