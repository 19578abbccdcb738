#pragma once

#include "mecsim/channel.hpp"
#include "mecsim/compute_energy.hpp"
#include "mecsim/lyapunov.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/world.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace mecsim {

/// Destination of one task: execute on `uav`, or relay through `uav` to `vessel`.
struct Placement {
    std::size_t uav = 0;
    std::optional<std::size_t> vessel;

    bool relayed() const { return vessel.has_value(); }
    friend bool operator==(const Placement&, const Placement&) = default;
};

/// A feasible placement together with its position in the per-task action
/// lattice. The lattice is relative to the task's origin: UAVs are ranked by
/// distance from the MIoT, vessels by distance from the relay UAV, and
///   lattice = uav_rank * (1 + K) + (local ? 0 : 1 + vessel_rank).
struct Candidate {
    Placement placement;
    std::size_t lattice = 0;
    std::size_t uav_rank = 0;
    std::size_t vessel_rank = 0;
};

struct Decision {
    std::size_t task = 0;   // index into the slot's pending task list
    Placement placement;
};

/// Joint decision for one slot. Tasks without a decision are deferred, which
/// is only legal when they have no feasible placement.
struct Action {
    std::vector<Decision> decisions;
};

/// The binary decision matrices of one slot. Rows of o, s and q are tasks;
/// p is UAV x vessel.
struct Indicators {
    std::size_t tasks = 0, uavs = 0, vessels = 0;
    std::vector<std::uint8_t> o, s, q, p;

    std::uint8_t o_at(std::size_t i, std::size_t j) const { return o[i * uavs + j]; }
    std::uint8_t s_at(std::size_t i, std::size_t k) const { return s[i * vessels + k]; }
    std::uint8_t q_at(std::size_t i, std::size_t j) const { return q[i * uavs + j]; }
    std::uint8_t p_at(std::size_t j, std::size_t k) const { return p[j * vessels + k]; }
};

Indicators materialize(const Action& action, std::size_t tasks, std::size_t uavs,
                       std::size_t vessels);

struct Job {
    std::uint64_t task_id = 0;
    std::size_t origin = 0;
    double remaining_s = 0.0;
    double storage_bits = 0.0;   // bits held in UAV storage until completion
};

struct Completion {
    std::uint64_t task_id = 0;
    std::size_t origin = 0;
    bool on_uav = false;
    std::size_t node = 0;
    double released_bits = 0.0;
};

/// FIFO processor. Each slot it works for at most one slot length, spilling
/// leftover capacity into the next job.
class ProcessorQueue {
public:
    double backlog_s() const;
    bool empty() const { return jobs_.empty(); }
    std::size_t size() const { return jobs_.size(); }
    const std::deque<Job>& jobs() const { return jobs_; }
    double consumed_s() const { return consumed_s_; }

    void push(const Job& job) { jobs_.push_back(job); }
    std::vector<Job> advance(double budget_s);

private:
    std::deque<Job> jobs_;
    double consumed_s_ = 0.0;
};

/// The per-MIoT observation vector: last slot's time and energy plus the two
/// virtual queues.
struct State {
    std::vector<double> last_time;
    std::vector<double> last_energy;
    std::vector<double> v_time;
    std::vector<double> v_energy;

    explicit State(std::size_t miots = 0)
        : last_time(miots, 0.0), last_energy(miots, 0.0), v_time(miots, 0.0), v_energy(miots, 0.0) {}

    std::array<double, 4> components(std::size_t miot) const {
        return {last_time[miot], last_energy[miot], v_time[miot], v_energy[miot]};
    }
};

struct TaskRecord {
    Task task;
    Placement placement;
    TimeBreakdown time;
    EnergyBreakdown energy;
};

struct Violations {
    bool destination = false;   // not exactly one destination per placed task
    bool storage = false;
    bool antennas = false;
    bool binary = false;
    bool speed = false;
    std::string detail;

    bool any() const { return destination || storage || antennas || binary || speed; }
};

struct StepOutcome {
    int slot = 0;
    State next_state;
    double reward = 0.0;
    std::vector<double> penalty;          // drift-plus-penalty per MIoT (0 if unobserved)
    std::vector<std::uint8_t> observed;   // MIoT had at least one task placed
    std::vector<Ratios> ratios;
    std::vector<double> miot_time;        // T_i^a(t)
    std::vector<double> miot_energy;      // E_i^a(t)
    std::vector<TaskRecord> records;
    std::vector<Completion> completions;
    std::vector<Task> deferred;
    std::vector<double> uav_displacement;
    double platform_energy_j = 0.0;       // each UAV's hover and movement counted once
    Violations violations;
};

class SlotPlanner;

/// One episode's MDP. Value type: copies are independent simulations.
class Environment {
public:
    Environment(const ScenarioConfig& scenario, const ChannelParams& channel,
                const ConstraintBounds& bounds, WorldState world);

    /// Restores the initial world, zeroes queues and reseeds the task stream.
    void reset(std::uint64_t episode_seed);

    /// Spawns this slot's tasks (after any deferred ones). Idempotent per slot.
    const std::vector<Task>& begin_slot();

    /// Validates, applies the action, moves UAVs, updates the virtual queues,
    /// then advances the processor FIFOs by one slot.
    StepOutcome step(const Action& action);

    /// Processor progression between slots; also called from step().
    std::vector<Completion> advance_queues();

    bool done() const { return clock_.finished(); }
    const SimClock& clock() const { return clock_; }
    const WorldState& world() const { return world_; }
    const State& state() const { return state_; }
    const VirtualQueues& queues() const { return queues_; }
    const RunningAverages& averages() const { return averages_; }
    const std::vector<Task>& slot_tasks() const { return slot_tasks_; }
    const ScenarioConfig& scenario() const { return scenario_; }
    const ChannelParams& channel() const { return channel_; }
    const ConstraintBounds& bounds() const { return bounds_; }
    const ProcessorQueue& uav_queue(std::size_t j) const { return uav_cpu_[j]; }
    const ProcessorQueue& vessel_queue(std::size_t k) const { return vessel_cpu_[k]; }
    double hover_power_w(std::size_t j) const { return hover_w_[j]; }

    /// UAV indices ordered by 3-D distance from the MIoT (ties: lower index).
    const std::vector<std::size_t>& uav_order(std::size_t miot) const { return uav_order_[miot]; }
    /// Vessel indices ordered by 3-D distance from the UAV.
    const std::vector<std::size_t>& vessel_order(std::size_t uav) const { return vessel_order_[uav]; }

    std::size_t lattice_size() const { return world_.uavs.size() * (1 + world_.vessels.size()); }

    /// Storage bookkeeping identity and work-conservation check.
    /// Returns an empty string when consistent.
    std::string audit() const;

    SlotPlanner planner() const;

private:
    void compute_orders();

    ScenarioConfig scenario_;
    ChannelParams channel_;
    ConstraintBounds bounds_;
    WorldState initial_world_;
    WorldState world_;
    SimClock clock_;
    std::vector<double> hover_w_;
    std::vector<ProcessorQueue> uav_cpu_;
    std::vector<ProcessorQueue> vessel_cpu_;
    VirtualQueues queues_;
    RunningAverages averages_;
    State state_;
    Rng task_rng_{0};
    std::uint64_t next_task_id_ = 0;
    std::vector<Task> deferred_;
    std::vector<Task> slot_tasks_;
    bool slot_started_ = false;
    std::vector<std::vector<std::size_t>> uav_order_;
    std::vector<std::vector<std::size_t>> vessel_order_;
};

/// Incremental feasibility for one slot: one destination per task,
/// UAV storage, vessel antennas, binary indicators by
/// construction. Tasks are decided in order and each commit updates the masks.
class SlotPlanner {
public:
    explicit SlotPlanner(const Environment& env);

    std::size_t task_count() const { return env_->slot_tasks().size(); }
    const Task& task(std::size_t idx) const { return env_->slot_tasks()[idx]; }
    const Environment& env() const { return *env_; }

    /// Feasible placements for the task under the commits so far, sorted by
    /// lattice index.
    std::vector<Candidate> candidates(std::size_t task_idx) const;

    /// Throws InfeasibleActionError when the placement is not feasible.
    void commit(std::size_t task_idx, const Placement& placement);

    bool fits_storage(std::size_t uav, double bits) const;
    bool link_available(std::size_t uav, std::size_t vessel) const;

    double pending_storage_bits(std::size_t uav) const { return pending_bits_[uav]; }
    int uplink_load(std::size_t uav) const { return uplink_load_[uav]; }
    double uav_backlog_s(std::size_t uav) const;
    double vessel_backlog_s(std::size_t vessel) const;

    const Action& action() const { return action_; }

private:
    const Environment* env_;
    std::vector<double> pending_bits_;
    std::vector<double> pending_uav_work_s_;
    std::vector<double> pending_vessel_work_s_;
    std::vector<int> uplink_load_;
    std::vector<std::vector<std::size_t>> vessel_links_;
    std::vector<std::uint8_t> decided_;
    Action action_;
};

} // namespace mecsim
