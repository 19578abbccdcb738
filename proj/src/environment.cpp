#include "mecsim/environment.hpp"

#include "mecsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mecsim {

Indicators materialize(const Action& action, std::size_t tasks, std::size_t uavs,
                       std::size_t vessels) {
    Indicators ind;
    ind.tasks = tasks;
    ind.uavs = uavs;
    ind.vessels = vessels;
    ind.o.assign(tasks * uavs, 0);
    ind.s.assign(tasks * vessels, 0);
    ind.q.assign(tasks * uavs, 0);
    ind.p.assign(uavs * vessels, 0);
    for (const auto& d : action.decisions) {
        const std::size_t i = d.task;
        const std::size_t j = d.placement.uav;
        if (i >= tasks || j >= uavs) {
            throw InfeasibleActionError("materialize: decision index out of range");
        }
        // Counts rather than flags so that duplicates surface as non-binary.
        ind.q[i * uavs + j] += 1;
        if (d.placement.vessel) {
            const std::size_t k = *d.placement.vessel;
            if (k >= vessels) {
                throw InfeasibleActionError("materialize: vessel index out of range");
            }
            ind.s[i * vessels + k] += 1;
            ind.p[j * vessels + k] = 1;
        } else {
            ind.o[i * uavs + j] += 1;
        }
    }
    return ind;
}

double ProcessorQueue::backlog_s() const {
    double total = 0.0;
    for (const auto& j : jobs_) total += j.remaining_s;
    return total;
}

std::vector<Job> ProcessorQueue::advance(double budget_s) {
    std::vector<Job> done;
    while (!jobs_.empty() && budget_s > 0.0) {
        Job& head = jobs_.front();
        if (head.remaining_s <= budget_s) {
            budget_s -= head.remaining_s;
            consumed_s_ += head.remaining_s;
            done.push_back(head);
            jobs_.pop_front();
        } else {
            head.remaining_s -= budget_s;
            consumed_s_ += budget_s;
            budget_s = 0.0;
        }
    }
    return done;
}

Environment::Environment(const ScenarioConfig& scenario, const ChannelParams& channel,
                         const ConstraintBounds& bounds, WorldState world)
    : scenario_(scenario), channel_(channel), bounds_(bounds), initial_world_(std::move(world)) {
    scenario_.validate();
    channel_.validate();
    bounds_.validate();
    for (const auto& u : initial_world_.uavs) {
        hover_w_.push_back(hover_power(u, scenario_.gravity_mps2, scenario_.air_density_kgm3));
    }
    reset(scenario_.seed);
}

void Environment::reset(std::uint64_t episode_seed) {
    world_ = initial_world_;
    for (auto& u : world_.uavs) u.storage_used_bits = 0.0;
    clock_ = SimClock{1, scenario_.slot_len_s, scenario_.horizon};
    const std::size_t I = world_.miots.size();
    uav_cpu_.assign(world_.uavs.size(), ProcessorQueue{});
    vessel_cpu_.assign(world_.vessels.size(), ProcessorQueue{});
    queues_ = VirtualQueues(I);
    averages_ = RunningAverages(I);
    state_ = State(I);
    task_rng_ = Rng(episode_seed);
    next_task_id_ = 0;
    deferred_.clear();
    slot_tasks_.clear();
    slot_started_ = false;
}

void Environment::compute_orders() {
    const std::size_t J = world_.uavs.size();
    const std::size_t K = world_.vessels.size();
    uav_order_.assign(world_.miots.size(), {});
    for (const auto& m : world_.miots) {
        auto& order = uav_order_[m.id];
        order.resize(J);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> d(J);
        for (std::size_t j = 0; j < J; ++j) d[j] = distance_3d(m.position, world_.uavs[j].position);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    }
    vessel_order_.assign(J, {});
    for (std::size_t j = 0; j < J; ++j) {
        auto& order = vessel_order_[j];
        order.resize(K);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> d(K);
        for (std::size_t k = 0; k < K; ++k) {
            d[k] = distance_3d(world_.uavs[j].position, world_.vessels[k].position);
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    }
}

const std::vector<Task>& Environment::begin_slot() {
    if (slot_started_) {
        return slot_tasks_;
    }
    if (done()) {
        throw InvariantViolation("begin_slot: episode already finished");
    }
    slot_tasks_ = deferred_;
    deferred_.clear();
    auto fresh = spawn_tasks(world_, scenario_, clock_.slot, task_rng_, next_task_id_);
    slot_tasks_.insert(slot_tasks_.end(), fresh.begin(), fresh.end());
    compute_orders();
    slot_started_ = true;
    return slot_tasks_;
}

SlotPlanner Environment::planner() const { return SlotPlanner(*this); }

std::vector<Completion> Environment::advance_queues() {
    std::vector<Completion> out;
    for (std::size_t j = 0; j < uav_cpu_.size(); ++j) {
        for (const Job& job : uav_cpu_[j].advance(clock_.slot_len_s)) {
            world_.uavs[j].storage_used_bits -= job.storage_bits;
            if (uav_cpu_[j].empty()) world_.uavs[j].storage_used_bits = 0.0;
            out.push_back({job.task_id, job.origin, true, j, job.storage_bits});
        }
    }
    for (std::size_t k = 0; k < vessel_cpu_.size(); ++k) {
        for (const Job& job : vessel_cpu_[k].advance(clock_.slot_len_s)) {
            out.push_back({job.task_id, job.origin, false, k, 0.0});
        }
    }
    return out;
}

std::string Environment::audit() const {
    std::ostringstream err;
    for (std::size_t j = 0; j < world_.uavs.size(); ++j) {
        double resident = 0.0;
        for (const auto& job : uav_cpu_[j].jobs()) resident += job.storage_bits;
        const double used = world_.uavs[j].storage_used_bits;
        if (std::abs(resident - used) > 1e-6 * std::max(1.0, resident)) {
            err << "uav " << j << ": storage " << used << " != resident " << resident << "; ";
        }
        if (used < -1e-6 || used > world_.uavs[j].storage_cap_bits * (1.0 + 1e-12)) {
            err << "uav " << j << ": storage out of range; ";
        }
    }
    const double budget = static_cast<double>(clock_.slot - 1) * clock_.slot_len_s * (1.0 + 1e-12);
    for (std::size_t j = 0; j < uav_cpu_.size(); ++j) {
        if (uav_cpu_[j].consumed_s() > budget) err << "uav " << j << ": work over budget; ";
    }
    for (std::size_t k = 0; k < vessel_cpu_.size(); ++k) {
        if (vessel_cpu_[k].consumed_s() > budget) err << "vessel " << k << ": work over budget; ";
    }
    for (std::size_t i = 0; i < queues_.v_time.size(); ++i) {
        if (queues_.v_time[i] < 0.0 || queues_.v_energy[i] < 0.0) {
            err << "miot " << i << ": negative virtual queue; ";
        }
    }
    return err.str();
}

StepOutcome Environment::step(const Action& action) {
    begin_slot();
    const std::size_t n_tasks = slot_tasks_.size();
    const std::size_t I = world_.miots.size();
    const std::size_t J = world_.uavs.size();
    const std::size_t K = world_.vessels.size();

    StepOutcome out;
    out.slot = clock_.slot;

    // Replay the decisions through a planner in task order; anything the
    // planner would not have offered is rejected.
    {
        Violations v;
        const Indicators ind = materialize(action, n_tasks, J, K);
        for (std::size_t i = 0; i < n_tasks && !v.any(); ++i) {
            int dest = 0;
            for (std::size_t j = 0; j < J; ++j) {
                if (ind.o_at(i, j) > 1 || ind.q_at(i, j) > 1) v.binary = true;
                dest += ind.o_at(i, j);
            }
            for (std::size_t k = 0; k < K; ++k) {
                if (ind.s_at(i, k) > 1) v.binary = true;
                dest += ind.s_at(i, k);
            }
            if (dest > 1) v.destination = true;
        }
        std::vector<const Decision*> by_task(n_tasks, nullptr);
        for (const auto& d : action.decisions) {
            if (d.task < n_tasks) by_task[d.task] = &d;
        }
        SlotPlanner replay(*this);
        for (std::size_t i = 0; i < n_tasks && !v.any(); ++i) {
            const auto cands = replay.candidates(i);
            if (!by_task[i]) {
                if (!cands.empty()) {
                    v.destination = true;
                    v.detail = "task " + std::to_string(i) + " left unplaced while feasible";
                }
                continue;
            }
            const Placement& pl = by_task[i]->placement;
            const bool offered = std::any_of(cands.begin(), cands.end(),
                                             [&](const Candidate& c) { return c.placement == pl; });
            if (!offered) {
                if (!pl.relayed()) {
                    v.storage = true;
                } else {
                    v.antennas = true;
                }
                v.detail = "task " + std::to_string(i) + " placement not feasible";
                break;
            }
            replay.commit(i, pl);
        }
        if (v.any()) {
            throw InfeasibleActionError("step: rejected action: " +
                                        (v.detail.empty() ? std::string("bad indicators") : v.detail));
        }
    }

    std::vector<const Decision*> ordered(n_tasks, nullptr);
    for (const auto& d : action.decisions) ordered[d.task] = &d;

    std::vector<int> uplink_n(J, 0);
    std::vector<int> relay_n(J * K, 0);
    std::vector<std::vector<std::size_t>> connected(J);
    for (std::size_t i = 0; i < n_tasks; ++i) {
        if (!ordered[i]) continue;
        const Placement& pl = ordered[i]->placement;
        ++uplink_n[pl.uav];
        connected[pl.uav].push_back(slot_tasks_[i].origin);
        if (pl.vessel) ++relay_n[pl.uav * K + *pl.vessel];
    }

    // Timing and FIFO admission, in task order, against slot-start positions.
    std::vector<TimeBreakdown> times(n_tasks);
    std::vector<double> relay_rate(n_tasks, 0.0);
    for (std::size_t i = 0; i < n_tasks; ++i) {
        if (!ordered[i]) continue;
        const Task& task = slot_tasks_[i];
        const Placement& pl = ordered[i]->placement;
        const Uav& uav = world_.uavs[pl.uav];
        double up = link_rate(world_.miots[task.origin], uav, channel_);
        if (channel_.share_bandwidth) up /= uplink_n[pl.uav];
        const double waited = (clock_.slot - task.birth_slot) * clock_.slot_len_s;
        if (!pl.relayed()) {
            const double queue = uav_cpu_[pl.uav].backlog_s() + waited;
            times[i] = uav_exec_time(task, uav, up, queue);
            uav_cpu_[pl.uav].push({task.id, task.origin, times[i].exec_s, task.input_bits});
            world_.uavs[pl.uav].storage_used_bits += task.input_bits;
        } else {
            const std::size_t k = *pl.vessel;
            double relay = link_rate(uav, world_.vessels[k], channel_);
            if (channel_.share_bandwidth) relay /= relay_n[pl.uav * K + k];
            const double queue = vessel_cpu_[k].backlog_s() + waited;
            times[i] = vessel_exec_time(task, world_.vessels[k], up, relay, queue);
            relay_rate[i] = relay;
            vessel_cpu_[k].push({task.id, task.origin, times[i].exec_s, 0.0});
        }
    }

    // UAVs head for the centroid of the MIoTs they served this slot.
    out.uav_displacement.assign(J, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
        Uav& uav = world_.uavs[j];
        if (!connected[j].empty()) {
            Position3D target{0.0, 0.0, uav.position.h};
            for (std::size_t m : connected[j]) {
                target.x += world_.miots[m].position.x;
                target.y += world_.miots[m].position.y;
            }
            target.x /= static_cast<double>(connected[j].size());
            target.y /= static_cast<double>(connected[j].size());
            const MoveResult mv = move_uav(uav, target, clock_);
            uav.position = mv.position;
            out.uav_displacement[j] = mv.distance_m;
        }
        const double hover = hover_w_[j] * clock_.slot_len_s;
        double move = 0.0;
        if (out.uav_displacement[j] > 0.0) {
            const double speed = std::min(out.uav_displacement[j] / clock_.slot_len_s, uav.max_speed_mps);
            move = trajectory_power(uav, speed, hover_w_[j]) * clock_.slot_len_s;
        }
        out.platform_energy_j += hover + move;
    }

    out.miot_time.assign(I, 0.0);
    out.miot_energy.assign(I, 0.0);
    out.observed.assign(I, 0);
    for (std::size_t i = 0; i < n_tasks; ++i) {
        if (!ordered[i]) {
            out.deferred.push_back(slot_tasks_[i]);
            continue;
        }
        const Task& task = slot_tasks_[i];
        const Placement& pl = ordered[i]->placement;
        std::optional<RelayLeg> relay;
        if (pl.relayed()) {
            relay = RelayLeg{world_.vessels[*pl.vessel].energy_per_cycle_j, relay_rate[i]};
        }
        const EnergyBreakdown e = total_task_energy(task, world_.uavs[pl.uav], out.uav_displacement[pl.uav],
                                                    clock_.slot_len_s, hover_w_[pl.uav], relay);
        out.platform_energy_j += e.compute_j + e.relay_tx_j;
        out.records.push_back({task, pl, times[i], e});
        out.miot_time[task.origin] += times[i].total_s;
        out.miot_energy[task.origin] += e.total_j;
        out.observed[task.origin] = 1;
    }

    out.penalty.assign(I, 0.0);
    out.ratios.assign(I, Ratios{});
    for (std::size_t m = 0; m < I; ++m) {
        if (!out.observed[m]) continue;
        const Ratios r = observation_ratios(averages_, m, out.miot_time[m], out.miot_energy[m]);
        out.ratios[m] = r;
        out.penalty[m] = drift_penalty(queues_, m, r.time, r.energy, bounds_);
        out.reward += reward(out.penalty[m]);
        queues_ = update_queues(std::move(queues_), m, r.time, r.energy, bounds_);
        averages_ = update_averages(std::move(averages_), m, out.miot_time[m], out.miot_energy[m]);
        state_.last_time[m] = out.miot_time[m];
        state_.last_energy[m] = out.miot_energy[m];
    }
    state_.v_time = queues_.v_time;
    state_.v_energy = queues_.v_energy;

    out.completions = advance_queues();
    deferred_ = out.deferred;
    out.next_state = state_;
    slot_tasks_.clear();
    slot_started_ = false;
    ++clock_.slot;
    return out;
}

SlotPlanner::SlotPlanner(const Environment& env)
    : env_(&env),
      pending_bits_(env.world().uavs.size(), 0.0),
      pending_uav_work_s_(env.world().uavs.size(), 0.0),
      pending_vessel_work_s_(env.world().vessels.size(), 0.0),
      uplink_load_(env.world().uavs.size(), 0),
      vessel_links_(env.world().vessels.size()),
      decided_(env.slot_tasks().size(), 0) {}

bool SlotPlanner::fits_storage(std::size_t uav, double bits) const {
    const Uav& u = env_->world().uavs[uav];
    return u.storage_used_bits + pending_bits_[uav] + bits <= u.storage_cap_bits;
}

bool SlotPlanner::link_available(std::size_t uav, std::size_t vessel) const {
    const auto& links = vessel_links_[vessel];
    if (std::find(links.begin(), links.end(), uav) != links.end()) return true;
    return static_cast<int>(links.size()) < env_->world().vessels[vessel].antenna_cap;
}

double SlotPlanner::uav_backlog_s(std::size_t uav) const {
    return env_->uav_queue(uav).backlog_s() + pending_uav_work_s_[uav];
}

double SlotPlanner::vessel_backlog_s(std::size_t vessel) const {
    return env_->vessel_queue(vessel).backlog_s() + pending_vessel_work_s_[vessel];
}

std::vector<Candidate> SlotPlanner::candidates(std::size_t task_idx) const {
    const Task& t = task(task_idx);
    const auto& uavs = env_->uav_order(t.origin);
    const std::size_t K = env_->world().vessels.size();
    std::vector<Candidate> out;
    out.reserve(uavs.size() * (1 + K));
    for (std::size_t r = 0; r < uavs.size(); ++r) {
        const std::size_t j = uavs[r];
        if (fits_storage(j, t.input_bits)) {
            out.push_back({{j, std::nullopt}, r * (1 + K), r, 0});
        }
        const auto& vessels = env_->vessel_order(j);
        for (std::size_t vr = 0; vr < vessels.size(); ++vr) {
            if (link_available(j, vessels[vr])) {
                out.push_back({{j, vessels[vr]}, r * (1 + K) + 1 + vr, r, vr});
            }
        }
    }
    return out;
}

void SlotPlanner::commit(std::size_t task_idx, const Placement& placement) {
    if (task_idx >= task_count() || decided_[task_idx]) {
        throw InfeasibleActionError("commit: task already decided or out of range");
    }
    const Task& t = task(task_idx);
    const std::size_t j = placement.uav;
    if (j >= env_->world().uavs.size()) throw InfeasibleActionError("commit: UAV out of range");
    if (!placement.vessel) {
        if (!fits_storage(j, t.input_bits)) {
            throw InfeasibleActionError("commit: UAV storage exceeded");
        }
        pending_bits_[j] += t.input_bits;
        pending_uav_work_s_[j] += t.cycles / env_->world().uavs[j].cpu_hz;
    } else {
        const std::size_t k = *placement.vessel;
        if (k >= env_->world().vessels.size()) throw InfeasibleActionError("commit: vessel out of range");
        if (!link_available(j, k)) throw InfeasibleActionError("commit: vessel antennas exhausted");
        auto& links = vessel_links_[k];
        if (std::find(links.begin(), links.end(), j) == links.end()) links.push_back(j);
        pending_vessel_work_s_[k] += t.cycles / env_->world().vessels[k].cpu_hz;
    }
    ++uplink_load_[j];
    decided_[task_idx] = 1;
    action_.decisions.push_back({task_idx, placement});
}

} // namespace mecsim
