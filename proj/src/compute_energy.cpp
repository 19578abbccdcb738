#include "mecsim/compute_energy.hpp"

#include "mecsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mecsim {

TimeBreakdown uav_exec_time(const Task& task, const Uav& uav, double rate_miot_uav,
                            double queue_s) {
    if (!(rate_miot_uav > 0.0)) {
        throw InfeasibleLinkError("uav_exec_time: MIoT-UAV rate must be positive");
    }
    TimeBreakdown t;
    t.exec_s = task.cycles / uav.cpu_hz;
    t.tx_miot_uav_s = task.input_bits / rate_miot_uav;
    t.queue_s = queue_s;
    t.total_s = t.exec_s + t.tx_miot_uav_s + t.tx_uav_vessel_s + t.queue_s;
    return t;
}

TimeBreakdown vessel_exec_time(const Task& task, const Vessel& vessel, double rate_miot_uav,
                               double rate_uav_vessel, double queue_s) {
    if (!(rate_miot_uav > 0.0) || !(rate_uav_vessel > 0.0)) {
        throw InfeasibleLinkError("vessel_exec_time: both hop rates must be positive");
    }
    TimeBreakdown t;
    t.exec_s = task.cycles / vessel.cpu_hz;
    t.tx_miot_uav_s = task.input_bits / rate_miot_uav;
    t.tx_uav_vessel_s = task.input_bits / rate_uav_vessel;
    t.queue_s = queue_s;
    t.total_s = t.exec_s + t.tx_miot_uav_s + t.tx_uav_vessel_s + t.queue_s;
    return t;
}

double total_task_time(std::span<const std::uint8_t> o_row, std::span<const std::uint8_t> s_row,
                       std::span<const double> uav_totals, std::span<const double> vessel_totals) {
    if (o_row.size() != uav_totals.size() || s_row.size() != vessel_totals.size()) {
        throw InvariantViolation("total_task_time: row/candidate size mismatch");
    }
    int set = 0;
    double total = 0.0;
    for (std::size_t j = 0; j < o_row.size(); ++j) {
        if (o_row[j] > 1) throw InvariantViolation("total_task_time: non-binary indicator");
        if (o_row[j]) {
            ++set;
            total += uav_totals[j];
        }
    }
    for (std::size_t k = 0; k < s_row.size(); ++k) {
        if (s_row[k] > 1) throw InvariantViolation("total_task_time: non-binary indicator");
        if (s_row[k]) {
            ++set;
            total += vessel_totals[k];
        }
    }
    if (set != 1) {
        throw InvariantViolation("total_task_time: task row must select exactly one destination");
    }
    return total;
}

double trajectory_power(const Uav& uav, double speed_mps, double hover_w) {
    if (speed_mps < 0.0 || speed_mps > uav.max_speed_mps) {
        throw DomainError("trajectory_power: speed outside [0, max_speed]");
    }
    return speed_mps / uav.max_speed_mps * (uav.max_power_w - hover_w);
}

double hover_power(const Uav& uav, double gravity_mps2, double air_density_kgm3) {
    if (!(uav.mass_kg > 0.0) || !(uav.prop_radius_m > 0.0) || uav.prop_count <= 0 ||
        !(gravity_mps2 > 0.0) || !(air_density_kgm3 > 0.0)) {
        throw ConfigError("hover_power: mass, propeller radius/count, gravity and air density must be positive");
    }
    const double c = std::sqrt(gravity_mps2 * gravity_mps2 * gravity_mps2 /
                               (2.0 * std::numbers::pi * air_density_kgm3));
    const double m3 = uav.mass_kg * uav.mass_kg * uav.mass_kg;
    return c * std::sqrt(m3 / (uav.prop_radius_m * uav.prop_radius_m * uav.prop_count));
}

double compute_energy(const Task& task, double energy_per_cycle_j) {
    return task.cycles * energy_per_cycle_j;
}

EnergyBreakdown total_task_energy(const Task& task, const Uav& serving_uav, double displacement_m,
                                  double slot_len_s, double hover_w,
                                  const std::optional<RelayLeg>& relay) {
    EnergyBreakdown e;
    if (displacement_m > 0.0) {
        // Speed over the slot is displacement / slot length; the flight lasts
        // displacement / speed = one slot.
        const double speed = std::min(displacement_m / slot_len_s, serving_uav.max_speed_mps);
        e.move_j = trajectory_power(serving_uav, speed, hover_w) * (displacement_m / speed);
    }
    e.hover_j = hover_w * slot_len_s;
    if (relay) {
        if (!(relay->rate_uav_vessel > 0.0)) {
            throw InfeasibleLinkError("total_task_energy: relay rate must be positive");
        }
        e.compute_j = compute_energy(task, relay->vessel_energy_per_cycle_j);
        e.relay_tx_j = serving_uav.tx_power_w * task.input_bits / relay->rate_uav_vessel;
    } else {
        e.compute_j = compute_energy(task, serving_uav.energy_per_cycle_j);
    }
    e.total_j = e.move_j + e.hover_j + e.compute_j + e.relay_tx_j;
    return e;
}

} // namespace mecsim
