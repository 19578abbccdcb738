#pragma once

#include "mecsim/world.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace mecsim {

struct TimeBreakdown {
    double exec_s = 0.0;
    double tx_miot_uav_s = 0.0;
    double tx_uav_vessel_s = 0.0;   // zero on the UAV-local branch
    double queue_s = 0.0;
    double total_s = 0.0;
};

struct EnergyBreakdown {
    double move_j = 0.0;
    double hover_j = 0.0;
    double compute_j = 0.0;
    double relay_tx_j = 0.0;
    double total_j = 0.0;
};

/// Execution on the collecting UAV: d/f + l/R + queue.
TimeBreakdown uav_exec_time(const Task& task, const Uav& uav, double rate_miot_uav,
                            double queue_s);

/// Relay through a UAV to a vessel: d/f_k + l/R_ij + l/R_jk + queue.
TimeBreakdown vessel_exec_time(const Task& task, const Vessel& vessel, double rate_miot_uav,
                               double rate_uav_vessel, double queue_s);

/// Indicator-weighted total for one task row. Exactly one of o_row / s_row
/// must be set, otherwise InvariantViolation.
double total_task_time(std::span<const std::uint8_t> o_row, std::span<const std::uint8_t> s_row,
                       std::span<const double> uav_totals, std::span<const double> vessel_totals);

/// Propulsion power above hover at the given speed; linear up to max speed.
double trajectory_power(const Uav& uav, double speed_mps, double hover_w);

/// Rotor-momentum hover power sqrt(g^3 / (2 pi rho)) * sqrt(M^3 / (r^2 kappa)).
double hover_power(const Uav& uav, double gravity_mps2, double air_density_kgm3);

double compute_energy(const Task& task, double energy_per_cycle_j);

struct RelayLeg {
    double vessel_energy_per_cycle_j = 0.0;
    double rate_uav_vessel = 0.0;
};

/// Per-task energy: movement and hover of the serving UAV, compute on the
/// executing node, and UAV transmit energy on the relay branch. A UAV that did
/// not move contributes zero movement energy.
EnergyBreakdown total_task_energy(const Task& task, const Uav& serving_uav, double displacement_m,
                                  double slot_len_s, double hover_w,
                                  const std::optional<RelayLeg>& relay);

} // namespace mecsim
