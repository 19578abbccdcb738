#pragma once

#include "mecsim/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mecsim {

struct Position3D {
    double x = 0.0;
    double y = 0.0;
    double h = 0.0;

    friend bool operator==(const Position3D&, const Position3D&) = default;
};

double distance_3d(const Position3D& a, const Position3D& b);
double distance_horizontal(const Position3D& a, const Position3D& b);

struct MIoTDevice {
    std::size_t id = 0;
    Position3D position;
    double tx_power_w = 10.0;
};

struct Uav {
    std::size_t id = 0;
    Position3D position;
    double cpu_hz = 1e6;            // cycles per second
    double storage_used_bits = 0.0;
    double storage_cap_bits = 20e6;
    double max_speed_mps = 12.0;
    double mass_kg = 2.0;
    double prop_radius_m = 0.25;
    int prop_count = 4;
    double max_power_w = 150.0;     // propulsion power at max speed
    double energy_per_cycle_j = 1.87e-6;
    double tx_power_w = 10.0;
};

struct Vessel {
    std::size_t id = 0;
    Position3D position;
    double cpu_hz = 1e9;
    int antenna_cap = 5;
    double energy_per_cycle_j = 1.87e-6;
};

struct Task {
    std::size_t origin = 0;      // MIoT index
    int birth_slot = 1;
    double input_bits = 0.0;
    double cycles = 0.0;
    std::uint64_t id = 0;        // unique within an episode
};

struct SimClock {
    int slot = 1;                // 1-based
    double slot_len_s = 1.0;
    int horizon = 100;

    bool finished() const { return slot > horizon; }
};

struct UavParams {
    double cpu_hz = 1e6;
    double storage_cap_bits = 20e6;
    double max_speed_mps = 12.0;
    double mass_kg = 2.0;
    double prop_radius_m = 0.25;
    int prop_count = 4;
    double max_power_w = 150.0;
    double energy_per_megacycle_j = 1.87;
    double tx_power_w = 10.0;
};

struct VesselParams {
    double cpu_hz = 1e9;
    int antenna_cap = 5;
    double energy_per_megacycle_j = 1.87;
};

struct ScenarioConfig {
    int miots = 30;              // I
    int uavs = 10;               // J
    int vessels = 3;             // K
    double region_side_m = 5000.0;
    double uav_height_m = 100.0;
    double ground_height_m = 0.0;
    double slot_len_s = 1.0;
    int horizon = 100;
    double bits_lo = 2.4e6;
    double bits_hi = 2.6e6;
    double cycles_lo = 2.4e6;
    double cycles_hi = 3.6e6;
    double arrival_prob = 1.0;
    double miot_tx_power_w = 10.0;
    double gravity_mps2 = 9.8;
    double air_density_kgm3 = 1.225;
    UavParams uav;
    VesselParams vessel;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the first invalid field (config-file key).
    void validate() const;
};

struct WorldState {
    std::vector<MIoTDevice> miots;
    std::vector<Uav> uavs;
    std::vector<Vessel> vessels;
    double region_side_m = 0.0;
};

/// Uniform placement over the square region. Vessels and UAVs are drawn first,
/// then MIoTs, so worlds that differ only in the MIoT count share their
/// infrastructure layout and MIoT prefix.
WorldState generate_scenario(const ScenarioConfig& config, Rng& rng);

/// One task per MIoT per slot, thinned by arrival_prob. Draw order per MIoT:
/// arrival (only when arrival_prob < 1), input bits, cycles.
std::vector<Task> spawn_tasks(const WorldState& world, const ScenarioConfig& config,
                              int slot, Rng& rng, std::uint64_t& next_task_id);

struct MoveResult {
    Position3D position;
    double distance_m = 0.0;
};

/// Moves toward target in the horizontal plane, at most slot_len * max_speed.
MoveResult move_uav(const Uav& uav, const Position3D& target, const SimClock& clock);

} // namespace mecsim
