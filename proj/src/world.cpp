#include "mecsim/world.hpp"

#include "mecsim/errors.hpp"

#include <cmath>
#include <string>

namespace mecsim {

double distance_3d(const Position3D& a, const Position3D& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dh = a.h - b.h;
    return std::sqrt(dx * dx + dy * dy + dh * dh);
}

double distance_horizontal(const Position3D& a, const Position3D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

namespace {

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) {
        throw ConfigError(std::string(field) + ": " + what);
    }
}

} // namespace

void ScenarioConfig::validate() const {
    require(miots >= 1, "scenario.I", "must be >= 1");
    require(uavs >= 1, "scenario.J", "must be >= 1");
    require(vessels >= 1, "scenario.K", "must be >= 1");
    require(region_side_m >= 0.0, "scenario.region_side", "must be >= 0");
    require(uav_height_m >= 0.0, "scenario.uav_height", "must be >= 0");
    require(ground_height_m >= 0.0, "scenario.ground_height", "must be >= 0");
    require(slot_len_s > 0.0, "scenario.slot_len", "must be > 0");
    require(horizon >= 1, "scenario.T", "must be >= 1");
    require(bits_lo > 0.0, "scenario.bits_lo", "must be > 0");
    require(bits_lo <= bits_hi, "scenario.bits_hi", "must be >= scenario.bits_lo");
    require(cycles_lo > 0.0, "scenario.cycles_lo", "must be > 0");
    require(cycles_lo <= cycles_hi, "scenario.cycles_hi", "must be >= scenario.cycles_lo");
    require(arrival_prob > 0.0 && arrival_prob <= 1.0, "scenario.arrival_prob", "must be in (0, 1]");
    require(miot_tx_power_w > 0.0, "scenario.miot_tx_power", "must be > 0");
    require(gravity_mps2 > 0.0, "scenario.gravity", "must be > 0");
    require(air_density_kgm3 > 0.0, "scenario.air_density", "must be > 0");
    require(uav.cpu_hz > 0.0, "uav.cpu_hz", "must be > 0");
    require(uav.storage_cap_bits > 0.0, "uav.storage_cap", "must be > 0");
    require(uav.max_speed_mps > 0.0, "uav.max_speed", "must be > 0");
    require(uav.mass_kg > 0.0, "uav.mass", "must be > 0");
    require(uav.prop_radius_m > 0.0, "uav.prop_radius", "must be > 0");
    require(uav.prop_count >= 1, "uav.prop_count", "must be >= 1");
    require(uav.max_power_w >= 0.0, "uav.max_power", "must be >= 0");
    require(uav.energy_per_megacycle_j >= 0.0, "uav.energy_per_megacycle", "must be >= 0");
    require(uav.tx_power_w > 0.0, "uav.tx_power", "must be > 0");
    require(vessel.cpu_hz > 0.0, "vessel.cpu_hz", "must be > 0");
    require(vessel.antenna_cap >= 1, "vessel.antenna_cap", "must be >= 1");
    require(vessel.energy_per_megacycle_j >= 0.0, "vessel.energy_per_megacycle", "must be >= 0");
}

WorldState generate_scenario(const ScenarioConfig& config, Rng& rng) {
    config.validate();
    WorldState world;
    world.region_side_m = config.region_side_m;
    const double side = config.region_side_m;
    auto draw = [&](double h) {
        Position3D p;
        p.x = rng.uniform(0.0, side);
        p.y = rng.uniform(0.0, side);
        p.h = h;
        return p;
    };

    world.vessels.reserve(static_cast<std::size_t>(config.vessels));
    for (int k = 0; k < config.vessels; ++k) {
        Vessel v;
        v.id = static_cast<std::size_t>(k);
        v.position = draw(config.ground_height_m);
        v.cpu_hz = config.vessel.cpu_hz;
        v.antenna_cap = config.vessel.antenna_cap;
        v.energy_per_cycle_j = config.vessel.energy_per_megacycle_j * 1e-6;
        world.vessels.push_back(v);
    }

    world.uavs.reserve(static_cast<std::size_t>(config.uavs));
    for (int j = 0; j < config.uavs; ++j) {
        Uav u;
        u.id = static_cast<std::size_t>(j);
        u.position = draw(config.uav_height_m);
        u.cpu_hz = config.uav.cpu_hz;
        u.storage_cap_bits = config.uav.storage_cap_bits;
        u.max_speed_mps = config.uav.max_speed_mps;
        u.mass_kg = config.uav.mass_kg;
        u.prop_radius_m = config.uav.prop_radius_m;
        u.prop_count = config.uav.prop_count;
        u.max_power_w = config.uav.max_power_w;
        u.energy_per_cycle_j = config.uav.energy_per_megacycle_j * 1e-6;
        u.tx_power_w = config.uav.tx_power_w;
        world.uavs.push_back(u);
    }

    world.miots.reserve(static_cast<std::size_t>(config.miots));
    for (int i = 0; i < config.miots; ++i) {
        MIoTDevice m;
        m.id = static_cast<std::size_t>(i);
        m.position = draw(config.ground_height_m);
        m.tx_power_w = config.miot_tx_power_w;
        world.miots.push_back(m);
    }
    return world;
}

std::vector<Task> spawn_tasks(const WorldState& world, const ScenarioConfig& config,
                              int slot, Rng& rng, std::uint64_t& next_task_id) {
    std::vector<Task> tasks;
    tasks.reserve(world.miots.size());
    const bool thinned = config.arrival_prob < 1.0;
    for (const auto& m : world.miots) {
        if (thinned && !rng.bernoulli(config.arrival_prob)) {
            continue;
        }
        Task t;
        t.origin = m.id;
        t.birth_slot = slot;
        t.input_bits = rng.uniform(config.bits_lo, config.bits_hi);
        t.cycles = rng.uniform(config.cycles_lo, config.cycles_hi);
        t.id = next_task_id++;
        tasks.push_back(t);
    }
    return tasks;
}

MoveResult move_uav(const Uav& uav, const Position3D& target, const SimClock& clock) {
    const Position3D& from = uav.position;
    const double dx = target.x - from.x;
    const double dy = target.y - from.y;
    const double gap = std::hypot(dx, dy);
    const double cap = clock.slot_len_s * uav.max_speed_mps;
    if (gap <= cap) {
        return {{target.x, target.y, from.h}, gap};
    }
    const double f = cap / gap;
    return {{from.x + f * dx, from.y + f * dy, from.h}, cap};
}

} // namespace mecsim
