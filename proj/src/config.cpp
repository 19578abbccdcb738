#include "mecsim/config.hpp"

#include "mecsim/errors.hpp"

#include <charconv>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace mecsim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

std::string fmt_double(double v) {
    // Shortest text that parses back to the same double.
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double to_double(const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("not a number: '" + s + "'");
    return v;
}

long long to_int(const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("not an integer: '" + s + "'");
    return v;
}

int to_int32(const std::string& s) {
    const long long v = to_int(s);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError("integer out of range: '" + s + "'");
    }
    return static_cast<int>(v);
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("not a boolean: '" + s + "'");
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

struct Field {
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class Acc>
Field real_field(std::string key, Acc acc) {
    return {std::move(key), [acc](const ExperimentConfig& c) { return fmt_double(acc(c)); },
            [acc](ExperimentConfig& c, const std::string& v) { acc(c) = to_double(v); }};
}

template <class Acc>
Field int_field(std::string key, Acc acc) {
    return {std::move(key), [acc](const ExperimentConfig& c) { return std::to_string(acc(c)); },
            [acc](ExperimentConfig& c, const std::string& v) { acc(c) = to_int32(v); }};
}

template <class Acc>
Field bool_field(std::string key, Acc acc) {
    return {std::move(key),
            [acc](const ExperimentConfig& c) { return std::string(acc(c) ? "true" : "false"); },
            [acc](ExperimentConfig& c, const std::string& v) { acc(c) = to_bool(v); }};
}

#define MEC_REF(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(int_field("scenario.I", MEC_REF(scenario.miots)));
        f.push_back(int_field("scenario.J", MEC_REF(scenario.uavs)));
        f.push_back(int_field("scenario.K", MEC_REF(scenario.vessels)));
        f.push_back(real_field("scenario.region_side", MEC_REF(scenario.region_side_m)));
        f.push_back(real_field("scenario.uav_height", MEC_REF(scenario.uav_height_m)));
        f.push_back(real_field("scenario.ground_height", MEC_REF(scenario.ground_height_m)));
        f.push_back(real_field("scenario.slot_len", MEC_REF(scenario.slot_len_s)));
        f.push_back(int_field("scenario.T", MEC_REF(scenario.horizon)));
        f.push_back(real_field("scenario.bits_lo", MEC_REF(scenario.bits_lo)));
        f.push_back(real_field("scenario.bits_hi", MEC_REF(scenario.bits_hi)));
        f.push_back(real_field("scenario.cycles_lo", MEC_REF(scenario.cycles_lo)));
        f.push_back(real_field("scenario.cycles_hi", MEC_REF(scenario.cycles_hi)));
        f.push_back(real_field("scenario.arrival_prob", MEC_REF(scenario.arrival_prob)));
        f.push_back(real_field("scenario.miot_tx_power", MEC_REF(scenario.miot_tx_power_w)));
        f.push_back(real_field("scenario.gravity", MEC_REF(scenario.gravity_mps2)));
        f.push_back(real_field("scenario.air_density", MEC_REF(scenario.air_density_kgm3)));

        f.push_back(real_field("uav.cpu_hz", MEC_REF(scenario.uav.cpu_hz)));
        f.push_back(real_field("uav.storage_cap", MEC_REF(scenario.uav.storage_cap_bits)));
        f.push_back(real_field("uav.max_speed", MEC_REF(scenario.uav.max_speed_mps)));
        f.push_back(real_field("uav.mass", MEC_REF(scenario.uav.mass_kg)));
        f.push_back(real_field("uav.prop_radius", MEC_REF(scenario.uav.prop_radius_m)));
        f.push_back(int_field("uav.prop_count", MEC_REF(scenario.uav.prop_count)));
        f.push_back(real_field("uav.max_power", MEC_REF(scenario.uav.max_power_w)));
        f.push_back(real_field("uav.energy_per_megacycle", MEC_REF(scenario.uav.energy_per_megacycle_j)));
        f.push_back(real_field("uav.tx_power", MEC_REF(scenario.uav.tx_power_w)));

        f.push_back(real_field("vessel.cpu_hz", MEC_REF(scenario.vessel.cpu_hz)));
        f.push_back(int_field("vessel.antenna_cap", MEC_REF(scenario.vessel.antenna_cap)));
        f.push_back(real_field("vessel.energy_per_megacycle", MEC_REF(scenario.vessel.energy_per_megacycle_j)));

        f.push_back(real_field("channel.zeta_los", MEC_REF(channel.zeta_los_db)));
        f.push_back(real_field("channel.zeta_nlos", MEC_REF(channel.zeta_nlos_db)));
        f.push_back(real_field("channel.alpha", MEC_REF(channel.alpha)));
        f.push_back(real_field("channel.beta", MEC_REF(channel.beta)));
        f.push_back(real_field("channel.carrier_hz", MEC_REF(channel.carrier_hz)));
        f.push_back(real_field("channel.light_speed", MEC_REF(channel.light_speed_mps)));
        f.push_back(real_field("channel.bandwidth_hz", MEC_REF(channel.bandwidth_hz)));
        f.push_back(real_field("channel.noise_dbm", MEC_REF(noise_dbm)));
        f.push_back({"channel.fspl_distance",
                     [](const ExperimentConfig& c) {
                         return std::string(c.channel.fspl_distance == FsplDistance::three_d ? "3d" : "horizontal");
                     },
                     [](ExperimentConfig& c, const std::string& v) {
                         if (v == "3d") c.channel.fspl_distance = FsplDistance::three_d;
                         else if (v == "horizontal") c.channel.fspl_distance = FsplDistance::horizontal;
                         else throw ConfigError("expected 3d or horizontal, got '" + v + "'");
                     }});
        f.push_back(bool_field("channel.share_bandwidth", MEC_REF(channel.share_bandwidth)));

        f.push_back(real_field("bounds.phi_time", MEC_REF(bounds.phi_time)));
        f.push_back(real_field("bounds.phi_energy", MEC_REF(bounds.phi_energy)));
        f.push_back(real_field("bounds.weight_time", MEC_REF(bounds.weight_time)));
        f.push_back(real_field("bounds.weight_energy", MEC_REF(bounds.weight_energy)));

        f.push_back(real_field("agent.epsilon", MEC_REF(agent.epsilon)));
        f.push_back(bool_field("agent.epsilon_decay", MEC_REF(agent.epsilon_decay)));
        f.push_back(real_field("agent.epsilon_final", MEC_REF(agent.epsilon_final)));
        f.push_back(real_field("agent.learn_rate", MEC_REF(agent.learn_rate)));
        f.push_back(real_field("agent.approx_learn_rate", MEC_REF(agent.approx_learn_rate)));
        f.push_back(real_field("agent.discount", MEC_REF(agent.discount)));
        f.push_back(int_field("agent.epochs", MEC_REF(agent.epochs)));
        f.push_back({"agent.hidden", [](const ExperimentConfig& c) { return join_ints(c.agent.hidden); },
                     [](ExperimentConfig& c, const std::string& v) { c.agent.hidden = parse_int_list(v); }});
        f.push_back(int_field("agent.bins", MEC_REF(agent.bins)));
        f.push_back(int_field("agent.calibration_episodes", MEC_REF(agent.calibration_episodes)));
        f.push_back(real_field("agent.grad_clip", MEC_REF(agent.grad_clip)));

        f.push_back({"experiment.agents",
                     [](const ExperimentConfig& c) {
                         std::string out;
                         for (std::size_t i = 0; i < c.agents.size(); ++i) out += (i ? "," : "") + to_string(c.agents[i]);
                         return out;
                     },
                     [](ExperimentConfig& c, const std::string& v) {
                         c.agents.clear();
                         for (const auto& s : split(v, ',')) c.agents.push_back(parse_agent_kind(s));
                     }});
        f.push_back({"experiment.sweep", [](const ExperimentConfig& c) { return join_ints(c.sweep); },
                     [](ExperimentConfig& c, const std::string& v) { c.sweep = parse_int_list(v); }});
        f.push_back({"experiment.seeds",
                     [](const ExperimentConfig& c) {
                         std::string out;
                         for (std::size_t i = 0; i < c.seeds.size(); ++i) out += (i ? "," : "") + std::to_string(c.seeds[i]);
                         return out;
                     },
                     [](ExperimentConfig& c, const std::string& v) { c.seeds = parse_seed_list(v); }});
        f.push_back(int_field("experiment.eval_episodes", MEC_REF(eval_episodes)));
        f.push_back({"experiment.output_dir", [](const ExperimentConfig& c) { return c.output_dir; },
                     [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }});
        return f;
    }();
    return table;
}

#undef MEC_REF

} // namespace

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    const std::string t = trim(text);
    if (t.empty()) return out;
    for (const auto& s : split(t, ',')) out.push_back(to_int32(s));
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    const std::string t = trim(text);
    for (const auto& item : split(t, ',')) {
        const auto dots = item.find("..");
        if (dots != std::string::npos) {
            const long long lo = to_int(trim(item.substr(0, dots)));
            const long long hi = to_int(trim(item.substr(dots + 2)));
            if (lo < 0 || hi < lo) throw ConfigError("bad seed range '" + item + "'");
            for (long long s = lo; s <= hi; ++s) out.push_back(static_cast<std::uint64_t>(s));
        } else {
            const long long s = to_int(item);
            if (s < 0) throw ConfigError("seeds must be non-negative: '" + item + "'");
            out.push_back(static_cast<std::uint64_t>(s));
        }
    }
    if (out.empty()) throw ConfigError("empty seed list");
    return out;
}

void ExperimentConfig::resolve() {
    channel.noise_power_w = dbm_to_watts(noise_dbm);
    scenario.validate();
    channel.validate();
    bounds.validate();
    agent.validate();
    if (agents.empty()) throw ConfigError("experiment.agents: at least one agent");
    if (seeds.empty()) throw ConfigError("experiment.seeds: at least one seed");
    for (int i : sweep) {
        if (i < 1) throw ConfigError("experiment.sweep: MIoT counts must be >= 1");
    }
    if (eval_episodes < 1) throw ConfigError("experiment.eval_episodes: must be >= 1");
    std::set<AgentKind> seen(agents.begin(), agents.end());
    if (seen.size() != agents.size()) throw ConfigError("experiment.agents: duplicate agent");
}

std::vector<int> ExperimentConfig::miot_counts() const {
    return sweep.empty() ? std::vector<int>{scenario.miots} : sweep;
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::map<std::string, int> assigned;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const auto where = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
        if (it == table.end()) throw ConfigError(where + "unknown key '" + key + "'");
        if (!assigned.emplace(key, line_no).second) throw ConfigError(where + "duplicate key '" + key + "'");
        try {
            it->set(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + key + ": " + e.what());
        }
    }
    try {
        cfg.resolve();
    } catch (const ConfigError& e) {
        // Point at the offending line when the message names an assigned key.
        const std::string msg = e.what();
        const auto it = assigned.find(msg.substr(0, msg.find(':')));
        if (it == assigned.end()) throw;
        throw ConfigError("line " + std::to_string(it->second) + ": " + msg);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string emit_config(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
    return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    // The output location does not influence results.
    ExperimentConfig c = cfg;
    c.output_dir.clear();
    for (unsigned char ch : emit_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace mecsim
