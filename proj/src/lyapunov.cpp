#include "mecsim/lyapunov.hpp"

#include "mecsim/errors.hpp"

#include <algorithm>
#include <string>

namespace mecsim {

void ConstraintBounds::validate() const {
    if (!(phi_time > 0.0)) throw ConfigError("bounds.phi_time: must be > 0");
    if (!(phi_energy > 0.0)) throw ConfigError("bounds.phi_energy: must be > 0");
    if (!(weight_time >= 0.0)) throw ConfigError("bounds.weight_time: must be >= 0");
    if (!(weight_energy >= 0.0)) throw ConfigError("bounds.weight_energy: must be >= 0");
}

Ratios observation_ratios(const RunningAverages& avg, std::size_t miot, double t_obs, double e_obs) {
    if (avg.count.at(miot) == 0) {
        return {};
    }
    return {t_obs / avg.t_bar[miot], e_obs / avg.e_bar[miot]};
}

RunningAverages update_averages(RunningAverages avg, std::size_t miot, double t_obs, double e_obs) {
    const long n = ++avg.count.at(miot);
    // Incremental mean; the first observation initialises to itself.
    avg.t_bar[miot] += (t_obs - avg.t_bar[miot]) / static_cast<double>(n);
    avg.e_bar[miot] += (e_obs - avg.e_bar[miot]) / static_cast<double>(n);
    return avg;
}

VirtualQueues update_queues(VirtualQueues q, std::size_t miot, double ratio_t, double ratio_e,
                            const ConstraintBounds& bounds) {
    q.v_time.at(miot) = std::max(q.v_time[miot] + ratio_t - bounds.phi_time, 0.0);
    q.v_energy.at(miot) = std::max(q.v_energy[miot] + ratio_e - bounds.phi_energy, 0.0);
    return q;
}

double drift_penalty(const VirtualQueues& q, std::size_t miot, double ratio_t, double ratio_e,
                     const ConstraintBounds& bounds) {
    return bounds.weight_time * q.v_time.at(miot) * (ratio_t - bounds.phi_time) +
           bounds.weight_energy * q.v_energy.at(miot) * (ratio_e - bounds.phi_energy);
}

} // namespace mecsim
