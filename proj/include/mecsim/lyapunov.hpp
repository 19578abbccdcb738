#pragma once

#include <cstddef>
#include <vector>

namespace mecsim {

/// Per-MIoT constraint-violation queues for the long-term time and energy
/// bounds. Entries never go negative.
struct VirtualQueues {
    std::vector<double> v_time;
    std::vector<double> v_energy;

    explicit VirtualQueues(std::size_t miots = 0) : v_time(miots, 0.0), v_energy(miots, 0.0) {}
};

/// Per-MIoT cumulative means of the observed per-slot time and energy.
struct RunningAverages {
    std::vector<double> t_bar;
    std::vector<double> e_bar;
    std::vector<long> count;

    explicit RunningAverages(std::size_t miots = 0)
        : t_bar(miots, 0.0), e_bar(miots, 0.0), count(miots, 0) {}
};

struct ConstraintBounds {
    double phi_time = 0.99;
    double phi_energy = 0.99;
    double weight_time = 1.0;     // theta_1
    double weight_energy = 1.0;   // theta_0

    void validate() const;
};

/// Ratios of an observation to the MIoT's mean over *earlier* slots.
/// Before the first observation the ratio is defined as 1.
struct Ratios {
    double time = 1.0;
    double energy = 1.0;
};

Ratios observation_ratios(const RunningAverages& avg, std::size_t miot, double t_obs, double e_obs);

RunningAverages update_averages(RunningAverages avg, std::size_t miot, double t_obs, double e_obs);

/// V <- max(V + ratio - phi, 0) for both queues of one MIoT.
VirtualQueues update_queues(VirtualQueues q, std::size_t miot, double ratio_t, double ratio_e,
                            const ConstraintBounds& bounds);

/// Weighted drift-plus-penalty term of one MIoT for the current slot.
double drift_penalty(const VirtualQueues& q, std::size_t miot, double ratio_t, double ratio_e,
                     const ConstraintBounds& bounds);

inline double reward(double drift_penalty_value) { return -drift_penalty_value; }

} // namespace mecsim
