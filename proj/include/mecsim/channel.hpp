#pragma once

#include "mecsim/world.hpp"

namespace mecsim {

enum class FsplDistance { three_d, horizontal };

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Air-to-surface channel constants. Defaults are the maritime values used in
/// the reference scenario (1 MHz carrier and bandwidth, -114 dBm noise).
struct ChannelParams {
    double zeta_los_db = 2.3;
    double zeta_nlos_db = 34.0;
    double alpha = 5.0188;
    double beta = 0.3511;
    double carrier_hz = 1e6;
    double light_speed_mps = 299792458.0;
    double bandwidth_hz = 1e6;
    double noise_power_w = dbm_to_watts(-114.0);
    FsplDistance fspl_distance = FsplDistance::three_d;
    // Tasks sharing a receiver in the same slot split its bandwidth equally.
    bool share_bandwidth = true;

    void validate() const;
};

/// Elevation of the a-b line above the horizontal plane, in radians.
/// pi/2 when the endpoints share ground coordinates.
double elevation_angle(const Position3D& a, const Position3D& b);

/// Probabilistic line-of-sight path loss in dB. The sigmoid takes the
/// elevation in degrees. Throws DomainError for zero distance.
double path_loss_db(const Position3D& a, const Position3D& b, const ChannelParams& p);

/// Linear power gain 10^(-L/10).
double channel_gain(const Position3D& a, const Position3D& b, const ChannelParams& p);

/// Shannon rate B0 * log2(1 + P g / N) in bits/s for a transmitter of
/// tx_power_w at `from` sending to `to`.
double link_rate(double tx_power_w, const Position3D& from, const Position3D& to,
                 const ChannelParams& p);

inline double link_rate(const MIoTDevice& from, const Uav& to, const ChannelParams& p) {
    return link_rate(from.tx_power_w, from.position, to.position, p);
}

inline double link_rate(const Uav& from, const Vessel& to, const ChannelParams& p) {
    return link_rate(from.tx_power_w, from.position, to.position, p);
}

} // namespace mecsim
