#include "mecsim/channel.hpp"

#include "mecsim/errors.hpp"

#include <cmath>
#include <numbers>

namespace mecsim {

void ChannelParams::validate() const {
    auto require = [](bool ok, const char* field) {
        if (!ok) {
            throw ConfigError(std::string(field) + ": invalid value");
        }
    };
    require(std::isfinite(zeta_los_db), "channel.zeta_los");
    require(std::isfinite(zeta_nlos_db), "channel.zeta_nlos");
    require(alpha > 0.0, "channel.alpha");
    require(beta > 0.0, "channel.beta");
    require(carrier_hz > 0.0, "channel.carrier_hz");
    require(light_speed_mps > 0.0, "channel.light_speed");
    require(bandwidth_hz > 0.0, "channel.bandwidth_hz");
    require(noise_power_w > 0.0, "channel.noise_dbm");
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double elevation_angle(const Position3D& a, const Position3D& b) {
    const double horizontal = distance_horizontal(a, b);
    const double dh = std::abs(a.h - b.h);
    if (horizontal == 0.0) {
        return std::numbers::pi / 2.0;
    }
    return std::atan(dh / horizontal);
}

double path_loss_db(const Position3D& a, const Position3D& b, const ChannelParams& p) {
    const double dist = p.fspl_distance == FsplDistance::three_d ? distance_3d(a, b)
                                                                 : distance_horizontal(a, b);
    if (!(dist > 0.0)) {
        throw DomainError("path_loss_db: zero transmitter-receiver distance");
    }
    const double gamma_deg = elevation_angle(a, b) * 180.0 / std::numbers::pi;
    const double los = (p.zeta_los_db - p.zeta_nlos_db) /
                       (1.0 + p.alpha * std::exp(-p.beta * (gamma_deg - p.alpha)));
    const double fspl =
        20.0 * std::log10(4.0 * std::numbers::pi * dist * p.carrier_hz / p.light_speed_mps);
    return los + fspl + p.zeta_nlos_db;
}

double channel_gain(const Position3D& a, const Position3D& b, const ChannelParams& p) {
    return std::pow(10.0, -path_loss_db(a, b, p) / 10.0);
}

double link_rate(double tx_power_w, const Position3D& from, const Position3D& to,
                 const ChannelParams& p) {
    const double snr = tx_power_w * channel_gain(from, to, p) / p.noise_power_w;
    return p.bandwidth_hz * std::log2(1.0 + snr);
}

} // namespace mecsim
