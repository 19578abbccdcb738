#include "mecsim/encoding.hpp"

#include "mecsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mecsim {

namespace {

void check_finite(const StateComponents& raw) {
    for (double v : raw) {
        if (!std::isfinite(v)) {
            throw EncodingError("state component is not finite");
        }
    }
}

} // namespace

TabularEncoder::TabularEncoder(int bins) : bins_(bins) {
    if (bins < 1) {
        throw ConfigError("agent.bins: must be >= 1");
    }
}

std::size_t TabularEncoder::index_space() const {
    std::size_t n = 1;
    for (std::size_t c = 0; c < kStateComponents; ++c) n *= static_cast<std::size_t>(bins_);
    return n;
}

void TabularEncoder::calibrate(std::span<const StateComponents> sample) {
    for (std::size_t c = 0; c < kStateComponents; ++c) {
        std::vector<double> values;
        values.reserve(sample.size());
        for (const auto& s : sample) {
            if (std::isfinite(s[c])) values.push_back(s[c]);
        }
        auto& e = edges_[c];
        e.clear();
        if (values.empty() || bins_ == 1) continue;
        std::sort(values.begin(), values.end());
        for (int k = 1; k < bins_; ++k) {
            const auto pos = static_cast<std::size_t>(
                std::floor(static_cast<double>(k) * static_cast<double>(values.size()) / bins_));
            e.push_back(values[std::min(pos, values.size() - 1)]);
        }
        e.erase(std::unique(e.begin(), e.end()), e.end());
    }
}

void TabularEncoder::set_edges(std::array<std::vector<double>, kStateComponents> edges) {
    for (auto& e : edges) {
        if (static_cast<int>(e.size()) > bins_ - 1 || !std::is_sorted(e.begin(), e.end())) {
            throw ConfigError("tabular encoder: edges must be sorted and fewer than bins");
        }
    }
    edges_ = std::move(edges);
}

std::size_t TabularEncoder::encode(const StateComponents& raw) const {
    check_finite(raw);
    std::size_t index = 0;
    std::size_t stride = 1;
    for (std::size_t c = 0; c < kStateComponents; ++c) {
        // A value equal to an edge belongs to the upper bin.
        const auto& e = edges_[c];
        const auto bin = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), raw[c]) - e.begin());
        index += bin * stride;
        stride *= static_cast<std::size_t>(bins_);
    }
    return index;
}

void VectorEncoder::observe(const StateComponents& raw) {
    check_finite(raw);
    for (std::size_t c = 0; c < kStateComponents; ++c) {
        max_[c] = std::max(max_[c], std::abs(raw[c]));
    }
}

StateComponents VectorEncoder::encode(const StateComponents& raw) const {
    check_finite(raw);
    StateComponents out{};
    for (std::size_t c = 0; c < kStateComponents; ++c) {
        out[c] = max_[c] > 0.0 ? std::clamp(raw[c] / max_[c], 0.0, 1.0) : 0.0;
    }
    return out;
}

} // namespace mecsim
