#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace mecsim {

inline constexpr std::size_t kStateComponents = 4;
using StateComponents = std::array<double, kStateComponents>;

/// Quantile bucketing of the four state components into a single index
/// sum_c bin_c * bins^c. Edges are calibrated once from a sample and then
/// frozen; with no edges every value falls into bin 0.
class TabularEncoder {
public:
    explicit TabularEncoder(int bins = 4);

    int bins() const { return bins_; }
    std::size_t index_space() const;

    /// Sets each component's edges to its k/bins sample quantiles
    /// (k = 1..bins-1), with duplicate edges removed.
    void calibrate(std::span<const StateComponents> sample);

    std::size_t encode(const StateComponents& raw) const;

    const std::array<std::vector<double>, kStateComponents>& edges() const { return edges_; }
    void set_edges(std::array<std::vector<double>, kStateComponents> edges);

private:
    int bins_;
    std::array<std::vector<double>, kStateComponents> edges_;
};

/// Divides each component by the largest value seen so far, giving [0, 1].
class VectorEncoder {
public:
    void observe(const StateComponents& raw);
    StateComponents encode(const StateComponents& raw) const;

    const StateComponents& maxima() const { return max_; }
    void set_maxima(const StateComponents& m) { max_ = m; }

private:
    StateComponents max_{};
};

} // namespace mecsim
