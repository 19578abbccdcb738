#include "doctest.h"

#include "mecsim/encoding.hpp"
#include "mecsim/errors.hpp"
#include "mecsim/rng.hpp"

#include <cmath>
#include <limits>
#include <set>

using namespace mecsim;

TEST_CASE("one bin maps every state to zero") {
    TabularEncoder enc(1);
    CHECK(enc.index_space() == 1);
    std::vector<StateComponents> sample{{1, 2, 3, 4}, {5, 6, 7, 8}};
    enc.calibrate(sample);
    CHECK(enc.encode({100, -3, 0.5, 9}) == 0);
}

TEST_CASE("index space is bins^4 and every state lands inside it") {
    TabularEncoder enc(10);
    CHECK(enc.index_space() == 10000);
    Rng rng(4);
    std::vector<StateComponents> sample;
    for (int n = 0; n < 2000; ++n) {
        sample.push_back({rng.uniform(0, 10), rng.uniform(0, 500), rng.uniform(0, 30), rng.uniform(0, 5)});
    }
    enc.calibrate(sample);
    std::set<std::size_t> seen;
    for (int n = 0; n < 20000; ++n) {
        const std::size_t idx = enc.encode(
            {rng.uniform(-1, 11), rng.uniform(-10, 600), rng.uniform(-1, 40), rng.uniform(-1, 6)});
        CHECK(idx < enc.index_space());
        seen.insert(idx);
    }
    CHECK(seen.size() > 5000);
}

TEST_CASE("bin boundaries are exhaustive and ordered") {
    TabularEncoder enc(3);
    std::array<std::vector<double>, kStateComponents> edges{
        std::vector<double>{1.0, 2.0}, std::vector<double>{10.0}, std::vector<double>{}, std::vector<double>{0.5, 0.7}};
    enc.set_edges(edges);
    // Values at an edge go to the upper bin.
    CHECK(enc.encode({0.99, 0, 0, 0}) == 0);
    CHECK(enc.encode({1.0, 0, 0, 0}) == 1);
    CHECK(enc.encode({2.0, 0, 0, 0}) == 2);
    CHECK(enc.encode({0, 10.0, 0, 0}) == 3);
    CHECK(enc.encode({0, 0, 1e9, 0}) == 0);
    CHECK(enc.encode({0, 0, 0, 0.6}) == 27);
    CHECK(enc.encode({5, 20, 0, 0.9}) == 2 + 3 + 2 * 27);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            const double xs[3] = {0.0, 1.5, 3.0};
            const double ws[3] = {0.0, 0.6, 0.8};
            CHECK(enc.encode({xs[a], 0, 0, ws[b]}) == static_cast<std::size_t>(a + 27 * b));
        }
    }
}

TEST_CASE("quantile calibration splits a uniform sample evenly") {
    TabularEncoder enc(4);
    std::vector<StateComponents> sample;
    for (int n = 0; n < 400; ++n) sample.push_back({static_cast<double>(n), 0, 0, 0});
    enc.calibrate(sample);
    REQUIRE(enc.edges()[0].size() == 3);
    CHECK(enc.edges()[0][0] == 100.0);
    CHECK(enc.edges()[0][1] == 200.0);
    CHECK(enc.edges()[0][2] == 300.0);
    // Constant components collapse to a single edge.
    CHECK(enc.edges()[1].size() == 1);
}

TEST_CASE("encoders reject non-finite components") {
    TabularEncoder tab(4);
    VectorEncoder vec;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(tab.encode({nan, 0, 0, 0}), EncodingError);
    CHECK_THROWS_AS(tab.encode({0, inf, 0, 0}), EncodingError);
    CHECK_THROWS_AS(vec.observe({0, 0, nan, 0}), EncodingError);
    CHECK_THROWS_AS(vec.encode({0, 0, 0, -inf}), EncodingError);
    CHECK_THROWS_AS(TabularEncoder(0), ConfigError);
}

TEST_CASE("vector encoder normalizes by running maxima") {
    VectorEncoder enc;
    CHECK(enc.encode({3, 4, 5, 6}) == StateComponents{0, 0, 0, 0});
    enc.observe({2, 10, 4, 1});
    enc.observe({1, 20, 2, 1});
    CHECK(enc.encode({2, 20, 4, 1}) == StateComponents{1, 1, 1, 1});
    const StateComponents half = enc.encode({1, 10, 2, 0.5});
    for (double h : half) CHECK(h == doctest::Approx(0.5));
    const StateComponents over = enc.encode({4, 40, 8, 2});
    for (double o : over) CHECK(o == 1.0);
}
