#include "iterfilter/error.hpp"
#include "iterfilter/schedule.hpp"

#include <doctest.h>

using namespace iterfilter;

TEST_SUITE("schedule") {

TEST_CASE("four iterations divide by four and end at zero") {
    const auto s = filter::noise_schedule(0.02, 4);
    CHECK(s.delta == 4.0);
    REQUIRE(s.sigmas.size() == 4);
    CHECK(s.sigmas[0] == 0.005);
    CHECK(s.sigmas[1] == 0.00125);
    CHECK(s.sigmas[2] == 0.0003125);
    CHECK(s.sigmas[3] == 0.0);
}

TEST_CASE("two iterations") {
    const auto s = filter::noise_schedule(0.02, 2);
    CHECK(s.delta == 8.0);
    REQUIRE(s.sigmas.size() == 2);
    CHECK(s.sigmas[0] == 0.0025);
    CHECK(s.sigmas[1] == 0.0);
}

TEST_CASE("levels decrease strictly until the last") {
    for (std::size_t T = 2; T <= 12; ++T) {
        const auto s = filter::noise_schedule(0.013, T);
        REQUIRE(s.sigmas.size() == T);
        double prev = 0.013;
        for (std::size_t t = 0; t + 1 < T; ++t) {
            const double expected = prev / (16.0 / static_cast<double>(T));
            CHECK(s.sigmas[t] == expected);
            prev = s.sigmas[t];
        }
        CHECK(s.sigmas.back() == 0.0);
    }
}

TEST_CASE("invalid arguments") {
    CHECK_THROWS_AS(filter::noise_schedule(0.02, 1), InvalidInput);
    CHECK_THROWS_AS(filter::noise_schedule(0.02, 13), InvalidInput);
    CHECK_THROWS_AS(filter::noise_schedule(0.0, 4), InvalidInput);
    CHECK_THROWS_AS(filter::noise_schedule(-0.01, 4), InvalidInput);
}

}
