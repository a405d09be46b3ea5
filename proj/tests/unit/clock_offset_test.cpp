#include "puppetcast/transport/clock_offset.hpp"

#include <vector>

#include <gtest/gtest.h>

namespace puppetcast::transport {
namespace {

// A remote clock that runs `offset` ahead of the local one; each ping takes `out` ms to
// reach it and `back` ms to return.
std::vector<PingSample> simulate(double offset, double out, double back, int n) {
    std::vector<PingSample> v;
    for (int i = 0; i < n; ++i) {
        const double send = 1000.0 + 37.0 * i;
        v.push_back(PingSample{send, send + out + offset, send + out + back});
    }
    return v;
}

TEST(ClockOffset, SymmetricDelayRecoversOffsetExactly) {
    for (double d : {0.0, 1.5, 20.0, 75.0}) {
        const auto s = simulate(-1234.5, d, d, 10);
        auto est = estimate_clock_offset(s, 10);
        ASSERT_TRUE(est);
        EXPECT_EQ(est->offset_ms, -1234.5);
        EXPECT_EQ(est->rtt_ms, 2 * d);
        EXPECT_EQ(est->samples, 10u);
    }
}

TEST(ClockOffset, AsymmetricDelayBiasIsHalfTheDifference) {
    // outbound 30, return 10: estimate = offset + (30 - 10) / 2
    const auto s = simulate(500.0, 30.0, 10.0, 7);
    auto est = estimate_clock_offset(s);
    ASSERT_TRUE(est);
    EXPECT_DOUBLE_EQ(est->offset_ms, 500.0 + 10.0);
    const auto r = simulate(500.0, 10.0, 30.0, 7);
    EXPECT_DOUBLE_EQ(estimate_clock_offset(r)->offset_ms, 500.0 - 10.0);
}

TEST(ClockOffset, MedianRejectsOutlier) {
    auto s = simulate(42.0, 5.0, 5.0, 9);
    s[4].remote_ms += 400.0;
    s[6].local_recv_ms += 900.0;
    EXPECT_DOUBLE_EQ(estimate_clock_offset(s)->offset_ms, 42.0);
}

TEST(ClockOffset, PartialAndEmpty) {
    const auto s = simulate(0.0, 1.0, 1.0, 3);
    auto est = estimate_clock_offset(s, 10);
    ASSERT_TRUE(est);
    EXPECT_EQ(est->samples, 3u);
    EXPECT_EQ(est->requested, 10u);
    EXPECT_FALSE(estimate_clock_offset(std::vector<PingSample>{}, 10));
}

}  // namespace
}  // namespace puppetcast::transport
