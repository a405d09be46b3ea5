#include "puppetcast/transport/sequence_gate.hpp"

#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace puppetcast::transport {
namespace {

TEST(SeqDistance, WrapsOnTheSixteenBitCircle) {
    EXPECT_EQ(seq_distance(1, 0), 1);
    EXPECT_EQ(seq_distance(0, 65535), 1);
    EXPECT_EQ(seq_distance(65535, 0), -1);
    EXPECT_EQ(seq_distance(100, 132), -32);
}

TEST(SequenceGate, AdmitsInOrderAndAcrossWrap) {
    SequenceGate g;
    for (std::uint32_t s = 65530; s < 65540; ++s) {
        EXPECT_TRUE(g.admit("a", static_cast<std::uint16_t>(s)));
    }
    EXPECT_EQ(g.stale_dropped(), 0u);
}

TEST(SequenceGate, DropsDuplicatesAndStaleWithinHorizon) {
    SequenceGate g;
    EXPECT_TRUE(g.admit("a", 100));
    EXPECT_FALSE(g.admit("a", 100));
    EXPECT_FALSE(g.admit("a", 99));
    EXPECT_FALSE(g.admit("a", 68));
    EXPECT_TRUE(g.admit("a", 105));  // gaps are fine
    EXPECT_EQ(g.stale_dropped(), 3u);
}

TEST(SequenceGate, FarBehindIsASenderRestart) {
    SequenceGate g;
    EXPECT_TRUE(g.admit("a", 5000));
    EXPECT_TRUE(g.admit("a", 0));
    EXPECT_EQ(g.resyncs(), 1u);
    EXPECT_TRUE(g.admit("a", 1));
}

TEST(SequenceGate, SendersAreIndependent) {
    SequenceGate g;
    EXPECT_TRUE(g.admit("a", 10));
    EXPECT_TRUE(g.admit("b", 3));
    EXPECT_FALSE(g.admit("a", 3));
    g.forget("a");
    EXPECT_TRUE(g.admit("a", 3));
}

// Whatever order arrivals take (reordering within the horizon), the admitted stream is
// strictly increasing per sender and every seq is admitted at most once.
TEST(SequenceGateProperty, AdmittedStreamIsStrictlyIncreasing) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint16_t start = static_cast<std::uint16_t>(rng());
        std::vector<std::uint16_t> arrivals;
        for (int i = 0; i < 300; ++i) {
            arrivals.push_back(static_cast<std::uint16_t>(start + i));
            if (rng() % 10 == 0) {
                arrivals.push_back(static_cast<std::uint16_t>(start + i));  // duplicate
            }
        }
        // Local reordering: swap neighbours up to 8 apart.
        for (std::size_t i = 0; i + 8 < arrivals.size(); ++i) {
            if (rng() % 4 == 0) {
                std::swap(arrivals[i], arrivals[i + rng() % 8]);
            }
        }
        SequenceGate g;
        std::vector<std::uint16_t> admitted;
        for (auto s : arrivals) {
            if (g.admit("x", s)) {
                admitted.push_back(s);
            }
        }
        for (std::size_t i = 1; i < admitted.size(); ++i) {
            ASSERT_GT(seq_distance(admitted[i], admitted[i - 1]), 0);
        }
        EXPECT_EQ(admitted.size() + g.stale_dropped(), arrivals.size());
        EXPECT_EQ(g.resyncs(), 0u);
    }
}

}  // namespace
}  // namespace puppetcast::transport
