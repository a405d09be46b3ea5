#include "puppetcast/transport/throttle.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace puppetcast::transport {
namespace {

using std::chrono::microseconds;

// Independent discrete-time token bucket: one refill step per microsecond in floating
// point bits, FIFO departures as soon as the head fits.
std::vector<std::int64_t> oracle_departures(double rate_bps, double burst_bytes,
                                            const std::vector<std::int64_t>& arrivals_us,
                                            std::size_t frame_bytes, std::int64_t horizon_us) {
    const double cap = burst_bytes * 8.0;
    const double need = static_cast<double>(frame_bytes) * 8.0;
    double tokens = cap;
    std::vector<std::int64_t> out;
    std::size_t head = 0;
    for (std::int64_t t = 0; t <= horizon_us && head < arrivals_us.size(); ++t) {
        if (t > 0) {
            tokens = std::min(cap, tokens + rate_bps / 1e6);
        }
        while (head < arrivals_us.size() && arrivals_us[head] <= t && tokens >= need - 1e-6) {
            tokens -= need;
            out.push_back(t);
            ++head;
        }
    }
    return out;
}

ChannelConfig capped(std::uint64_t rate, std::uint64_t burst = 408) {
    ChannelConfig c;
    c.rate_bps = rate;
    c.burst_bytes = burst;
    return c;
}

TEST(ChannelConfigValidate, BurstMustHoldAFrame) {
    EXPECT_FALSE(validate(capped(35000)).has_value());
    EXPECT_TRUE(validate(capped(35000, 407)).has_value());
    EXPECT_FALSE(validate(capped(0, 1)).has_value());
    ChannelConfig c;
    c.loss_prob = 1.5;
    EXPECT_TRUE(validate(c).has_value());
    c.loss_prob = -0.1;
    EXPECT_TRUE(validate(c).has_value());
    c.loss_prob = 1.0;
    EXPECT_FALSE(validate(c).has_value());
    c.queue_capacity = 0;
    EXPECT_TRUE(validate(c).has_value());
}

TEST(TokenBucket, StartsFullAndRefillsAtRate) {
    TokenBucket b(3264, 408);
    EXPECT_EQ(b.ready_at(408, microseconds{0}), microseconds{0});
    b.consume(408, microseconds{0});
    // 3264 bits at 3264 bit/s: exactly one second.
    EXPECT_EQ(b.ready_at(408, microseconds{0}), microseconds{1'000'000});
    EXPECT_EQ(b.ready_at(204, microseconds{0}), microseconds{500'000});
}

TEST(ThrottleScheduler, MatchesDiscreteTimeOracleAt20FpsUnder35kbps) {
    ThrottleScheduler s(capped(35000));
    std::vector<std::int64_t> arrivals;
    for (int i = 0; i < 100; ++i) {
        arrivals.push_back(i * 50'000);
    }
    const auto expected = oracle_departures(35000, 408, arrivals, 408, 20'000'000);
    ASSERT_EQ(expected.size(), arrivals.size());
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        const Schedule sch = s.throttled_send(408, microseconds{arrivals[i]});
        ASSERT_TRUE(sch.delivered());
        EXPECT_NEAR(static_cast<double>(sch.departure.count()), static_cast<double>(expected[i]), 1.0)
            << "frame " << i;
    }
}

TEST(ThrottleScheduler, SteadyStateNear10Point7FpsWithGrowingQueueDelay) {
    ThrottleScheduler s(capped(35000));
    std::vector<Schedule> out;
    for (int i = 0; i < 400; ++i) {
        out.push_back(s.throttled_send(408, microseconds{i * 50'000}));
    }
    // Departures per second over the tail, against 35000 / 3264 = 10.723.
    const auto t0 = out[100].departure;
    const auto t1 = out[399].departure;
    const double fps = 299.0 / (static_cast<double>((t1 - t0).count()) / 1e6);
    EXPECT_NEAR(fps, 35000.0 / 3264.0, 0.01);
    const auto delay = [&](int i) { return out[i].departure - microseconds{i * 50'000}; };
    EXPECT_LT(delay(50), delay(100));
    EXPECT_LT(delay(100), delay(399));
}

TEST(ThrottleScheduler, ArrivalRateEqualToRefillHasZeroQueueing) {
    ThrottleScheduler s(capped(3264, 408));
    for (int i = 0; i < 50; ++i) {
        const microseconds now{static_cast<std::int64_t>(i) * 1'000'000};
        const Schedule sch = s.throttled_send(408, now);
        EXPECT_EQ(sch.departure, now) << "frame " << i;
        EXPECT_EQ(sch.delivery, now);
    }
}

TEST(ThrottleScheduler, UnlimitedRateAddsOnlyDelayAndJitter) {
    ChannelConfig c;
    c.base_delay_ms = 20;
    ThrottleScheduler plain(c);
    for (int i = 0; i < 20; ++i) {
        const microseconds now{i * 137};
        const Schedule sch = plain.throttled_send(4000, now);
        EXPECT_EQ(sch.departure, now);
        EXPECT_EQ(sch.delivery, now + microseconds{20'000});
    }
    c.jitter_ms = 5;
    ThrottleScheduler jittery(c);
    for (int i = 0; i < 200; ++i) {
        const microseconds now{i * 1000};
        const Schedule sch = jittery.throttled_send(408, now);
        EXPECT_GE(sch.delivery, now + microseconds{15'000});
        EXPECT_LE(sch.delivery, now + microseconds{25'000});
    }
}

TEST(ThrottleScheduler, RejectsMessageLargerThanBurst) {
    ThrottleScheduler s(capped(35000, 408));
    EXPECT_EQ(s.throttled_send(409, microseconds{0}).drop, DropReason::TooLarge);
    EXPECT_TRUE(s.throttled_send(408, microseconds{0}).delivered());
}

// Bits departing in any window of length W >= burst/rate never exceed burst + rate*W.
TEST(ThrottleProperty, RateWindowBoundUnderAdversarialArrivals) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint64_t rate = std::uniform_int_distribution<std::uint64_t>(4000, 200000)(rng);
        const std::uint64_t burst = std::uniform_int_distribution<std::uint64_t>(408, 4000)(rng);
        ThrottleScheduler s(capped(rate, burst));
        std::vector<std::pair<std::int64_t, std::int64_t>> deps;  // (time us, bits)
        std::int64_t t = 0;
        for (int i = 0; i < 600; ++i) {
            // Mix of back-to-back bursts, long idles and random gaps.
            const int mode = static_cast<int>(rng() % 3);
            if (mode == 1) {
                t += std::uniform_int_distribution<std::int64_t>(0, 3'000'000)(rng);
            } else if (mode == 2) {
                t += std::uniform_int_distribution<std::int64_t>(0, 20'000)(rng);
            }
            const std::size_t bytes = std::uniform_int_distribution<std::size_t>(1, burst)(rng);
            const Schedule sch = s.throttled_send(bytes, microseconds{t});
            ASSERT_TRUE(sch.delivered());
            deps.emplace_back(sch.departure.count(), static_cast<std::int64_t>(bytes) * 8);
        }
        const double w_min = static_cast<double>(burst) * 8.0 / static_cast<double>(rate) * 1e6;
        for (double w : {w_min, 2 * w_min, 5 * w_min, 1e6}) {
            const double bound = static_cast<double>(burst) * 8.0 + static_cast<double>(rate) * w / 1e6;
            std::size_t hi = 0;
            std::int64_t bits = 0;
            for (std::size_t lo = 0; lo < deps.size(); ++lo) {
                while (hi < deps.size() && static_cast<double>(deps[hi].first - deps[lo].first) <= w) {
                    bits += deps[hi].second;
                    ++hi;
                }
                ASSERT_LE(static_cast<double>(bits), bound + 1e-6)
                    << "trial " << trial << " window " << w << " start " << deps[lo].first;
                bits -= deps[lo].second;
            }
        }
    }
}

std::vector<Delivery> drain(ThrottledChannel& ch, microseconds until) {
    std::vector<Delivery> all;
    while (auto next = ch.next_event()) {
        if (*next > until) {
            break;
        }
        auto got = ch.poll(*next);
        all.insert(all.end(), std::make_move_iterator(got.begin()), std::make_move_iterator(got.end()));
    }
    return all;
}

std::vector<std::uint8_t> tagged(std::size_t size, int tag) {
    std::vector<std::uint8_t> v(size, 0);
    v[0] = static_cast<std::uint8_t>(tag);
    v[1] = static_cast<std::uint8_t>(tag >> 8);
    return v;
}

int tag_of(const Delivery& d) { return d.bytes[0] | (d.bytes[1] << 8); }

TEST(ThrottledChannel, UnlimitedDeliversIntact) {
    ThrottledChannel ch(ChannelConfig{});
    std::vector<std::uint8_t> frame(408);
    for (std::size_t i = 0; i < frame.size(); ++i) {
        frame[i] = static_cast<std::uint8_t>(i * 7);
    }
    ch.offer(frame, microseconds{10});
    auto got = ch.poll(microseconds{10});
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].bytes, frame);
    EXPECT_EQ(got[0].delivery, microseconds{10});
}

TEST(ThrottledChannel, BuffersWhilePausedThenDropsOldest) {
    ChannelConfig c;
    c.queue_capacity = 32;
    ThrottledChannel ch(c);
    ch.set_paused(true);
    int dropped = 0;
    for (int i = 0; i < 40; ++i) {
        if (ch.offer(tagged(408, i), microseconds{i * 1000}) == ThrottledChannel::OfferResult::QueuedDroppedOldest) {
            ++dropped;
        }
    }
    EXPECT_EQ(dropped, 8);
    EXPECT_EQ(ch.stats().dropped_overflow, 8u);
    EXPECT_EQ(ch.pending(), 32u);
    EXPECT_TRUE(ch.poll(microseconds{1'000'000}).empty());
    ch.set_paused(false);
    auto got = ch.poll(microseconds{1'000'000});
    ASSERT_EQ(got.size(), 32u);
    for (int i = 0; i < 32; ++i) {
        EXPECT_EQ(tag_of(got[static_cast<std::size_t>(i)]), i + 8);
    }
}

TEST(ThrottledChannel, TotalLossDeliversNothing) {
    ChannelConfig c;
    c.loss_prob = 1.0;
    ThrottledChannel ch(c);
    for (int i = 0; i < 25; ++i) {
        ch.offer(tagged(408, i), microseconds{i * 100'000});
    }
    EXPECT_TRUE(drain(ch, microseconds{10'000'000}).empty());
    EXPECT_EQ(ch.stats().lost, 25u);
    EXPECT_EQ(ch.stats().delivered, 0u);
}

TEST(ThrottledChannel, RejectsOversizedUnderRateCap) {
    ThrottledChannel ch(capped(35000));
    EXPECT_EQ(ch.offer(std::vector<std::uint8_t>(409), microseconds{0}),
              ThrottledChannel::OfferResult::RejectedTooLarge);
    EXPECT_EQ(ch.stats().rejected_too_large, 1u);
}

TEST(ThrottledChannel, QueueBoundCapsDelayUnderOverload) {
    ThrottledChannel ch(capped(35000));
    std::vector<Delivery> got;
    for (int i = 0; i < 400; ++i) {
        const microseconds now{i * 50'000};
        ch.offer(tagged(408, i), now);
        auto d = ch.poll(now);
        got.insert(got.end(), d.begin(), d.end());
    }
    EXPECT_GT(ch.stats().dropped_overflow, 0u);
    // Queue delay is bounded by capacity / drain rate once drop-oldest engages.
    const double max_delay_us = 33.0 * 3264.0 / 35000.0 * 1e6;
    for (const auto& d : got) {
        EXPECT_LE(static_cast<double>((d.departure - d.offered).count()), max_delay_us);
    }
    const double fps = static_cast<double>(got.size()) / 20.0;
    EXPECT_NEAR(fps, 10.7, 0.3);
}

std::vector<std::tuple<int, std::int64_t>> run_noisy(std::uint64_t seed) {
    ChannelConfig c = capped(50000, 1000);
    c.base_delay_ms = 30;
    c.jitter_ms = 10;
    c.loss_prob = 0.2;
    c.seed = seed;
    ThrottledChannel ch(c);
    std::vector<std::tuple<int, std::int64_t>> out;
    for (int i = 0; i < 300; ++i) {
        const microseconds now{i * 40'000};
        ch.offer(tagged(300 + (i % 50), i), now);
        for (auto& d : ch.poll(now)) {
            out.emplace_back(tag_of(d), d.delivery.count());
        }
    }
    for (auto& d : drain(ch, microseconds{100'000'000})) {
        out.emplace_back(tag_of(d), d.delivery.count());
    }
    return out;
}

TEST(ThrottleProperty, FixedSeedIsReproducible) {
    const auto a = run_noisy(42);
    const auto b = run_noisy(42);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, run_noisy(43));
    EXPECT_LT(a.size(), 300u);
    EXPECT_GT(a.size(), 150u);
}

}  // namespace
}  // namespace puppetcast::transport
