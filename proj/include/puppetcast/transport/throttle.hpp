#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

namespace puppetcast::transport {

using Micros = std::chrono::microseconds;

/// Virtual-channel parameters. Keys in config files and CLI flags use these names.
struct ChannelConfig {
    std::uint64_t rate_bps = 0;  // 0 = unlimited
    std::uint64_t burst_bytes = 408;
    std::uint32_t base_delay_ms = 0;
    std::uint32_t jitter_ms = 0;  // uniform in [-jitter, +jitter]
    double loss_prob = 0.0;       // [0,1]
    std::uint64_t seed = 1;
    std::size_t queue_capacity = 32;  // pending messages before drop-oldest
};

/// Returns a description of the first violated constraint, if any.
std::optional<std::string> validate(const ChannelConfig& config);

/// Token bucket with exact integer accounting. Tokens are held in bit-microseconds so a
/// rate in bits/s refills exactly `rate_bps` units per microsecond. Starts full.
class TokenBucket {
public:
    TokenBucket(std::uint64_t rate_bps, std::uint64_t burst_bytes, Micros start = Micros{0});

    /// Earliest time >= `at` at which `bytes` tokens are available. Does not consume.
    Micros ready_at(std::size_t bytes, Micros at) const;

    /// Removes `bytes` tokens at time `at`; `at` must be >= ready_at(bytes, at).
    void consume(std::size_t bytes, Micros at);

    bool unlimited() const noexcept { return rate_bps_ == 0; }
    std::uint64_t rate_bps() const noexcept { return rate_bps_; }

private:
    std::int64_t tokens_at(Micros at) const;

    std::uint64_t rate_bps_;
    std::int64_t capacity_;
    std::int64_t tokens_;
    Micros last_;
};

enum class DropReason { None, Lost, TooLarge, Overflow };

struct Schedule {
    Micros departure{0};
    Micros delivery{0};
    DropReason drop = DropReason::None;

    bool delivered() const noexcept { return drop == DropReason::None; }
};

/// FIFO departure scheduling through a token bucket plus seeded delay, jitter and loss.
/// With a fixed seed the sequence of schedules is reproducible.
class ThrottleScheduler {
public:
    explicit ThrottleScheduler(const ChannelConfig& config, Micros start = Micros{0});

    Micros earliest_departure(std::size_t bytes, Micros arrival) const;

    /// Consumes tokens at `departure` and draws loss and jitter for one message.
    Schedule commit(std::size_t bytes, Micros departure);

    /// Schedules a message offered at `now` behind all earlier ones (no queue bound).
    Schedule throttled_send(std::size_t bytes, Micros now);

    const ChannelConfig& config() const noexcept { return config_; }

private:
    ChannelConfig config_;
    TokenBucket bucket_;
    Micros last_departure_{Micros::min()};
    std::mt19937_64 rng_;
};

struct ChannelStats {
    std::uint64_t offered = 0;
    std::uint64_t departed = 0;
    std::uint64_t delivered = 0;
    std::uint64_t lost = 0;
    std::uint64_t dropped_overflow = 0;
    std::uint64_t rejected_too_large = 0;
    std::uint64_t bytes_delivered = 0;
};

struct Delivery {
    std::vector<std::uint8_t> bytes;
    Micros offered{0};
    Micros departure{0};
    Micros delivery{0};
};

/// Discrete-event throttled link: bounded pending queue (drop-oldest), token-bucket
/// departures, then delay/jitter/loss. Not thread-safe; owners serialize access.
class ThrottledChannel {
public:
    explicit ThrottledChannel(const ChannelConfig& config, Micros start = Micros{0});

    enum class OfferResult { Queued, QueuedDroppedOldest, RejectedTooLarge };

    OfferResult offer(std::vector<std::uint8_t> bytes, Micros now);

    /// Runs departures up to `now` and returns every message whose delivery time is <= now,
    /// in delivery order (ties keep departure order).
    std::vector<Delivery> poll(Micros now);

    /// Earliest pending departure or delivery, if any.
    std::optional<Micros> next_event() const;

    /// While paused nothing departs; offers keep queueing and drop the oldest at capacity.
    void set_paused(bool paused) noexcept { paused_ = paused; }
    bool paused() const noexcept { return paused_; }

    std::size_t pending() const noexcept { return pending_.size(); }
    std::size_t in_flight() const noexcept { return in_flight_.size(); }
    const ChannelStats& stats() const noexcept { return stats_; }
    const ChannelConfig& config() const noexcept { return scheduler_.config(); }

private:
    struct Pending {
        std::vector<std::uint8_t> bytes;
        Micros offered;
    };
    struct InFlight {
        Delivery d;
        std::uint64_t order;
    };
    struct LaterFirst {
        bool operator()(const InFlight& a, const InFlight& b) const {
            if (a.d.delivery != b.d.delivery) {
                return a.d.delivery > b.d.delivery;
            }
            return a.order > b.order;
        }
    };

    void advance(Micros now);
    std::optional<Micros> next_departure() const;

    ThrottleScheduler scheduler_;
    std::deque<Pending> pending_;
    std::priority_queue<InFlight, std::vector<InFlight>, LaterFirst> in_flight_;
    std::uint64_t order_ = 0;
    bool paused_ = false;
    ChannelStats stats_;
};

}  // namespace puppetcast::transport
