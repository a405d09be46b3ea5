#include "puppetcast/transport/throttle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "puppetcast/codec/wire.hpp"

namespace puppetcast::transport {

namespace {
constexpr std::int64_t kUnitsPerBit = 1'000'000;  // bit-microseconds per bit
}

std::optional<std::string> validate(const ChannelConfig& c) {
    if (c.rate_bps > 0 && c.burst_bytes < codec::kMaxFrameSize) {
        return "burst_bytes must hold one full frame (>= 408) when rate_bps > 0";
    }
    if (c.burst_bytes > (std::uint64_t{1} << 32)) {
        return "burst_bytes too large";
    }
    if (c.rate_bps > 1'000'000'000'000ULL) {
        return "rate_bps too large";
    }
    // 1.0 is accepted as the degenerate drop-everything channel.
    if (!(c.loss_prob >= 0.0 && c.loss_prob <= 1.0)) {
        return "loss_prob must be in [0,1]";
    }
    if (c.queue_capacity == 0) {
        return "queue_capacity must be positive";
    }
    return std::nullopt;
}

TokenBucket::TokenBucket(std::uint64_t rate_bps, std::uint64_t burst_bytes, Micros start)
    : rate_bps_(rate_bps),
      capacity_(static_cast<std::int64_t>(burst_bytes) * 8 * kUnitsPerBit),
      tokens_(capacity_),
      last_(start) {}

std::int64_t TokenBucket::tokens_at(Micros at) const {
    if (at <= last_) {
        return tokens_;
    }
    const std::int64_t dt = (at - last_).count();
    const auto rate = static_cast<std::int64_t>(rate_bps_);
    // Anything beyond the time to refill completely just fills the bucket.
    const std::int64_t fill_time = (capacity_ - tokens_) / std::max<std::int64_t>(rate, 1) + 1;
    if (dt >= fill_time) {
        return capacity_;
    }
    return std::min(capacity_, tokens_ + dt * rate);
}

Micros TokenBucket::ready_at(std::size_t bytes, Micros at) const {
    if (unlimited()) {
        return at;
    }
    const std::int64_t need = static_cast<std::int64_t>(bytes) * 8 * kUnitsPerBit;
    const Micros from = std::max(at, last_);
    const std::int64_t have = tokens_at(from);
    if (have >= need) {
        return from;
    }
    const auto rate = static_cast<std::int64_t>(rate_bps_);
    const std::int64_t wait = (need - have + rate - 1) / rate;
    return from + Micros{wait};
}

void TokenBucket::consume(std::size_t bytes, Micros at) {
    if (unlimited()) {
        return;
    }
    const std::int64_t need = static_cast<std::int64_t>(bytes) * 8 * kUnitsPerBit;
    const Micros when = std::max(at, last_);
    tokens_ = tokens_at(when) - need;
    last_ = when;
    if (tokens_ < 0) {
        throw std::logic_error("token bucket consumed before tokens were available");
    }
}

ThrottleScheduler::ThrottleScheduler(const ChannelConfig& config, Micros start)
    : config_(config), bucket_(config.rate_bps, config.burst_bytes, start), rng_(config.seed) {
    if (auto err = validate(config_)) {
        throw std::invalid_argument(*err);
    }
}

Micros ThrottleScheduler::earliest_departure(std::size_t bytes, Micros arrival) const {
    const Micros from = last_departure_ == Micros::min() ? arrival : std::max(arrival, last_departure_);
    return bucket_.ready_at(bytes, from);
}

Schedule ThrottleScheduler::commit(std::size_t bytes, Micros departure) {
    bucket_.consume(bytes, departure);
    last_departure_ = departure;
    Schedule s;
    s.departure = departure;
    // Draw order is fixed (loss, then jitter) so a seed reproduces the whole run.
    const bool lost =
        config_.loss_prob > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < config_.loss_prob;
    std::int64_t jitter_us = 0;
    if (config_.jitter_ms > 0) {
        const std::int64_t j = static_cast<std::int64_t>(config_.jitter_ms) * 1000;
        jitter_us = std::uniform_int_distribution<std::int64_t>(-j, j)(rng_);
    }
    if (lost) {
        s.drop = DropReason::Lost;
        s.delivery = departure;
        return s;
    }
    const Micros delivery = departure + Micros{static_cast<std::int64_t>(config_.base_delay_ms) * 1000 + jitter_us};
    s.delivery = std::max(delivery, departure);
    return s;
}

Schedule ThrottleScheduler::throttled_send(std::size_t bytes, Micros now) {
    if (config_.rate_bps > 0 && bytes > config_.burst_bytes) {
        Schedule s;
        s.drop = DropReason::TooLarge;
        s.departure = now;
        s.delivery = now;
        return s;
    }
    return commit(bytes, earliest_departure(bytes, now));
}

ThrottledChannel::ThrottledChannel(const ChannelConfig& config, Micros start)
    : scheduler_(config, start) {}

ThrottledChannel::OfferResult ThrottledChannel::offer(std::vector<std::uint8_t> bytes, Micros now) {
    ++stats_.offered;
    const auto& cfg = scheduler_.config();
    if (cfg.rate_bps > 0 && bytes.size() > cfg.burst_bytes) {
        ++stats_.rejected_too_large;
        return OfferResult::RejectedTooLarge;
    }
    advance(now);
    OfferResult result = OfferResult::Queued;
    if (pending_.size() >= cfg.queue_capacity) {
        pending_.pop_front();
        ++stats_.dropped_overflow;
        result = OfferResult::QueuedDroppedOldest;
    }
    pending_.push_back(Pending{std::move(bytes), now});
    advance(now);
    return result;
}

std::optional<Micros> ThrottledChannel::next_departure() const {
    if (paused_ || pending_.empty()) {
        return std::nullopt;
    }
    const auto& head = pending_.front();
    return scheduler_.earliest_departure(head.bytes.size(), head.offered);
}

void ThrottledChannel::advance(Micros now) {
    while (auto dep = next_departure()) {
        if (*dep > now) {
            break;
        }
        Pending head = std::move(pending_.front());
        pending_.pop_front();
        const Schedule s = scheduler_.commit(head.bytes.size(), *dep);
        ++stats_.departed;
        if (!s.delivered()) {
            ++stats_.lost;
            continue;
        }
        in_flight_.push(InFlight{Delivery{std::move(head.bytes), head.offered, s.departure, s.delivery}, order_++});
    }
}

std::vector<Delivery> ThrottledChannel::poll(Micros now) {
    advance(now);
    std::vector<Delivery> out;
    while (!in_flight_.empty() && in_flight_.top().d.delivery <= now) {
        // priority_queue::top is const; the element is discarded right after the copy.
        Delivery d = std::move(const_cast<InFlight&>(in_flight_.top()).d);
        in_flight_.pop();
        ++stats_.delivered;
        stats_.bytes_delivered += d.bytes.size();
        out.push_back(std::move(d));
    }
    return out;
}

std::optional<Micros> ThrottledChannel::next_event() const {
    std::optional<Micros> next = next_departure();
    if (!in_flight_.empty()) {
        const Micros d = in_flight_.top().d.delivery;
        next = next ? std::min(*next, d) : d;
    }
    return next;
}

}  // namespace puppetcast::transport
