#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "puppetcast/common/expected.hpp"
#include "puppetcast/transport/clock_offset.hpp"
#include "puppetcast/transport/throttle.hpp"

namespace puppetcast::transport {

struct SessionConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 8765;
    std::string room;
    std::string peer_id;
    ChannelConfig channel;
    std::chrono::milliseconds connect_timeout{3000};
    std::size_t receive_capacity = 256;
};

struct SessionError {
    enum class Kind { Unreachable, Rejected, RoomFull, Protocol, Closed };
    Kind kind = Kind::Protocol;
    std::string message;
    bool retryable = false;
};

struct ReceivedFrame {
    std::string sender;
    std::vector<std::uint8_t> bytes;
    double recv_ms = 0.0;  // local monotonic clock
};

struct SessionCounters {
    std::uint64_t frames_offered = 0;
    std::uint64_t frames_sent = 0;  // handed to the relay
    std::uint64_t dropped_overflow = 0;
    std::uint64_t lost = 0;
    std::uint64_t frames_received = 0;
    std::uint64_t stale_dropped = 0;
    std::uint64_t receive_overflow = 0;
};

/// One peer's connection to the relay: outgoing frames pass through a ThrottledChannel
/// (held while the room has no other members), incoming frames are admitted in order per
/// sender. send_frame may be called from one thread while another calls recv_frame.
class PeerSession {
public:
    static Expected<std::unique_ptr<PeerSession>, SessionError> open(SessionConfig config);

    ~PeerSession();
    PeerSession(const PeerSession&) = delete;
    PeerSession& operator=(const PeerSession&) = delete;

    ThrottledChannel::OfferResult send_frame(std::vector<std::uint8_t> frame);

    /// Next admitted frame, or nullopt on timeout or once the session is closed and drained.
    std::optional<ReceivedFrame> recv_frame(std::chrono::milliseconds timeout);

    /// Pings the relay `n_pings` times (sequentially) and estimates relay clock minus local
    /// clock. Partial results are returned with their sample count; zero pongs is an error.
    Expected<OffsetEstimate, std::string> estimate_clock_offset(
        std::size_t n_pings = 10, std::chrono::milliseconds timeout = std::chrono::milliseconds(500));

    /// Blocks until at least `n` other peers are in the room or the timeout passes.
    bool wait_for_peers(std::size_t n, std::chrono::milliseconds timeout);

    /// Blocks until every offered frame has departed the channel or the timeout passes.
    bool flush(std::chrono::milliseconds timeout);

    std::vector<std::string> remote_peers() const;
    SessionCounters counters() const;
    bool is_open() const;
    std::optional<std::string> close_reason() const;

    /// Sends leave, closes the socket and joins the I/O threads. Idempotent.
    void close();

    const std::string& peer_id() const noexcept;
    const std::string& room() const noexcept;

private:
    PeerSession() = default;
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

}  // namespace puppetcast::transport
