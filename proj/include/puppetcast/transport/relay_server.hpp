#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "puppetcast/common/expected.hpp"
#include "puppetcast/transport/room_registry.hpp"

namespace puppetcast::transport {

struct RelayConfig {
    std::string address = "127.0.0.1";
    std::uint16_t port = 8765;  // 0 picks an ephemeral port
    RoomPolicy policy;
    std::size_t io_threads = 2;
    std::function<void(std::string_view)> log;  // join/leave/room events
};

struct RelayStats {
    std::uint64_t connections_accepted = 0;
    std::uint64_t frames_relayed = 0;   // incoming binary frames fanned out
    std::uint64_t deliveries = 0;       // outgoing binary frames
    std::uint64_t control_errors = 0;
};

/// WebSocket signaling server and data relay.
///
/// Peers send `join` with room and peer id; every member then receives the room roster as
/// `peer-list`. Binary frames from a joined peer are forwarded to every other member of
/// its room, prefixed with the sender id. `ping` is answered with `pong`.
class RelayServer {
public:
    explicit RelayServer(RelayConfig config);
    ~RelayServer();

    RelayServer(const RelayServer&) = delete;
    RelayServer& operator=(const RelayServer&) = delete;

    /// Binds, listens and starts the I/O threads. Returns the bound port.
    Expected<std::uint16_t, std::string> start();

    /// Sends close frames to every client, stops accepting and joins the I/O threads.
    void stop();

    std::uint16_t port() const noexcept;
    RelayStats stats() const;
    std::size_t connection_count() const;

    /// Milliseconds since the server started; the time base of ping/pong timestamps.
    double server_time_ms() const;

    struct Impl;

private:
    std::shared_ptr<Impl> impl_;
};

}  // namespace puppetcast::transport
