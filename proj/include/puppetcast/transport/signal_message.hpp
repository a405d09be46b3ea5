#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "puppetcast/common/expected.hpp"

namespace puppetcast::transport {

// Control messages travel as WebSocket text frames holding one JSON object:
//   {"type", "room", "peer", "ts_ms", optional "peers": [...], optional "error"}
// Pongs additionally carry "echo_ts_ms" (the ping's ts_ms); their ts_ms is the server's
// receive time. Data travels as binary frames (see relay envelope below).
enum class SignalType { Join, Joined, PeerList, Leave, Data, Ping, Pong, Error };

std::string_view to_string(SignalType t) noexcept;
std::optional<SignalType> signal_type_from(std::string_view s) noexcept;

struct SignalMessage {
    SignalType type = SignalType::Error;
    std::string room;
    std::string peer;
    double ts_ms = 0.0;
    std::optional<std::vector<std::string>> peers;
    std::optional<std::string> error;
    std::optional<double> echo_ts_ms;

    friend bool operator==(const SignalMessage&, const SignalMessage&) = default;
};

std::string to_json(const SignalMessage& msg);
Expected<SignalMessage, std::string> parse_signal(std::string_view text);

// Error strings sent by the relay.
namespace signal_error {
inline constexpr std::string_view kMalformed = "malformed";
inline constexpr std::string_view kNotJoined = "not-joined";
inline constexpr std::string_view kRoomFull = "room-full";
inline constexpr std::string_view kDuplicatePeer = "duplicate-peer";
inline constexpr std::string_view kEvicted = "evicted";
inline constexpr std::string_view kBadRequest = "bad-request";
}  // namespace signal_error

// Relay envelope for binary frames travelling server -> client:
//   u8 sender-id length | sender-id bytes (UTF-8) | payload
// Client -> server binary frames are the bare payload.
std::vector<std::uint8_t> wrap_relay_data(std::string_view sender, std::span<const std::uint8_t> payload);

struct RelayData {
    std::string sender;
    std::vector<std::uint8_t> payload;
};

Expected<RelayData, std::string> unwrap_relay_data(std::span<const std::uint8_t> bytes);

// Peer ids and room names: 1..64 bytes of [A-Za-z0-9._-].
bool valid_identifier(std::string_view id) noexcept;

}  // namespace puppetcast::transport
