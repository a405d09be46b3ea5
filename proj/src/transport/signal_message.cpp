#include "puppetcast/transport/signal_message.hpp"

#include <array>
#include <cmath>
#include <utility>

#include <nlohmann/json.hpp>

namespace puppetcast::transport {

namespace {

constexpr std::array<std::pair<SignalType, std::string_view>, 8> kTypeNames = {{
    {SignalType::Join, "join"},
    {SignalType::Joined, "joined"},
    {SignalType::PeerList, "peer-list"},
    {SignalType::Leave, "leave"},
    {SignalType::Data, "data"},
    {SignalType::Ping, "ping"},
    {SignalType::Pong, "pong"},
    {SignalType::Error, "error"},
}};

}  // namespace

std::string_view to_string(SignalType t) noexcept {
    for (const auto& [type, name] : kTypeNames) {
        if (type == t) {
            return name;
        }
    }
    return "error";
}

std::optional<SignalType> signal_type_from(std::string_view s) noexcept {
    for (const auto& [type, name] : kTypeNames) {
        if (name == s) {
            return type;
        }
    }
    return std::nullopt;
}

std::string to_json(const SignalMessage& msg) {
    nlohmann::ordered_json j;
    j["type"] = to_string(msg.type);
    j["room"] = msg.room;
    j["peer"] = msg.peer;
    j["ts_ms"] = msg.ts_ms;
    if (msg.peers) {
        j["peers"] = *msg.peers;
    }
    if (msg.error) {
        j["error"] = *msg.error;
    }
    if (msg.echo_ts_ms) {
        j["echo_ts_ms"] = *msg.echo_ts_ms;
    }
    return j.dump();
}

Expected<SignalMessage, std::string> parse_signal(std::string_view text) {
    const auto j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        return unexpected(std::string("control message is not a JSON object"));
    }
    SignalMessage msg;
    const auto type_it = j.find("type");
    if (type_it == j.end() || !type_it->is_string()) {
        return unexpected(std::string("control message lacks a string \"type\""));
    }
    const auto type = signal_type_from(type_it->get_ref<const std::string&>());
    if (!type) {
        return unexpected("unknown message type \"" + type_it->get<std::string>() + "\"");
    }
    msg.type = *type;

    auto read_string = [&j](const char* key, std::string& out) -> bool {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            return true;
        }
        if (!it->is_string()) {
            return false;
        }
        out = it->get<std::string>();
        return true;
    };
    auto read_number = [&j](const char* key, double& out) -> bool {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            return true;
        }
        if (!it->is_number()) {
            return false;
        }
        out = it->get<double>();
        return std::isfinite(out);
    };
    if (!read_string("room", msg.room) || !read_string("peer", msg.peer)) {
        return unexpected(std::string("\"room\" and \"peer\" must be strings"));
    }
    if (!read_number("ts_ms", msg.ts_ms)) {
        return unexpected(std::string("\"ts_ms\" must be a finite number"));
    }
    if (auto it = j.find("peers"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) {
            return unexpected(std::string("\"peers\" must be an array of strings"));
        }
        std::vector<std::string> peers;
        for (const auto& p : *it) {
            if (!p.is_string()) {
                return unexpected(std::string("\"peers\" must be an array of strings"));
            }
            peers.push_back(p.get<std::string>());
        }
        msg.peers = std::move(peers);
    }
    if (auto it = j.find("error"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) {
            return unexpected(std::string("\"error\" must be a string"));
        }
        msg.error = it->get<std::string>();
    }
    if (auto it = j.find("echo_ts_ms"); it != j.end() && !it->is_null()) {
        double v = 0.0;
        if (!read_number("echo_ts_ms", v)) {
            return unexpected(std::string("\"echo_ts_ms\" must be a finite number"));
        }
        msg.echo_ts_ms = v;
    }
    return msg;
}

std::vector<std::uint8_t> wrap_relay_data(std::string_view sender,
                                          std::span<const std::uint8_t> payload) {
    std::vector<std::uint8_t> out;
    const std::size_t n = std::min<std::size_t>(sender.size(), 255);
    out.reserve(1 + n + payload.size());
    out.push_back(static_cast<std::uint8_t>(n));
    out.insert(out.end(), sender.begin(), sender.begin() + static_cast<std::ptrdiff_t>(n));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Expected<RelayData, std::string> unwrap_relay_data(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) {
        return unexpected(std::string("empty relay frame"));
    }
    const std::size_t n = bytes[0];
    if (bytes.size() < 1 + n) {
        return unexpected(std::string("relay frame shorter than its sender id"));
    }
    RelayData d;
    d.sender.assign(reinterpret_cast<const char*>(bytes.data() + 1), n);
    d.payload.assign(bytes.begin() + 1 + static_cast<std::ptrdiff_t>(n), bytes.end());
    return d;
}

bool valid_identifier(std::string_view id) noexcept {
    if (id.empty() || id.size() > 64) {
        return false;
    }
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '.' || c == '_' || c == '-';
        if (!ok) {
            return false;
        }
    }
    return true;
}

}  // namespace puppetcast::transport
