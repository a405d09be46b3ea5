#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>

namespace puppetcast::transport {

/// Per-sender in-order admission of sequence numbers (16-bit, wrapping).
///
/// A frame is admitted when its seq is newer than the last admitted seq from the same
/// sender. Anything within `horizon` frames at or behind it is a stale or duplicate
/// arrival and is dropped. A seq further behind than the horizon is taken as a sender
/// restart and resynchronizes the gate.
class SequenceGate {
public:
    explicit SequenceGate(std::uint16_t horizon = 32) : horizon_(horizon) {}

    bool admit(const std::string& sender, std::uint16_t seq);

    std::uint64_t stale_dropped() const noexcept { return stale_dropped_; }
    std::uint64_t resyncs() const noexcept { return resyncs_; }

    void forget(const std::string& sender) { last_.erase(sender); }

private:
    std::uint16_t horizon_;
    std::unordered_map<std::string, std::uint16_t> last_;
    std::uint64_t stale_dropped_ = 0;
    std::uint64_t resyncs_ = 0;
};

/// Signed distance a - b on the 16-bit circle.
inline std::int32_t seq_distance(std::uint16_t a, std::uint16_t b) noexcept {
    return static_cast<std::int16_t>(static_cast<std::uint16_t>(a - b));
}

}  // namespace puppetcast::transport
