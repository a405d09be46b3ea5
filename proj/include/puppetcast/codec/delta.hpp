#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "puppetcast/codec/wire.hpp"

namespace puppetcast::codec {

// Lossless inter-frame coding. Every 16-bit value is sent as the zigzag-mapped signed
// difference from the reference frame, written as a little-endian base-128 varint
// (at most 3 bytes). Order: 52 pose values, 146 face values, then the face score as a
// raw big-endian float. A static pose+face frame therefore costs 52 + 146 + 4 = 202 bytes.

inline constexpr std::size_t kMaxVarintBytes = 3;
inline constexpr std::uint32_t kDefaultKeyframeInterval = 30;

inline constexpr std::uint32_t zigzag_encode(std::int32_t d) noexcept {
    return d >= 0 ? static_cast<std::uint32_t>(d) * 2U : static_cast<std::uint32_t>(-d) * 2U - 1U;
}

inline constexpr std::int32_t zigzag_decode(std::uint32_t z) noexcept {
    return (z & 1U) ? -static_cast<std::int32_t>((z + 1U) / 2U) : static_cast<std::int32_t>(z / 2U);
}

/// Requires identical block presence; PresenceMismatch signals that a keyframe is needed.
Expected<std::vector<std::uint8_t>, CodecError> delta_encode(const QuantizedFrame& prev,
                                                             const QuantizedFrame& cur);

/// Exact inverse of delta_encode. The returned frame keeps prev's seq/timestamp; callers
/// stamp them from the frame header.
Expected<QuantizedFrame, CodecError> delta_decode(const QuantizedFrame& prev,
                                                  std::span<const std::uint8_t> payload);

/// Per-stream encoder state. Emits full-precision keyframes on the first frame, every
/// `keyframe_interval` frames and whenever block presence changes; delta frames otherwise.
class StreamEncoder {
public:
    explicit StreamEncoder(bool delta_enabled = true,
                           std::uint32_t keyframe_interval = kDefaultKeyframeInterval);

    Expected<std::vector<std::uint8_t>, CodecError> encode(const keypoint::KeypointFrame& frame);

    // Forces the next frame to be a keyframe (e.g. after a receiver reports loss).
    void request_keyframe() noexcept { reference_.reset(); }

    std::uint64_t keyframes() const noexcept { return keyframes_; }
    std::uint64_t delta_frames() const noexcept { return delta_frames_; }

private:
    bool delta_enabled_;
    std::uint32_t keyframe_interval_;
    std::uint32_t since_keyframe_ = 0;
    std::optional<QuantizedFrame> reference_;
    std::uint64_t keyframes_ = 0;
    std::uint64_t delta_frames_ = 0;
};

/// Per-stream decoder state. A delta frame is accepted only when it directly follows the
/// last reconstructed frame (seq + 1, wrapping); otherwise MissingReference until the next
/// keyframe arrives.
class StreamDecoder {
public:
    Expected<DecodedFrame, CodecError> decode(std::span<const std::uint8_t> bytes);

    void reset() noexcept { reference_.reset(); }

private:
    std::optional<QuantizedFrame> reference_;
};

}  // namespace puppetcast::codec
