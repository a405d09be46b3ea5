#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "puppetcast/common/expected.hpp"
#include "puppetcast/keypoint/keypoint.hpp"

namespace puppetcast::codec {

// Wire layout (all multi-byte integers big-endian):
//
//   header  : version u8 | flags u8 | seq u16 | capture_ts_ms u32            =   8 bytes
//   pose    : 17 x (x u16, y u16, confidence u16) | score u16                = 104 bytes
//   face    : 73 x (x u16, y u16) | score f32 (IEEE-754)                     = 296 bytes
//
// Coordinates and pose confidences use the 16-bit lattice of keypoint::quantize_coord.
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 8;
inline constexpr std::size_t kPoseBlockSize = 104;
inline constexpr std::size_t kFaceBlockSize = 296;
inline constexpr std::size_t kPayloadSize = kPoseBlockSize + kFaceBlockSize;
inline constexpr std::size_t kMaxFrameSize = kHeaderSize + kPayloadSize;

static_assert(kPoseBlockSize * 8 == 832);
static_assert(kFaceBlockSize * 8 == 2368);
static_assert(kPayloadSize * 8 == 3200);
static_assert(kMaxFrameSize == 408);

inline constexpr std::uint8_t kFlagPose = 0x01;
inline constexpr std::uint8_t kFlagFace = 0x02;
inline constexpr std::uint8_t kFlagDelta = 0x04;
inline constexpr std::uint8_t kReservedFlagMask = 0xF8;

inline constexpr std::size_t kPoseValueCount = keypoint::kPoseKeypointCount * 3 + 1;  // 52
inline constexpr std::size_t kFaceValueCount = keypoint::kFacePointCount * 2;         // 146

enum class CodecError {
    TooShort,
    BadVersion,
    ReservedFlags,
    NoBlocks,
    LengthMismatch,
    InvalidFaceScore,
    DeltaNeedsContext,
    VarintOverflow,
    ValueOutOfRange,
    TruncatedDelta,
    TrailingBytes,
    PresenceMismatch,
    MissingReference,
};

std::string_view to_string(CodecError e) noexcept;

struct FrameHeader {
    std::uint8_t version = kWireVersion;
    std::uint8_t flags = 0;
    std::uint16_t seq = 0;
    std::uint32_t capture_ts_ms = 0;

    bool has_pose() const noexcept { return (flags & kFlagPose) != 0; }
    bool has_face() const noexcept { return (flags & kFlagFace) != 0; }
    bool is_delta() const noexcept { return (flags & kFlagDelta) != 0; }

    friend bool operator==(const FrameHeader&, const FrameHeader&) = default;
};

/// Pose values in wire order: x0,y0,c0, x1,y1,c1, ..., then the score.
struct QuantizedPose {
    std::array<std::uint16_t, kPoseValueCount> values{};
    friend bool operator==(const QuantizedPose&, const QuantizedPose&) = default;
};

/// Face values in wire order: x0,y0, x1,y1, ...; score travels as a 32-bit float.
struct QuantizedFace {
    std::array<std::uint16_t, kFaceValueCount> values{};
    float score = 0.0F;
    friend bool operator==(const QuantizedFace&, const QuantizedFace&) = default;
};

struct QuantizedFrame {
    std::uint16_t seq = 0;
    std::uint32_t capture_ts_ms = 0;
    std::optional<QuantizedPose> pose;
    std::optional<QuantizedFace> face;

    std::uint8_t presence_flags() const noexcept {
        return static_cast<std::uint8_t>((pose ? kFlagPose : 0) | (face ? kFlagFace : 0));
    }
    friend bool operator==(const QuantizedFrame&, const QuantizedFrame&) = default;
};

QuantizedPose quantize(const keypoint::PoseFrame& pose);
QuantizedFace quantize(const keypoint::FaceFrame& face);
QuantizedFrame quantize(const keypoint::KeypointFrame& frame);

keypoint::PoseFrame dequantize(const QuantizedPose& pose);
keypoint::FaceFrame dequantize(const QuantizedFace& face);
keypoint::KeypointFrame dequantize(const QuantizedFrame& frame);

std::array<std::uint8_t, kPoseBlockSize> encode_pose(const keypoint::PoseFrame& pose);
std::array<std::uint8_t, kFaceBlockSize> encode_face(const keypoint::FaceFrame& face);
Expected<keypoint::PoseFrame, CodecError> decode_pose(std::span<const std::uint8_t> block);
Expected<keypoint::FaceFrame, CodecError> decode_face(std::span<const std::uint8_t> block);

void write_header(const FrameHeader& header, std::span<std::uint8_t, kHeaderSize> out);
/// Parses and checks version and reserved bits; does not check the body length.
Expected<FrameHeader, CodecError> parse_header(std::span<const std::uint8_t> bytes);

/// Full-precision frame: header || pose block (if present) || face block (if present).
Expected<std::vector<std::uint8_t>, CodecError> encode_frame(const keypoint::KeypointFrame& frame);
Expected<std::vector<std::uint8_t>, CodecError> encode_frame(const QuantizedFrame& frame);

/// Expected total length of a full-precision frame carrying the given flags.
std::size_t full_frame_size(std::uint8_t flags) noexcept;

struct DecodedFrame {
    FrameHeader header;
    keypoint::KeypointFrame frame;
};

/// Strict parse of a full-precision frame. Total over arbitrary input: every malformed
/// input yields a CodecError. Delta-coded frames need a StreamDecoder.
Expected<DecodedFrame, CodecError> decode_frame(std::span<const std::uint8_t> bytes);
Expected<QuantizedFrame, CodecError> decode_quantized(std::span<const std::uint8_t> bytes);

}  // namespace puppetcast::codec
