#include "puppetcast/codec/wire.hpp"

#include <algorithm>
#include <cmath>

#include "byte_order.hpp"
#include "puppetcast/keypoint/quantize.hpp"

namespace puppetcast::codec {

using keypoint::dequantize_coord;
using keypoint::quantize_coord;

std::string_view to_string(CodecError e) noexcept {
    switch (e) {
        case CodecError::TooShort: return "too short";
        case CodecError::BadVersion: return "unsupported version";
        case CodecError::ReservedFlags: return "reserved flag bits set";
        case CodecError::NoBlocks: return "no pose or face block";
        case CodecError::LengthMismatch: return "length does not match flags";
        case CodecError::InvalidFaceScore: return "face score not finite in [0,1]";
        case CodecError::DeltaNeedsContext: return "delta frame needs a stream decoder";
        case CodecError::VarintOverflow: return "varint longer than 3 bytes";
        case CodecError::ValueOutOfRange: return "delta leaves the 16-bit range";
        case CodecError::TruncatedDelta: return "delta payload truncated";
        case CodecError::TrailingBytes: return "trailing bytes after payload";
        case CodecError::PresenceMismatch: return "block presence differs from reference";
        case CodecError::MissingReference: return "delta reference frame missing";
    }
    return "unknown codec error";
}

QuantizedPose quantize(const keypoint::PoseFrame& pose) {
    QuantizedPose q;
    for (std::size_t i = 0; i < keypoint::kPoseKeypointCount; ++i) {
        const auto& kp = pose.keypoints[i];
        q.values[3 * i] = quantize_coord(kp.x);
        q.values[3 * i + 1] = quantize_coord(kp.y);
        q.values[3 * i + 2] = quantize_coord(kp.confidence);
    }
    q.values[kPoseValueCount - 1] = quantize_coord(pose.score);
    return q;
}

QuantizedFace quantize(const keypoint::FaceFrame& face) {
    QuantizedFace q;
    for (std::size_t i = 0; i < keypoint::kFacePointCount; ++i) {
        q.values[2 * i] = quantize_coord(face.points[i].x);
        q.values[2 * i + 1] = quantize_coord(face.points[i].y);
    }
    const double s = std::isfinite(face.score) ? std::clamp(face.score, 0.0, 1.0) : 0.0;
    q.score = static_cast<float>(s);
    return q;
}

QuantizedFrame quantize(const keypoint::KeypointFrame& frame) {
    QuantizedFrame q;
    q.seq = frame.seq;
    q.capture_ts_ms = frame.capture_ts_ms;
    if (frame.pose) {
        q.pose = quantize(*frame.pose);
    }
    if (frame.face) {
        q.face = quantize(*frame.face);
    }
    return q;
}

keypoint::PoseFrame dequantize(const QuantizedPose& q) {
    keypoint::PoseFrame pose;
    for (std::size_t i = 0; i < keypoint::kPoseKeypointCount; ++i) {
        pose.keypoints[i] = {dequantize_coord(q.values[3 * i]),
                             dequantize_coord(q.values[3 * i + 1]),
                             dequantize_coord(q.values[3 * i + 2])};
    }
    pose.score = dequantize_coord(q.values[kPoseValueCount - 1]);
    return pose;
}

keypoint::FaceFrame dequantize(const QuantizedFace& q) {
    keypoint::FaceFrame face;
    for (std::size_t i = 0; i < keypoint::kFacePointCount; ++i) {
        face.points[i] = {dequantize_coord(q.values[2 * i]), dequantize_coord(q.values[2 * i + 1])};
    }
    face.score = static_cast<double>(q.score);
    return face;
}

keypoint::KeypointFrame dequantize(const QuantizedFrame& q) {
    keypoint::KeypointFrame f;
    f.seq = q.seq;
    f.capture_ts_ms = q.capture_ts_ms;
    if (q.pose) {
        f.pose = dequantize(*q.pose);
    }
    if (q.face) {
        f.face = dequantize(*q.face);
    }
    return f;
}

namespace {

void write_pose(const QuantizedPose& q, std::uint8_t* out) {
    for (std::size_t i = 0; i < kPoseValueCount; ++i) {
        detail::put_u16(out + 2 * i, q.values[i]);
    }
}

void write_face(const QuantizedFace& q, std::uint8_t* out) {
    for (std::size_t i = 0; i < kFaceValueCount; ++i) {
        detail::put_u16(out + 2 * i, q.values[i]);
    }
    detail::put_f32(out + 2 * kFaceValueCount, q.score);
}

QuantizedPose read_pose(const std::uint8_t* in) {
    QuantizedPose q;
    for (std::size_t i = 0; i < kPoseValueCount; ++i) {
        q.values[i] = detail::get_u16(in + 2 * i);
    }
    return q;
}

bool valid_face_score(float s) { return std::isfinite(s) && s >= 0.0F && s <= 1.0F; }

Expected<QuantizedFace, CodecError> read_face(const std::uint8_t* in) {
    QuantizedFace q;
    for (std::size_t i = 0; i < kFaceValueCount; ++i) {
        q.values[i] = detail::get_u16(in + 2 * i);
    }
    q.score = detail::get_f32(in + 2 * kFaceValueCount);
    if (!valid_face_score(q.score)) {
        return unexpected(CodecError::InvalidFaceScore);
    }
    return q;
}

}  // namespace

std::array<std::uint8_t, kPoseBlockSize> encode_pose(const keypoint::PoseFrame& pose) {
    std::array<std::uint8_t, kPoseBlockSize> out{};
    write_pose(quantize(pose), out.data());
    return out;
}

std::array<std::uint8_t, kFaceBlockSize> encode_face(const keypoint::FaceFrame& face) {
    std::array<std::uint8_t, kFaceBlockSize> out{};
    write_face(quantize(face), out.data());
    return out;
}

Expected<keypoint::PoseFrame, CodecError> decode_pose(std::span<const std::uint8_t> block) {
    if (block.size() != kPoseBlockSize) {
        return unexpected(CodecError::LengthMismatch);
    }
    return dequantize(read_pose(block.data()));
}

Expected<keypoint::FaceFrame, CodecError> decode_face(std::span<const std::uint8_t> block) {
    if (block.size() != kFaceBlockSize) {
        return unexpected(CodecError::LengthMismatch);
    }
    auto q = read_face(block.data());
    if (!q) {
        return unexpected(q.error());
    }
    return dequantize(*q);
}

void write_header(const FrameHeader& header, std::span<std::uint8_t, kHeaderSize> out) {
    out[0] = header.version;
    out[1] = header.flags;
    detail::put_u16(out.data() + 2, header.seq);
    detail::put_u32(out.data() + 4, header.capture_ts_ms);
}

Expected<FrameHeader, CodecError> parse_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize) {
        return unexpected(CodecError::TooShort);
    }
    FrameHeader h;
    h.version = bytes[0];
    h.flags = bytes[1];
    h.seq = detail::get_u16(bytes.data() + 2);
    h.capture_ts_ms = detail::get_u32(bytes.data() + 4);
    if (h.version != kWireVersion) {
        return unexpected(CodecError::BadVersion);
    }
    if ((h.flags & kReservedFlagMask) != 0) {
        return unexpected(CodecError::ReservedFlags);
    }
    if (!h.has_pose() && !h.has_face()) {
        return unexpected(CodecError::NoBlocks);
    }
    return h;
}

std::size_t full_frame_size(std::uint8_t flags) noexcept {
    return kHeaderSize + ((flags & kFlagPose) ? kPoseBlockSize : 0) +
           ((flags & kFlagFace) ? kFaceBlockSize : 0);
}

Expected<std::vector<std::uint8_t>, CodecError> encode_frame(const QuantizedFrame& frame) {
    const std::uint8_t flags = frame.presence_flags();
    if (flags == 0) {
        return unexpected(CodecError::NoBlocks);
    }
    std::vector<std::uint8_t> out(full_frame_size(flags));
    write_header(FrameHeader{kWireVersion, flags, frame.seq, frame.capture_ts_ms},
                 std::span<std::uint8_t, kHeaderSize>(out.data(), kHeaderSize));
    std::uint8_t* cursor = out.data() + kHeaderSize;
    if (frame.pose) {
        write_pose(*frame.pose, cursor);
        cursor += kPoseBlockSize;
    }
    if (frame.face) {
        write_face(*frame.face, cursor);
    }
    return out;
}

Expected<std::vector<std::uint8_t>, CodecError> encode_frame(const keypoint::KeypointFrame& frame) {
    return encode_frame(quantize(frame));
}

Expected<QuantizedFrame, CodecError> decode_quantized(std::span<const std::uint8_t> bytes) {
    auto header = parse_header(bytes);
    if (!header) {
        return unexpected(header.error());
    }
    if (header->is_delta()) {
        return unexpected(CodecError::DeltaNeedsContext);
    }
    const std::size_t expected = full_frame_size(header->flags);
    if (bytes.size() < expected) {
        return unexpected(CodecError::LengthMismatch);
    }
    if (bytes.size() > expected) {
        return unexpected(CodecError::TrailingBytes);
    }
    QuantizedFrame q;
    q.seq = header->seq;
    q.capture_ts_ms = header->capture_ts_ms;
    const std::uint8_t* cursor = bytes.data() + kHeaderSize;
    if (header->has_pose()) {
        q.pose = read_pose(cursor);
        cursor += kPoseBlockSize;
    }
    if (header->has_face()) {
        auto face = read_face(cursor);
        if (!face) {
            return unexpected(face.error());
        }
        q.face = *face;
    }
    return q;
}

Expected<DecodedFrame, CodecError> decode_frame(std::span<const std::uint8_t> bytes) {
    auto q = decode_quantized(bytes);
    if (!q) {
        return unexpected(q.error());
    }
    DecodedFrame out;
    out.header = FrameHeader{kWireVersion, q->presence_flags(), q->seq, q->capture_ts_ms};
    out.frame = dequantize(*q);
    return out;
}

}  // namespace puppetcast::codec
