#include "puppetcast/codec/delta.hpp"

#include <cmath>
#include <stdexcept>

#include "byte_order.hpp"

namespace puppetcast::codec {

namespace {

void put_varint(std::vector<std::uint8_t>& out, std::uint32_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(v | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(v));
}

template <std::size_t N>
void put_deltas(std::vector<std::uint8_t>& out, const std::array<std::uint16_t, N>& prev,
                const std::array<std::uint16_t, N>& cur) {
    for (std::size_t i = 0; i < N; ++i) {
        const std::int32_t d = static_cast<std::int32_t>(cur[i]) - static_cast<std::int32_t>(prev[i]);
        put_varint(out, zigzag_encode(d));
    }
}

class DeltaReader {
public:
    explicit DeltaReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::optional<CodecError> read_value(std::uint16_t prev, std::uint16_t& out) {
        std::uint32_t z = 0;
        for (std::size_t k = 0;; ++k) {
            if (k == kMaxVarintBytes) {
                return CodecError::VarintOverflow;
            }
            if (pos_ >= in_.size()) {
                return CodecError::TruncatedDelta;
            }
            const std::uint8_t b = in_[pos_++];
            z |= static_cast<std::uint32_t>(b & 0x7F) << (7 * k);
            if ((b & 0x80) == 0) {
                break;
            }
        }
        const std::int32_t v = static_cast<std::int32_t>(prev) + zigzag_decode(z);
        if (v < 0 || v > 0xFFFF) {
            return CodecError::ValueOutOfRange;
        }
        out = static_cast<std::uint16_t>(v);
        return std::nullopt;
    }

    template <std::size_t N>
    std::optional<CodecError> read_values(const std::array<std::uint16_t, N>& prev,
                                          std::array<std::uint16_t, N>& out) {
        for (std::size_t i = 0; i < N; ++i) {
            if (auto err = read_value(prev[i], out[i])) {
                return err;
            }
        }
        return std::nullopt;
    }

    std::optional<CodecError> read_f32(float& out) {
        if (in_.size() - pos_ < 4) {
            return CodecError::TruncatedDelta;
        }
        out = detail::get_f32(in_.data() + pos_);
        pos_ += 4;
        return std::nullopt;
    }

    bool at_end() const { return pos_ == in_.size(); }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace

Expected<std::vector<std::uint8_t>, CodecError> delta_encode(const QuantizedFrame& prev,
                                                             const QuantizedFrame& cur) {
    if (prev.presence_flags() != cur.presence_flags()) {
        return unexpected(CodecError::PresenceMismatch);
    }
    if (cur.presence_flags() == 0) {
        return unexpected(CodecError::NoBlocks);
    }
    std::vector<std::uint8_t> out;
    out.reserve(kPayloadSize);
    if (cur.pose) {
        put_deltas(out, prev.pose->values, cur.pose->values);
    }
    if (cur.face) {
        put_deltas(out, prev.face->values, cur.face->values);
        std::uint8_t raw[4];
        detail::put_f32(raw, cur.face->score);
        out.insert(out.end(), raw, raw + 4);
    }
    return out;
}

Expected<QuantizedFrame, CodecError> delta_decode(const QuantizedFrame& prev,
                                                  std::span<const std::uint8_t> payload) {
    DeltaReader reader(payload);
    QuantizedFrame cur = prev;
    if (prev.pose) {
        if (auto err = reader.read_values(prev.pose->values, cur.pose->values)) {
            return unexpected(*err);
        }
    }
    if (prev.face) {
        if (auto err = reader.read_values(prev.face->values, cur.face->values)) {
            return unexpected(*err);
        }
        if (auto err = reader.read_f32(cur.face->score)) {
            return unexpected(*err);
        }
        if (!(std::isfinite(cur.face->score) && cur.face->score >= 0.0F &&
              cur.face->score <= 1.0F)) {
            return unexpected(CodecError::InvalidFaceScore);
        }
    }
    if (!reader.at_end()) {
        return unexpected(CodecError::TrailingBytes);
    }
    return cur;
}

StreamEncoder::StreamEncoder(bool delta_enabled, std::uint32_t keyframe_interval)
    : delta_enabled_(delta_enabled), keyframe_interval_(keyframe_interval) {
    if (keyframe_interval_ == 0) {
        throw std::invalid_argument("keyframe interval must be positive");
    }
}

Expected<std::vector<std::uint8_t>, CodecError> StreamEncoder::encode(
    const keypoint::KeypointFrame& frame) {
    QuantizedFrame q = quantize(frame);
    const bool need_key = !delta_enabled_ || !reference_ ||
                          reference_->presence_flags() != q.presence_flags() ||
                          since_keyframe_ >= keyframe_interval_;
    if (need_key) {
        auto bytes = encode_frame(q);
        if (!bytes) {
            return bytes;
        }
        reference_ = q;
        since_keyframe_ = 1;
        ++keyframes_;
        return bytes;
    }
    auto payload = delta_encode(*reference_, q);
    if (!payload) {
        return payload;
    }
    std::vector<std::uint8_t> out(kHeaderSize);
    out.reserve(kHeaderSize + payload->size());
    write_header(FrameHeader{kWireVersion, static_cast<std::uint8_t>(q.presence_flags() | kFlagDelta),
                             q.seq, q.capture_ts_ms},
                 std::span<std::uint8_t, kHeaderSize>(out.data(), kHeaderSize));
    out.insert(out.end(), payload->begin(), payload->end());
    reference_ = q;
    ++since_keyframe_;
    ++delta_frames_;
    return out;
}

Expected<DecodedFrame, CodecError> StreamDecoder::decode(std::span<const std::uint8_t> bytes) {
    auto header = parse_header(bytes);
    if (!header) {
        return unexpected(header.error());
    }
    QuantizedFrame q;
    if (!header->is_delta()) {
        auto full = decode_quantized(bytes);
        if (!full) {
            return unexpected(full.error());
        }
        q = *full;
    } else {
        if (!reference_ || static_cast<std::uint16_t>(reference_->seq + 1) != header->seq) {
            return unexpected(CodecError::MissingReference);
        }
        if ((header->flags & (kFlagPose | kFlagFace)) != reference_->presence_flags()) {
            return unexpected(CodecError::PresenceMismatch);
        }
        auto cur = delta_decode(*reference_, bytes.subspan(kHeaderSize));
        if (!cur) {
            return unexpected(cur.error());
        }
        q = *cur;
        q.seq = header->seq;
        q.capture_ts_ms = header->capture_ts_ms;
    }
    reference_ = q;
    return DecodedFrame{*header, dequantize(q)};
}

}  // namespace puppetcast::codec
