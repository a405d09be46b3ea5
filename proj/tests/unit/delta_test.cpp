#include "puppetcast/codec/delta.hpp"

#include <random>

#include <gtest/gtest.h>

#include "golden_vectors.hpp"

namespace puppetcast::codec {
namespace {

using keypoint::KeypointFrame;

// Independent byte-count oracle: count varint bytes of the zigzagged difference directly.
std::size_t oracle_delta_size(const QuantizedFrame& prev, const QuantizedFrame& cur) {
    auto varint_len = [](long long d) {
        unsigned long long z = d >= 0 ? static_cast<unsigned long long>(2 * d)
                   : static_cast<unsigned long long>(-2 * d - 1);
        std::size_t n = 1;
        while (z >= 128) {
            z /= 128;
            ++n;
        }
        return n;
    };
    std::size_t total = 0;
    if (cur.pose) {
        for (std::size_t i = 0; i < kPoseValueCount; ++i) {
            total += varint_len(static_cast<long long>(cur.pose->values[i]) - prev.pose->values[i]);
        }
    }
    if (cur.face) {
        for (std::size_t i = 0; i < kFaceValueCount; ++i) {
            total += varint_len(static_cast<long long>(cur.face->values[i]) - prev.face->values[i]);
        }
        total += 4;
    }
    return total;
}

QuantizedFrame random_quantized(std::mt19937_64& rng, bool pose, bool face) {
    QuantizedFrame q;
    if (pose) {
        QuantizedPose p;
        for (auto& v : p.values) {
            v = static_cast<std::uint16_t>(rng());
        }
        q.pose = p;
    }
    if (face) {
        QuantizedFace f;
        for (auto& v : f.values) {
            v = static_cast<std::uint16_t>(rng());
        }
        f.score = static_cast<float>(rng() % 1000) / 1000.0F;
        q.face = f;
    }
    return q;
}

// Nearby frame: small random walk from prev, the shape real motion produces.
QuantizedFrame perturb(std::mt19937_64& rng, QuantizedFrame q, int spread) {
    std::uniform_int_distribution<int> step(-spread, spread);
    auto walk = [&](std::uint16_t& v) {
        v = static_cast<std::uint16_t>(std::clamp(static_cast<int>(v) + step(rng), 0, 65535));
    };
    if (q.pose) {
        for (auto& v : q.pose->values) walk(v);
    }
    if (q.face) {
        for (auto& v : q.face->values) walk(v);
    }
    return q;
}

TEST(Zigzag, Mapping) {
    EXPECT_EQ(zigzag_encode(0), 0u);
    EXPECT_EQ(zigzag_encode(1), 2u);
    EXPECT_EQ(zigzag_encode(-1), 1u);
    EXPECT_EQ(zigzag_encode(-2), 3u);
    EXPECT_EQ(zigzag_encode(65535), 131070u);
    EXPECT_EQ(zigzag_encode(-65535), 131069u);
    for (std::int32_t d = -65535; d <= 65535; ++d) {
        ASSERT_EQ(zigzag_decode(zigzag_encode(d)), d);
    }
}

TEST(DeltaEncode, StaticPairIs202Bytes) {
    std::mt19937_64 rng(10);
    const auto q = random_quantized(rng, true, true);
    auto payload = delta_encode(q, q);
    ASSERT_TRUE(payload);
    EXPECT_EQ(payload->size(), 202u);
    EXPECT_EQ(payload->size(), oracle_delta_size(q, q));
    EXPECT_LT(payload->size(), kPayloadSize);
    for (std::size_t i = 0; i < 198; ++i) {
        ASSERT_EQ((*payload)[i], 0x00) << i;
    }
}

TEST(DeltaEncode, SingleStepIsZigzagTwo) {
    std::mt19937_64 rng(11);
    auto prev = random_quantized(rng, true, true);
    prev.pose->values[4] = 1000;
    auto cur = prev;
    cur.pose->values[4] = 1001;
    auto payload = *delta_encode(prev, cur);
    for (std::size_t i = 0; i < 198; ++i) {
        ASSERT_EQ(payload[i], i == 4 ? 0x02 : 0x00) << i;
    }
}

TEST(DeltaEncode, PresenceMismatchSignalsKeyframe) {
    std::mt19937_64 rng(12);
    auto res = delta_encode(random_quantized(rng, true, true), random_quantized(rng, true, false));
    ASSERT_FALSE(res);
    EXPECT_EQ(res.error(), CodecError::PresenceMismatch);
}

TEST(DeltaDecode, Errors) {
    std::mt19937_64 rng(13);
    const auto prev = random_quantized(rng, true, false);
    std::vector<std::uint8_t> overflow = {0x80, 0x80, 0x80, 0x01};
    EXPECT_EQ(delta_decode(prev, overflow).error(), CodecError::VarintOverflow);
    std::vector<std::uint8_t> truncated(10, 0x00);
    EXPECT_EQ(delta_decode(prev, truncated).error(), CodecError::TruncatedDelta);
    std::vector<std::uint8_t> trailing(53, 0x00);
    EXPECT_EQ(delta_decode(prev, trailing).error(), CodecError::TrailingBytes);

    auto low = prev;
    low.pose->values[0] = 0;
    std::vector<std::uint8_t> below(52, 0x00);
    below[0] = 0x01;  // -1
    EXPECT_EQ(delta_decode(low, below).error(), CodecError::ValueOutOfRange);
}

TEST(DeltaGolden, MatchesIndependentEncoder) {
    for (const char* name : {"delta_static", "delta_moved"}) {
        const auto v = testing::golden_vector(name);
        const auto prev = quantize(testing::frame_from_json(v["prev"]));
        const auto cur = quantize(testing::frame_from_json(v["frame"]));
        auto payload = delta_encode(prev, cur);
        ASSERT_TRUE(payload);
        const auto file = testing::read_bytes(testing::fixture_path("golden/" + v["file"].get<std::string>()));
        ASSERT_EQ(file.size(), kHeaderSize + payload->size()) << name;
        EXPECT_TRUE(std::equal(payload->begin(), payload->end(), file.begin() + kHeaderSize)) << name;
        EXPECT_EQ(payload->size(), oracle_delta_size(prev, cur));

        StreamDecoder dec;
        ASSERT_TRUE(dec.decode(*encode_frame(prev)));
        auto back = dec.decode(file);
        ASSERT_TRUE(back) << to_string(back.error());
        EXPECT_EQ(quantize(back->frame), cur);
    }
}

// Property: lossless on random pairs, both far apart and nearby.
TEST(DeltaProperty, RoundtripExact) {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 3000; ++i) {
        const bool pose = i % 3 != 2;
        const bool face = i % 3 != 0;
        const auto prev = random_quantized(rng, pose, face);
        const auto cur = i % 2 ? random_quantized(rng, pose, face) : perturb(rng, prev, 300);
        auto payload = delta_encode(prev, cur);
        ASSERT_TRUE(payload);
        EXPECT_EQ(payload->size(), oracle_delta_size(prev, cur));
        auto back = delta_decode(prev, *payload);
        ASSERT_TRUE(back);
        EXPECT_EQ(*back, cur);
    }
}

KeypointFrame frame_from_q(QuantizedFrame q, std::uint16_t seq) {
    q.seq = seq;
    q.capture_ts_ms = 100U * seq;
    return dequantize(q);
}

TEST(StreamCodec, KeyframeCadence) {
    std::mt19937_64 rng(15);
    StreamEncoder enc(true, 30);
    StreamDecoder dec;
    auto q = random_quantized(rng, true, true);
    for (std::uint16_t i = 0; i < 65; ++i) {
        q = perturb(rng, q, 20);
        const auto f = frame_from_q(q, i);
        auto bytes = enc.encode(f);
        ASSERT_TRUE(bytes);
        const bool key = i % 30 == 0;
        EXPECT_EQ(((*bytes)[1] & kFlagDelta) == 0, key) << i;
        auto back = dec.decode(*bytes);
        ASSERT_TRUE(back) << i;
        EXPECT_EQ(quantize(back->frame), quantize(f));
    }
    EXPECT_EQ(enc.keyframes(), 3u);
    EXPECT_EQ(enc.delta_frames(), 62u);
}

TEST(StreamCodec, PresenceChangeForcesKeyframe) {
    std::mt19937_64 rng(16);
    StreamEncoder enc;
    auto a = frame_from_q(random_quantized(rng, true, true), 0);
    auto b = frame_from_q(random_quantized(rng, true, false), 1);
    EXPECT_EQ((*enc.encode(a))[1], 0x03);
    EXPECT_EQ((*enc.encode(b))[1], 0x01);
    EXPECT_EQ((*enc.encode(frame_from_q(quantize(b), 2)))[1], 0x05);
}

TEST(StreamCodec, LossNeedsKeyframe) {
    std::mt19937_64 rng(17);
    StreamEncoder enc(true, 5);
    StreamDecoder dec;
    auto q = random_quantized(rng, true, true);
    std::vector<std::vector<std::uint8_t>> wire;
    for (std::uint16_t i = 0; i < 6; ++i) {
        wire.push_back(*enc.encode(frame_from_q(perturb(rng, q, 5), i)));
    }
    ASSERT_TRUE(dec.decode(wire[0]));
    ASSERT_TRUE(dec.decode(wire[1]));
    // frame 2 lost
    EXPECT_EQ(dec.decode(wire[3]).error(), CodecError::MissingReference);
    EXPECT_EQ(dec.decode(wire[4]).error(), CodecError::MissingReference);
    ASSERT_TRUE(dec.decode(wire[5]));  // keyframe (interval 5)
}

TEST(StreamCodec, DeltaDisabledAlwaysFull) {
    std::mt19937_64 rng(18);
    StreamEncoder enc(false);
    auto q = random_quantized(rng, true, true);
    for (std::uint16_t i = 0; i < 5; ++i) {
        EXPECT_EQ(enc.encode(frame_from_q(q, i))->size(), 408u);
    }
}

TEST(StreamCodec, SeqWrapsForDeltaReference) {
    std::mt19937_64 rng(19);
    StreamEncoder enc;
    StreamDecoder dec;
    auto q = random_quantized(rng, false, true);
    ASSERT_TRUE(dec.decode(*enc.encode(frame_from_q(q, 65535))));
    auto next = enc.encode(frame_from_q(q, 0));
    EXPECT_NE((*next)[1] & kFlagDelta, 0);
    EXPECT_TRUE(dec.decode(*next));
}

}  // namespace
}  // namespace puppetcast::codec
