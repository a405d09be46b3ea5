#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "puppetcast/codec/delta.hpp"
#include "puppetcast/keypoint/stabilizer.hpp"
#include "puppetcast/metrics/ledger.hpp"
#include "puppetcast/pipeline/clock.hpp"
#include "puppetcast/pipeline/error.hpp"
#include "puppetcast/pipeline/source.hpp"
#include "puppetcast/rig/rig.hpp"

namespace puppetcast::pipeline {

struct SenderOptions {
    std::string sender_id = "local";
    bool delta = false;
    std::uint32_t keyframe_interval = codec::kDefaultKeyframeInterval;
    double extract_delay_ms = 0.0;  // injected after the frame is produced
    double clock_offset_ms = 0.0;   // added to every stamp and to capture_ts_ms
};

struct OutgoingFrame {
    std::uint16_t seq = 0;
    std::vector<std::uint8_t> bytes;
};

/// Produce, stamp and encode. Records capture, extract_done and bytes; the caller records
/// send once the frame is handed to the channel.
class SenderStage {
public:
    SenderStage(SenderOptions options, metrics::LatencyLedger& ledger);

    Expected<OutgoingFrame, PipelineError> capture(FrameSource& source, Clock& clock);
    void mark_sent(std::uint16_t seq, double send_ms);

    const SenderOptions& options() const noexcept { return options_; }

private:
    SenderOptions options_;
    metrics::LatencyLedger& ledger_;
    codec::StreamEncoder encoder_;
};

struct ReceiverOptions {
    std::shared_ptr<const rig::BoundPuppet> puppet;  // null: decode and stabilize only
    std::optional<std::filesystem::path> render_dir;  // frame_%06d.svg per rendered frame
    bool animated = false;                            // also collect animated.svg
    double animated_fps = 10.0;
    keypoint::StabilizerConfig stabilizer;
    double render_delay_ms = 0.0;  // injected before render_done
};

struct ReceiverCounters {
    std::uint64_t received = 0;
    std::uint64_t rendered = 0;
    std::uint64_t malformed = 0;
    std::uint64_t unsupported_version = 0;
    std::uint64_t write_errors = 0;
};

/// Decode, stabilize, animate and optionally emit SVG, per sender stream.
class ReceiverStage {
public:
    ReceiverStage(ReceiverOptions options, metrics::LatencyLedger& ledger);

    /// Returns the geometry when a puppet is bound. Malformed frames are counted and skipped.
    std::optional<rig::FrameGeometry> on_frame(const std::string& sender, std::span<const std::uint8_t> bytes,
                                               double recv_ms, Clock& clock);

    /// Writes animated.svg when enabled; returns the path written.
    std::optional<std::filesystem::path> finish();

    const ReceiverCounters& counters() const noexcept { return counters_; }
    const ReceiverOptions& options() const noexcept { return options_; }

private:
    struct Stream {
        codec::StreamDecoder decoder;
        keypoint::Stabilizer stabilizer;
        std::optional<rig::GateState> gate;
    };

    ReceiverOptions options_;
    metrics::LatencyLedger& ledger_;
    std::map<std::string, Stream> streams_;
    std::vector<rig::FrameGeometry> animation_;
    ReceiverCounters counters_;
};

std::string svg_frame_name(std::uint64_t index);

/// Loads, validates and binds a puppet file.
Expected<std::shared_ptr<const rig::BoundPuppet>, PipelineError> load_bound_puppet(const std::filesystem::path& path);

}  // namespace puppetcast::pipeline
