#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>

#include "puppetcast/common/expected.hpp"
#include "puppetcast/metrics/ledger.hpp"
#include "puppetcast/pipeline/error.hpp"
#include "puppetcast/pipeline/source.hpp"
#include "puppetcast/pipeline/stages.hpp"
#include "puppetcast/transport/throttle.hpp"

namespace puppetcast::pipeline {

/// Sender and receiver in one process with a ThrottledChannel between them.
struct LoopbackConfig {
    SourceSpec source;
    double fps = 10.0;
    double duration_s = 10.0;  // frames due before this are offered; the channel then drains
    transport::ChannelConfig channel;
    bool delta = false;
    std::uint32_t keyframe_interval = codec::kDefaultKeyframeInterval;
    std::shared_ptr<const rig::BoundPuppet> puppet;
    std::optional<std::filesystem::path> render_dir;
    bool animated = false;
    double extract_delay_ms = 0.0;
    double render_delay_ms = 0.0;
    bool simulated = false;  // virtual clock, no sleeping; results are exactly reproducible
    double drain_timeout_ms = 10'000.0;
    const std::atomic<bool>* stop = nullptr;
};

struct LoopbackResult {
    metrics::LatencyLedger ledger;
    transport::ChannelStats channel;
    ReceiverCounters receiver;
    std::uint64_t frames_offered = 0;
    double elapsed_ms = 0.0;
    std::optional<trace::TraceIssue> source_warning;
};

Expected<LoopbackResult, PipelineError> run_loopback(const LoopbackConfig& config);

}  // namespace puppetcast::pipeline
