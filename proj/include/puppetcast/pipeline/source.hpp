#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "puppetcast/common/expected.hpp"
#include "puppetcast/keypoint/synth.hpp"
#include "puppetcast/pipeline/error.hpp"
#include "puppetcast/trace/trace.hpp"

namespace puppetcast::pipeline {

/// `trace:FILE` or `synth:` / `synth:amp=0.05,period=1500,...`.
struct SourceSpec {
    enum class Kind { Trace, Synth };
    Kind kind = Kind::Synth;
    std::filesystem::path path;
    keypoint::SynthOptions synth;
};

Expected<SourceSpec, PipelineError> parse_source(std::string_view text);

/// Frames to send, with the time (ms from stream start) each is due. Trace sources loop
/// so a run may outlast the recording; fps 0 replays a trace at its recorded pacing.
class FrameSource {
public:
    static Expected<FrameSource, PipelineError> open(const SourceSpec& spec, double fps);

    /// Due time of the next frame, or nullopt at the end of a non-looping source.
    std::optional<double> next_due() const;

    /// Produces the next frame: seq and capture_ts_ms are set from the stream position.
    keypoint::KeypointFrame produce();

    std::uint64_t produced() const noexcept { return produced_; }
    const std::optional<trace::TraceIssue>& warning() const noexcept { return warning_; }

private:
    FrameSource() = default;
    double fps_ = 10.0;
    std::optional<keypoint::SynthMotion> synth_;
    std::optional<trace::TraceReplay> replay_;
    std::optional<trace::ReplayFrame> lookahead_;
    std::optional<trace::TraceIssue> warning_;
    std::uint64_t produced_ = 0;
};

}  // namespace puppetcast::pipeline
