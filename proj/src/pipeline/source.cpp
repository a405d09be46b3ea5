#include "puppetcast/pipeline/source.hpp"

#include <cmath>

namespace puppetcast::pipeline {

Expected<SourceSpec, PipelineError> parse_source(std::string_view text) {
    SourceSpec spec;
    if (text.starts_with("trace:")) {
        spec.kind = SourceSpec::Kind::Trace;
        spec.path = std::string(text.substr(6));
        if (spec.path.empty()) {
            return unexpected(PipelineError{ErrorKind::Config, "trace source needs a file: trace:FILE"});
        }
        return spec;
    }
    if (text == "synth" || text.starts_with("synth:")) {
        spec.kind = SourceSpec::Kind::Synth;
        const auto params = text.size() > 6 ? text.substr(6) : std::string_view{};
        auto opts = keypoint::parse_synth_options(params);
        if (!opts) {
            return unexpected(PipelineError{ErrorKind::Config, "synth source: " + opts.error()});
        }
        spec.synth = *opts;
        return spec;
    }
    return unexpected(PipelineError{ErrorKind::Config,
                                    "unknown source '" + std::string(text) + "' (expected trace:FILE or synth:PARAMS)"});
}

Expected<FrameSource, PipelineError> FrameSource::open(const SourceSpec& spec, double fps) {
    if (!(fps >= 0.0 && std::isfinite(fps)) || (spec.kind == SourceSpec::Kind::Synth && fps == 0.0)) {
        return unexpected(PipelineError{ErrorKind::Config, "fps must be positive"});
    }
    FrameSource src;
    src.fps_ = fps;
    if (spec.kind == SourceSpec::Kind::Synth) {
        auto motion = keypoint::SynthMotion::create(keypoint::default_motion_params(spec.synth));
        if (!motion) {
            return unexpected(PipelineError{ErrorKind::Config, "synth source: " + motion.error()});
        }
        src.synth_ = std::move(*motion);
        return src;
    }
    if (!std::filesystem::is_regular_file(spec.path)) {
        return unexpected(PipelineError{ErrorKind::Config, "cannot read trace " + spec.path.string()});
    }
    auto loaded = trace::read_trace(spec.path);
    if (!loaded) {
        const auto kind = loaded.error().kind == trace::TraceIssueKind::Io ? ErrorKind::Config : ErrorKind::Corrupt;
        return unexpected(PipelineError{kind, spec.path.string() + ": " + trace::describe(loaded.error())});
    }
    if (loaded->frames.empty()) {
        return unexpected(PipelineError{ErrorKind::Corrupt, spec.path.string() + ": trace holds no frames"});
    }
    trace::ReplayOptions opt;
    opt.loop = true;
    if (fps > 0.0) {
        opt.pacing = trace::Pacing::FixedFps;
        opt.fps = fps;
    }
    auto replay = trace::TraceReplay::create(std::move(*loaded), opt);
    if (!replay) {
        return unexpected(PipelineError{ErrorKind::Corrupt, spec.path.string() + ": " + replay.error()});
    }
    src.warning_ = replay->warning();
    src.replay_ = std::move(*replay);
    src.lookahead_ = src.replay_->next();
    return src;
}

std::optional<double> FrameSource::next_due() const {
    if (synth_) {
        return static_cast<double>(produced_) * 1000.0 / fps_;
    }
    if (lookahead_) {
        return lookahead_->due_ms;
    }
    return std::nullopt;
}

keypoint::KeypointFrame FrameSource::produce() {
    keypoint::KeypointFrame f;
    if (synth_) {
        const auto t = static_cast<std::uint64_t>(std::llround(static_cast<double>(produced_) * 1000.0 / fps_));
        f = synth_->frame_at(t);
        f.capture_ts_ms = static_cast<std::uint32_t>(t);
    } else {
        f = lookahead_->frame;
        f.capture_ts_ms = static_cast<std::uint32_t>(std::llround(lookahead_->due_ms));
        lookahead_ = replay_->next();
    }
    f.seq = static_cast<std::uint16_t>(produced_);
    ++produced_;
    return f;
}

}  // namespace puppetcast::pipeline
