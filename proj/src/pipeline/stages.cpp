#include "puppetcast/pipeline/stages.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "puppetcast/codec/wire.hpp"
#include "puppetcast/rig/svg.hpp"

namespace puppetcast::pipeline {

using metrics::Stage;

SenderStage::SenderStage(SenderOptions options, metrics::LatencyLedger& ledger)
    : options_(std::move(options)), ledger_(ledger), encoder_(options_.delta, options_.keyframe_interval) {}

Expected<OutgoingFrame, PipelineError> SenderStage::capture(FrameSource& source, Clock& clock) {
    const double capture_ms = clock.now_ms();
    auto frame = source.produce();
    clock.sleep_for_ms(options_.extract_delay_ms);
    const double extract_done_ms = clock.now_ms();

    const double stamped = capture_ms + options_.clock_offset_ms;
    frame.capture_ts_ms = static_cast<std::uint32_t>(std::llround(stamped < 0.0 ? 0.0 : stamped));
    auto bytes = encoder_.encode(frame);
    if (!bytes) {
        return unexpected(PipelineError{ErrorKind::Corrupt, "encode failed: " +
                                                                std::string(codec::to_string(bytes.error()))});
    }
    ledger_.record_stage(options_.sender_id, frame.seq, Stage::Capture, stamped);
    ledger_.record_stage(options_.sender_id, frame.seq, Stage::ExtractDone,
                         extract_done_ms + options_.clock_offset_ms);
    ledger_.record_bytes(options_.sender_id, frame.seq, bytes->size());
    return OutgoingFrame{frame.seq, std::move(*bytes)};
}

void SenderStage::mark_sent(std::uint16_t seq, double send_ms) {
    ledger_.record_stage(options_.sender_id, seq, Stage::Send, send_ms + options_.clock_offset_ms);
}

ReceiverStage::ReceiverStage(ReceiverOptions options, metrics::LatencyLedger& ledger)
    : options_(std::move(options)), ledger_(ledger) {}

std::optional<rig::FrameGeometry> ReceiverStage::on_frame(const std::string& sender,
                                                          std::span<const std::uint8_t> bytes, double recv_ms,
                                                          Clock& clock) {
    ++counters_.received;
    auto [it, inserted] = streams_.try_emplace(sender);
    Stream& s = it->second;
    if (inserted) {
        s.stabilizer = keypoint::Stabilizer(options_.stabilizer);
        if (options_.puppet) {
            s.gate = rig::make_gate_state(*options_.puppet);
        }
    }
    auto decoded = s.decoder.decode(bytes);
    if (!decoded) {
        if (decoded.error() == codec::CodecError::BadVersion) {
            ++counters_.unsupported_version;
        } else {
            ++counters_.malformed;
        }
        return std::nullopt;
    }
    const std::uint16_t seq = decoded->header.seq;
    ledger_.record_stage(sender, seq, Stage::Recv, recv_ms);
    ledger_.record_bytes(sender, seq, bytes.size());

    const auto stable = s.stabilizer.stabilize(decoded->frame);
    std::optional<rig::FrameGeometry> geometry;
    if (options_.puppet) {
        geometry = rig::animate(*options_.puppet, stable, *s.gate);
        ++counters_.rendered;
        if (options_.render_dir) {
            std::ofstream out(*options_.render_dir / svg_frame_name(counters_.rendered), std::ios::binary);
            out << rig::emit_svg(*geometry);
            if (!out) ++counters_.write_errors;
        }
        if (options_.animated) {
            animation_.push_back(*geometry);
        }
    }
    clock.sleep_for_ms(options_.render_delay_ms);
    ledger_.record_stage(sender, seq, Stage::RenderDone, clock.now_ms());
    return geometry;
}

std::optional<std::filesystem::path> ReceiverStage::finish() {
    if (!options_.animated || !options_.render_dir || animation_.empty()) {
        return std::nullopt;
    }
    const auto path = *options_.render_dir / "animated.svg";
    std::ofstream out(path, std::ios::binary);
    out << rig::emit_animated_svg(animation_, options_.animated_fps);
    if (!out) {
        ++counters_.write_errors;
        return std::nullopt;
    }
    return path;
}

std::string svg_frame_name(std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06llu.svg", static_cast<unsigned long long>(index));
    return buf;
}

Expected<std::shared_ptr<const rig::BoundPuppet>, PipelineError> load_bound_puppet(
    const std::filesystem::path& path) {
    auto spec = rig::load_puppet_file(path);
    if (!spec) {
        const auto& e = spec.error();
        std::string msg = path.string() + ": " + std::string(rig::to_string(e.kind));
        if (!e.where.empty()) msg += " at " + e.where;
        msg += ": " + e.message;
        return unexpected(PipelineError{ErrorKind::Config, msg});
    }
    return std::shared_ptr<const rig::BoundPuppet>(std::make_shared<rig::BoundPuppet>(rig::bind(std::move(*spec))));
}

}  // namespace puppetcast::pipeline
