#include "puppetcast/trace/trace.hpp"

#include <cmath>
#include <iterator>

#include "puppetcast/codec/delta.hpp"
#include "puppetcast/codec/wire.hpp"

namespace puppetcast::trace {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

void stamp_header(std::vector<std::uint8_t>& bytes, std::uint16_t seq, std::uint32_t ts) {
    bytes[2] = static_cast<std::uint8_t>(seq >> 8);
    bytes[3] = static_cast<std::uint8_t>(seq);
    bytes[4] = static_cast<std::uint8_t>(ts >> 24);
    bytes[5] = static_cast<std::uint8_t>(ts >> 16);
    bytes[6] = static_cast<std::uint8_t>(ts >> 8);
    bytes[7] = static_cast<std::uint8_t>(ts);
}

TraceIssue issue(TraceIssueKind kind, std::size_t offset, std::size_t index, std::string message) {
    return TraceIssue{kind, offset, index, std::move(message)};
}

}  // namespace

std::string describe(const TraceIssue& i) {
    const char* kind = "i/o error";
    switch (i.kind) {
        case TraceIssueKind::Io: kind = "i/o error"; break;
        case TraceIssueKind::BadMagic: kind = "not a trace"; break;
        case TraceIssueKind::TruncatedTail: kind = "truncated tail"; break;
        case TraceIssueKind::CorruptRecord: kind = "corrupt record"; break;
    }
    return std::string(kind) + " at byte " + std::to_string(i.offset) + " (record " + std::to_string(i.index) +
           "): " + i.message;
}

Expected<TraceWriter, TraceIssue> TraceWriter::create(const std::filesystem::path& path) {
    TraceWriter w;
    w.path_ = path;
    w.out_.open(path, std::ios::binary | std::ios::trunc);
    if (!w.out_) {
        return unexpected(issue(TraceIssueKind::Io, 0, 0, "cannot open " + path.string() + " for writing"));
    }
    w.out_.write(reinterpret_cast<const char*>(kMagic.data()), kMagic.size());
    if (!w.out_) {
        return unexpected(issue(TraceIssueKind::Io, 0, 0, "cannot write to " + path.string()));
    }
    w.offset_ = kMagic.size();
    return w;
}

Expected<std::size_t, TraceIssue> TraceWriter::write(std::span<const std::uint8_t> frame) {
    if (frame.size() >= kMaxRecordSize) {
        return unexpected(issue(TraceIssueKind::CorruptRecord, offset_, count_, "frame too large for a trace record"));
    }
    std::vector<std::uint8_t> rec;
    rec.reserve(kRecordHeaderSize + frame.size());
    put_u32(rec, static_cast<std::uint32_t>(frame.size()));
    rec.insert(rec.end(), frame.begin(), frame.end());
    out_.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
    if (!out_) {
        return unexpected(issue(TraceIssueKind::Io, offset_, count_,
                                "write failed after " + std::to_string(count_) + " frames"));
    }
    offset_ += rec.size();
    return ++count_;
}

Expected<std::size_t, TraceIssue> TraceWriter::close() {
    out_.flush();
    const bool ok = static_cast<bool>(out_);
    out_.close();
    if (!ok) {
        return unexpected(issue(TraceIssueKind::Io, offset_, count_,
                                "flush failed after " + std::to_string(count_) + " frames"));
    }
    return count_;
}

Expected<std::size_t, TraceIssue> record(const std::filesystem::path& path,
                                         const std::vector<std::vector<std::uint8_t>>& frames) {
    auto w = TraceWriter::create(path);
    if (!w) {
        return unexpected(w.error());
    }
    for (const auto& f : frames) {
        if (auto r = w->write(f); !r) {
            return unexpected(r.error());
        }
    }
    return w->close();
}

std::vector<std::uint8_t> serialize(const std::vector<std::vector<std::uint8_t>>& frames) {
    std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
    for (const auto& f : frames) {
        put_u32(out, static_cast<std::uint32_t>(f.size()));
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

Expected<LoadedTrace, TraceIssue> parse_trace(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        return unexpected(issue(TraceIssueKind::BadMagic, 0, 0, "missing KPT1 magic"));
    }
    LoadedTrace out;
    codec::StreamDecoder decoder;
    std::optional<std::uint32_t> last_ts;
    std::size_t pos = kMagic.size();
    while (pos < bytes.size()) {
        const std::size_t index = out.frames.size();
        if (bytes.size() - pos < kRecordHeaderSize) {
            out.warning = issue(TraceIssueKind::TruncatedTail, pos, index, "incomplete record length");
            break;
        }
        const std::uint32_t len = get_u32(bytes.data() + pos);
        if (len == 0 || len >= kMaxRecordSize) {
            return unexpected(issue(TraceIssueKind::CorruptRecord, pos, index,
                                    "implausible record length " + std::to_string(len)));
        }
        if (bytes.size() - pos - kRecordHeaderSize < len) {
            out.warning = issue(TraceIssueKind::TruncatedTail, pos, index,
                                "record declares " + std::to_string(len) + " bytes, " +
                                    std::to_string(bytes.size() - pos - kRecordHeaderSize) + " remain");
            break;
        }
        const auto frame = bytes.subspan(pos + kRecordHeaderSize, len);
        auto decoded = decoder.decode(frame);
        if (!decoded) {
            return unexpected(issue(TraceIssueKind::CorruptRecord, pos, index,
                                    "frame does not decode: " + std::string(codec::to_string(decoded.error()))));
        }
        if (last_ts && decoded->header.capture_ts_ms < *last_ts) {
            return unexpected(issue(TraceIssueKind::CorruptRecord, pos, index, "capture_ts_ms decreases"));
        }
        last_ts = decoded->header.capture_ts_ms;
        out.frames.emplace_back(frame.begin(), frame.end());
        pos += kRecordHeaderSize + len;
    }
    return out;
}

Expected<LoadedTrace, TraceIssue> read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return unexpected(issue(TraceIssueKind::Io, 0, 0, "cannot open " + path.string()));
    }
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_trace(bytes);
}

Expected<TraceReplay, std::string> TraceReplay::create(LoadedTrace trace, ReplayOptions options) {
    if (options.pacing == Pacing::FixedFps && !(options.fps > 0.0 && std::isfinite(options.fps))) {
        return unexpected(std::string("replay fps must be positive"));
    }
    TraceReplay r;
    r.options_ = options;
    r.warning_ = trace.warning;
    codec::StreamDecoder decoder;
    for (const auto& f : trace.frames) {
        auto d = decoder.decode(f);
        if (!d) {
            return unexpected("trace frame does not decode: " + std::string(codec::to_string(d.error())));
        }
        r.decoded_.push_back(d->frame);
    }
    r.frames_ = std::move(trace.frames);
    if (r.decoded_.size() >= 2) {
        const double span = static_cast<double>(r.decoded_.back().capture_ts_ms - r.decoded_.front().capture_ts_ms);
        r.loop_period_ms_ = span + span / static_cast<double>(r.decoded_.size() - 1);
    } else {
        r.loop_period_ms_ = 1000.0 / (options.fps > 0 ? options.fps : 10.0);
    }
    return r;
}

std::optional<ReplayFrame> TraceReplay::next() {
    const std::size_t n = decoded_.size();
    if (n == 0 || (!options_.loop && emitted_ >= n)) {
        return std::nullopt;
    }
    const std::size_t i = emitted_ % n;
    const std::size_t lap = emitted_ / n;
    ReplayFrame out;
    out.index = emitted_;
    out.frame = decoded_[i];
    const std::uint32_t first_ts = decoded_.front().capture_ts_ms;
    if (options_.pacing == Pacing::FixedFps) {
        out.due_ms = static_cast<double>(emitted_) * 1000.0 / options_.fps;
    } else {
        out.due_ms = static_cast<double>(decoded_[i].capture_ts_ms - first_ts) +
                     static_cast<double>(lap) * loop_period_ms_;
    }
    const bool restamp = options_.pacing == Pacing::FixedFps || lap > 0;
    if (restamp) {
        // Delta records only make sense against the original neighbour; re-encode in full.
        out.frame.capture_ts_ms = first_ts + static_cast<std::uint32_t>(std::llround(out.due_ms));
        out.frame.seq = static_cast<std::uint16_t>(decoded_.front().seq + emitted_);
        if (lap == 0 && codec::parse_header(frames_[i]).has_value() &&
            !(codec::parse_header(frames_[i])->flags & codec::kFlagDelta)) {
            out.bytes = frames_[i];
            stamp_header(out.bytes, out.frame.seq, out.frame.capture_ts_ms);
        } else {
            out.bytes = codec::encode_frame(out.frame).value();
        }
    } else {
        out.bytes = frames_[i];
    }
    ++emitted_;
    return out;
}

std::vector<std::vector<std::uint8_t>> synth_frames(const keypoint::SynthMotion& motion, double fps,
                                                    std::size_t count) {
    std::vector<std::vector<std::uint8_t>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto t = static_cast<std::uint64_t>(std::llround(static_cast<double>(i) * 1000.0 / fps));
        auto f = motion.frame_at(t);
        f.seq = static_cast<std::uint16_t>(i);
        f.capture_ts_ms = static_cast<std::uint32_t>(t);
        out.push_back(codec::encode_frame(f).value());
    }
    return out;
}

}  // namespace puppetcast::trace
