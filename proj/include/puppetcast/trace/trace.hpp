#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "puppetcast/common/expected.hpp"
#include "puppetcast/keypoint/keypoint.hpp"
#include "puppetcast/keypoint/synth.hpp"

namespace puppetcast::trace {

// .kpt container: "KPT1" then records of u32 big-endian length || encoded frame bytes.
inline constexpr std::array<std::uint8_t, 4> kMagic = {'K', 'P', 'T', '1'};
inline constexpr std::size_t kRecordHeaderSize = 4;
inline constexpr std::uint32_t kMaxRecordSize = 1u << 16;

enum class TraceIssueKind { Io, BadMagic, TruncatedTail, CorruptRecord };

struct TraceIssue {
    TraceIssueKind kind = TraceIssueKind::Io;
    std::size_t offset = 0;  // byte offset of the offending record (or of the failure)
    std::size_t index = 0;   // record index
    std::string message;
};

std::string describe(const TraceIssue& issue);

/// Appends frames to a .kpt file. The magic is written on open.
class TraceWriter {
public:
    static Expected<TraceWriter, TraceIssue> create(const std::filesystem::path& path);

    /// On failure the issue's index is the number of frames written so far.
    Expected<std::size_t, TraceIssue> write(std::span<const std::uint8_t> frame);
    Expected<std::size_t, TraceIssue> close();
    std::size_t count() const noexcept { return count_; }

private:
    TraceWriter() = default;
    std::ofstream out_;
    std::filesystem::path path_;
    std::size_t count_ = 0;
    std::size_t offset_ = 0;
};

/// Writes a whole stream; returns the frame count.
Expected<std::size_t, TraceIssue> record(const std::filesystem::path& path,
                                         const std::vector<std::vector<std::uint8_t>>& frames);

/// In-memory container bytes for the given frames.
std::vector<std::uint8_t> serialize(const std::vector<std::vector<std::uint8_t>>& frames);

struct LoadedTrace {
    std::vector<std::vector<std::uint8_t>> frames;
    std::optional<TraceIssue> warning;  // truncated tail: frames before it are kept
};

/// Splits and checks a container: every record must decode (delta records against the
/// previous one) and capture timestamps must not decrease. A corrupt record is an error
/// carrying its position; a truncated final record is a warning.
Expected<LoadedTrace, TraceIssue> parse_trace(std::span<const std::uint8_t> bytes);
Expected<LoadedTrace, TraceIssue> read_trace(const std::filesystem::path& path);

enum class Pacing { Timestamp, FixedFps };

struct ReplayOptions {
    Pacing pacing = Pacing::Timestamp;
    double fps = 10.0;  // FixedFps only
    bool loop = false;
};

struct ReplayFrame {
    std::vector<std::uint8_t> bytes;  // re-stamped in FixedFps mode
    keypoint::KeypointFrame frame;
    double due_ms = 0.0;  // offset from replay start
    std::size_t index = 0;  // position in the output stream
};

/// Yields trace frames with their due times; the caller does the waiting. Content is
/// deterministic. FixedFps re-stamps capture_ts_ms to first_ts + round(i * 1000 / fps).
/// Looping re-stamps timestamps and sequence numbers so the stream stays monotone.
class TraceReplay {
public:
    static Expected<TraceReplay, std::string> create(LoadedTrace trace, ReplayOptions options);

    std::optional<ReplayFrame> next();
    std::size_t size() const noexcept { return decoded_.size(); }
    const std::optional<TraceIssue>& warning() const noexcept { return warning_; }

private:
    TraceReplay() = default;
    std::vector<std::vector<std::uint8_t>> frames_;
    std::vector<keypoint::KeypointFrame> decoded_;
    std::optional<TraceIssue> warning_;
    ReplayOptions options_;
    double loop_period_ms_ = 0.0;
    std::size_t emitted_ = 0;
};

/// Full-precision frames of the synthetic generator at a fixed rate: seq i, ts i*1000/fps.
std::vector<std::vector<std::uint8_t>> synth_frames(const keypoint::SynthMotion& motion, double fps,
                                                    std::size_t count);

}  // namespace puppetcast::trace
