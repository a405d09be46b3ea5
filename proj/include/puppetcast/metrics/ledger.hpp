#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "puppetcast/common/expected.hpp"

namespace puppetcast::metrics {

enum class Stage : std::uint8_t { Capture = 0, ExtractDone, Send, Recv, RenderDone };
inline constexpr std::size_t kStageCount = 5;

std::string_view to_string(Stage s) noexcept;
std::optional<Stage> stage_from(std::string_view s) noexcept;

/// Stamps are held in integer microseconds so stage differences add up exactly.
using Micros = std::int64_t;

Micros to_micros(double ms) noexcept;
inline double to_ms(Micros us) noexcept { return static_cast<double>(us) / 1000.0; }

struct FrameRecord {
    std::array<std::optional<Micros>, kStageCount> stamps;
    std::optional<std::size_t> bytes;  // delivered frame size, header included
    bool conflicted = false;

    const std::optional<Micros>& at(Stage s) const { return stamps[static_cast<std::size_t>(s)]; }
    bool complete() const;
};

struct RecordKey {
    std::string sender;
    std::uint16_t seq = 0;

    friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
};

enum class RecordResult { Recorded, Duplicate, Conflict };

/// Per-frame stage stamps keyed by (sender, seq). Sender-side stages (capture, extract_done,
/// send) are in the sender's clock; receiver-side stages (recv, render_done) are in the
/// receiver's clock and are shifted by the receiver offset when read.
/// Thread-safe; readers get a consistent snapshot.
class LatencyLedger {
public:
    RecordResult record_stage(const std::string& sender, std::uint16_t seq, Stage stage, double ts_ms);
    RecordResult record_bytes(const std::string& sender, std::uint16_t seq, std::size_t bytes);

    /// Milliseconds added to receiver-side stamps to express them in the sender's clock.
    void set_receiver_offset(double offset_ms);
    double receiver_offset_ms() const;

    /// Folds another ledger in, record by record, with the same first-wins conflict rule.
    void merge(const LatencyLedger& other);

    /// Records with offset-corrected receiver stamps.
    std::vector<std::pair<RecordKey, FrameRecord>> snapshot() const;

    std::size_t size() const;
    std::size_t finalized() const;
    std::uint64_t conflicts() const;
    std::uint64_t monotonicity_violations() const;

    std::string to_json() const;
    static Expected<LatencyLedger, std::string> from_json(std::string_view text);

    LatencyLedger() = default;
    LatencyLedger(const LatencyLedger& other);
    LatencyLedger& operator=(const LatencyLedger& other);

private:
    RecordResult set_stamp(const RecordKey& key, Stage stage, Micros us);
    void on_update(FrameRecord& r, bool was_complete);
    bool monotone(const FrameRecord& r) const;

    mutable std::mutex mu_;
    std::map<RecordKey, FrameRecord> records_;
    Micros receiver_offset_us_ = 0;
    std::uint64_t conflicts_ = 0;
    std::uint64_t violations_ = 0;
    std::size_t finalized_ = 0;
};

}  // namespace puppetcast::metrics
