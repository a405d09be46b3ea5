#include "puppetcast/metrics/ledger.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace puppetcast::metrics {

namespace {
constexpr std::array<std::string_view, kStageCount> kStageNames = {"capture", "extract_done", "send", "recv",
                                                                    "render_done"};

bool receiver_side(std::size_t stage) { return stage >= static_cast<std::size_t>(Stage::Recv); }
}  // namespace

std::string_view to_string(Stage s) noexcept { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> stage_from(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kStageCount; ++i) {
        if (kStageNames[i] == s) {
            return static_cast<Stage>(i);
        }
    }
    return std::nullopt;
}

Micros to_micros(double ms) noexcept { return static_cast<Micros>(std::llround(ms * 1000.0)); }

bool FrameRecord::complete() const {
    for (const auto& s : stamps) {
        if (!s) {
            return false;
        }
    }
    return true;
}

LatencyLedger::LatencyLedger(const LatencyLedger& other) {
    std::lock_guard lock(other.mu_);
    records_ = other.records_;
    receiver_offset_us_ = other.receiver_offset_us_;
    conflicts_ = other.conflicts_;
    violations_ = other.violations_;
    finalized_ = other.finalized_;
}

LatencyLedger& LatencyLedger::operator=(const LatencyLedger& other) {
    if (this != &other) {
        LatencyLedger copy(other);
        std::scoped_lock lock(mu_);
        records_ = std::move(copy.records_);
        receiver_offset_us_ = copy.receiver_offset_us_;
        conflicts_ = copy.conflicts_;
        violations_ = copy.violations_;
        finalized_ = copy.finalized_;
    }
    return *this;
}

bool LatencyLedger::monotone(const FrameRecord& r) const {
    std::optional<Micros> prev;
    for (std::size_t i = 0; i < kStageCount; ++i) {
        if (!r.stamps[i]) {
            continue;
        }
        const Micros v = *r.stamps[i] + (receiver_side(i) ? receiver_offset_us_ : 0);
        if (prev && v < *prev) {
            return false;
        }
        prev = v;
    }
    return true;
}

void LatencyLedger::on_update(FrameRecord& r, bool was_complete) {
    if (!was_complete && r.complete()) {
        ++finalized_;
        if (!monotone(r)) {
            ++violations_;
        }
    }
}

RecordResult LatencyLedger::set_stamp(const RecordKey& key, Stage stage, Micros us) {
    FrameRecord& r = records_[key];
    auto& slot = r.stamps[static_cast<std::size_t>(stage)];
    if (slot) {
        if (*slot == us) {
            return RecordResult::Duplicate;
        }
        r.conflicted = true;
        ++conflicts_;
        return RecordResult::Conflict;
    }
    const bool was_complete = r.complete();
    slot = us;
    on_update(r, was_complete);
    return RecordResult::Recorded;
}

RecordResult LatencyLedger::record_stage(const std::string& sender, std::uint16_t seq, Stage stage, double ts_ms) {
    std::lock_guard lock(mu_);
    return set_stamp(RecordKey{sender, seq}, stage, to_micros(ts_ms));
}

RecordResult LatencyLedger::record_bytes(const std::string& sender, std::uint16_t seq, std::size_t bytes) {
    std::lock_guard lock(mu_);
    FrameRecord& r = records_[RecordKey{sender, seq}];
    if (r.bytes) {
        if (*r.bytes == bytes) {
            return RecordResult::Duplicate;
        }
        r.conflicted = true;
        ++conflicts_;
        return RecordResult::Conflict;
    }
    r.bytes = bytes;
    return RecordResult::Recorded;
}

void LatencyLedger::set_receiver_offset(double offset_ms) {
    std::lock_guard lock(mu_);
    receiver_offset_us_ = to_micros(offset_ms);
    violations_ = 0;
    for (const auto& [key, r] : records_) {
        if (r.complete() && !monotone(r)) {
            ++violations_;
        }
    }
}

double LatencyLedger::receiver_offset_ms() const {
    std::lock_guard lock(mu_);
    return to_ms(receiver_offset_us_);
}

void LatencyLedger::merge(const LatencyLedger& other) {
    if (this == &other) {
        return;
    }
    const LatencyLedger copy(other);
    std::lock_guard lock(mu_);
    if (receiver_offset_us_ == 0) {
        receiver_offset_us_ = copy.receiver_offset_us_;
    }
    conflicts_ += copy.conflicts_;
    for (const auto& [key, theirs] : copy.records_) {
        for (std::size_t i = 0; i < kStageCount; ++i) {
            if (theirs.stamps[i]) {
                set_stamp(key, static_cast<Stage>(i), *theirs.stamps[i]);
            }
        }
        FrameRecord& mine = records_[key];
        if (theirs.bytes) {
            if (!mine.bytes) {
                mine.bytes = theirs.bytes;
            } else if (*mine.bytes != *theirs.bytes) {
                mine.conflicted = true;
                ++conflicts_;
            }
        }
        mine.conflicted = mine.conflicted || theirs.conflicted;
    }
}

std::vector<std::pair<RecordKey, FrameRecord>> LatencyLedger::snapshot() const {
    std::lock_guard lock(mu_);
    std::vector<std::pair<RecordKey, FrameRecord>> out;
    out.reserve(records_.size());
    for (const auto& [key, r] : records_) {
        FrameRecord c = r;
        for (std::size_t i = 0; i < kStageCount; ++i) {
            if (receiver_side(i) && c.stamps[i]) {
                *c.stamps[i] += receiver_offset_us_;
            }
        }
        out.emplace_back(key, std::move(c));
    }
    return out;
}

std::size_t LatencyLedger::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

std::size_t LatencyLedger::finalized() const {
    std::lock_guard lock(mu_);
    return finalized_;
}

std::uint64_t LatencyLedger::conflicts() const {
    std::lock_guard lock(mu_);
    return conflicts_;
}

std::uint64_t LatencyLedger::monotonicity_violations() const {
    std::lock_guard lock(mu_);
    return violations_;
}

std::string LatencyLedger::to_json() const {
    std::lock_guard lock(mu_);
    nlohmann::ordered_json j;
    j["receiver_offset_ms"] = to_ms(receiver_offset_us_);
    j["conflicts"] = conflicts_;
    j["records"] = nlohmann::ordered_json::array();
    for (const auto& [key, r] : records_) {
        nlohmann::ordered_json o;
        o["sender"] = key.sender;
        o["seq"] = key.seq;
        for (std::size_t i = 0; i < kStageCount; ++i) {
            if (r.stamps[i]) {
                o[std::string(kStageNames[i])] = to_ms(*r.stamps[i]);
            }
        }
        if (r.bytes) {
            o["bytes"] = *r.bytes;
        }
        if (r.conflicted) {
            o["conflicted"] = true;
        }
        j["records"].push_back(std::move(o));
    }
    return j.dump();
}

Expected<LatencyLedger, std::string> LatencyLedger::from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("records") || !j["records"].is_array()) {
        return unexpected(std::string("stats file is not a ledger document"));
    }
    LatencyLedger out;
    try {
        for (const auto& o : j["records"]) {
            const RecordKey key{o.at("sender").get<std::string>(), o.at("seq").get<std::uint16_t>()};
            FrameRecord& r = out.records_[key];
            for (std::size_t i = 0; i < kStageCount; ++i) {
                const std::string name(kStageNames[i]);
                if (o.contains(name)) {
                    r.stamps[i] = to_micros(o[name].get<double>());
                }
            }
            if (o.contains("bytes")) {
                r.bytes = o["bytes"].get<std::size_t>();
            }
            r.conflicted = o.value("conflicted", false);
        }
        out.receiver_offset_us_ = to_micros(j.value("receiver_offset_ms", 0.0));
        out.conflicts_ = j.value("conflicts", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        return unexpected(std::string("malformed ledger record: ") + e.what());
    }
    for (const auto& [key, r] : out.records_) {
        if (r.complete()) {
            ++out.finalized_;
            if (!out.monotone(r)) {
                ++out.violations_;
            }
        }
    }
    return out;
}

}  // namespace puppetcast::metrics
