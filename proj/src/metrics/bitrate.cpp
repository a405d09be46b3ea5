#include "puppetcast/metrics/bitrate.hpp"

namespace puppetcast::metrics {

void SlidingBitrate::add(double ts_ms, std::size_t bytes) {
    samples_.emplace_back(ts_ms, bytes);
    while (!samples_.empty() && samples_.front().first <= ts_ms - window_ms_) {
        samples_.pop_front();
    }
}

std::optional<double> SlidingBitrate::rate_bps() const {
    if (samples_.size() < 2) {
        return std::nullopt;
    }
    const double span_ms = samples_.back().first - samples_.front().first;
    if (span_ms <= 0.0) {
        return std::nullopt;
    }
    std::size_t bytes = 0;
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        bytes += samples_[i].second;
    }
    return static_cast<double>(bytes) * 8.0 * 1000.0 / span_ms;
}

}  // namespace puppetcast::metrics
