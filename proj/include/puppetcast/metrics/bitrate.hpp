#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <utility>

namespace puppetcast::metrics {

/// Sliding-window bitrate. Frames with timestamps in (now - window, now] count; the rate is
/// the bytes after the first frame in the window divided by the time the window's frames
/// span. At 10 fps in a 2 s window this is exact for a constant stream, where dividing
/// by the nominal window would swing by one frame (5%) depending on phase.
class SlidingBitrate {
public:
    explicit SlidingBitrate(double window_ms = 2000.0) : window_ms_(window_ms) {}

    void add(double ts_ms, std::size_t bytes);

    /// Bits per second over the current window; nullopt with fewer than two frames.
    std::optional<double> rate_bps() const;
    double window_ms() const noexcept { return window_ms_; }
    std::size_t frames_in_window() const noexcept { return samples_.size(); }

private:
    double window_ms_;
    std::deque<std::pair<double, std::size_t>> samples_;
};

}  // namespace puppetcast::metrics
