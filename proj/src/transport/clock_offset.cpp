#include "puppetcast/transport/clock_offset.hpp"

#include <algorithm>
#include <vector>

namespace puppetcast::transport {

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Expected<OffsetEstimate, std::string> estimate_clock_offset(std::span<const PingSample> samples,
                                                            std::size_t requested) {
    if (samples.empty()) {
        return unexpected(std::string("no pong received; clock offset unknown"));
    }
    std::vector<double> offsets;
    std::vector<double> rtts;
    for (const auto& s : samples) {
        offsets.push_back(s.remote_ms - 0.5 * (s.local_send_ms + s.local_recv_ms));
        rtts.push_back(s.local_recv_ms - s.local_send_ms);
    }
    OffsetEstimate e;
    e.offset_ms = median(std::move(offsets));
    e.rtt_ms = median(std::move(rtts));
    e.samples = samples.size();
    e.requested = std::max(requested, samples.size());
    return e;
}

}  // namespace puppetcast::transport
