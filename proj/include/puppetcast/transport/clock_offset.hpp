#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "puppetcast/common/expected.hpp"

namespace puppetcast::transport {

/// One ping exchange: local send time, remote (server) receive time, local receive time.
struct PingSample {
    double local_send_ms = 0.0;
    double remote_ms = 0.0;
    double local_recv_ms = 0.0;
};

struct OffsetEstimate {
    double offset_ms = 0.0;  // remote clock minus local clock
    double rtt_ms = 0.0;     // median round trip
    std::size_t samples = 0;
    std::size_t requested = 0;
};

/// Median over samples of remote - (send + recv) / 2. Assumes symmetric path delay: with
/// outbound delay d1 and return delay d2 the estimate is biased by (d1 - d2) / 2.
Expected<OffsetEstimate, std::string> estimate_clock_offset(std::span<const PingSample> samples,
                                                            std::size_t requested = 0);

}  // namespace puppetcast::transport
