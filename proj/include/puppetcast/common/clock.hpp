#pragma once

#include <chrono>

namespace puppetcast {

/// Milliseconds on the host's monotonic clock (shared by all processes on one machine).
inline double monotonic_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace puppetcast
