#include "puppetcast/transport/sequence_gate.hpp"

namespace puppetcast::transport {

bool SequenceGate::admit(const std::string& sender, std::uint16_t seq) {
    auto it = last_.find(sender);
    if (it == last_.end()) {
        last_.emplace(sender, seq);
        return true;
    }
    const std::int32_t d = seq_distance(seq, it->second);
    if (d > 0) {
        it->second = seq;
        return true;
    }
    if (-d <= static_cast<std::int32_t>(horizon_)) {
        ++stale_dropped_;
        return false;
    }
    ++resyncs_;
    it->second = seq;
    return true;
}

}  // namespace puppetcast::transport
