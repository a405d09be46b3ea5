#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace puppetcast::transport {

using ConnectionId = std::uint64_t;

enum class DuplicatePeerPolicy { EvictOlder, Reject };

struct RoomPolicy {
    std::size_t max_peers_per_room = 16;
    DuplicatePeerPolicy on_duplicate = DuplicatePeerPolicy::EvictOlder;
};

struct Membership {
    std::string room;
    std::string peer;
};

struct JoinOutcome {
    bool accepted = false;
    std::string error;                  // signal_error code when rejected
    std::optional<ConnectionId> evicted;  // older registration displaced by this join
    std::vector<std::string> peers;     // room roster after the join, sorted
    std::vector<ConnectionId> members;  // connections to notify with the roster
};

struct LeaveOutcome {
    Membership left;
    std::vector<std::string> peers;     // remaining roster
    std::vector<ConnectionId> members;  // remaining connections
};

/// Room membership bookkeeping for the relay. Pure data structure; the server guards it
/// with a mutex and performs I/O outside.
class RoomRegistry {
public:
    explicit RoomRegistry(RoomPolicy policy = {}) : policy_(policy) {}

    JoinOutcome join(ConnectionId conn, const std::string& room, const std::string& peer);
    std::optional<LeaveOutcome> leave(ConnectionId conn);

    std::optional<Membership> membership(ConnectionId conn) const;

    /// Every other connection in the sender's room; empty when the sender has not joined.
    std::vector<ConnectionId> relay_targets(ConnectionId sender) const;

    std::vector<std::string> peers(const std::string& room) const;
    std::size_t room_count() const noexcept { return rooms_.size(); }

private:
    RoomPolicy policy_;
    // room -> (peer -> connection)
    std::map<std::string, std::map<std::string, ConnectionId>> rooms_;
    std::map<ConnectionId, Membership> members_;
};

}  // namespace puppetcast::transport
