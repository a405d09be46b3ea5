#include "puppetcast/transport/room_registry.hpp"

#include "puppetcast/transport/signal_message.hpp"

namespace puppetcast::transport {

JoinOutcome RoomRegistry::join(ConnectionId conn, const std::string& room, const std::string& peer) {
    JoinOutcome out;
    if (!valid_identifier(room) || !valid_identifier(peer)) {
        out.error = std::string(signal_error::kBadRequest);
        return out;
    }
    if (auto current = membership(conn)) {
        if (current->room == room && current->peer == peer) {
            out.accepted = true;
            out.peers = peers(room);
            for (const auto& [name, id] : rooms_[room]) {
                out.members.push_back(id);
            }
            return out;
        }
        leave(conn);
    }
    auto& roster = rooms_[room];
    auto existing = roster.find(peer);
    if (existing != roster.end()) {
        if (policy_.on_duplicate == DuplicatePeerPolicy::Reject) {
            out.error = std::string(signal_error::kDuplicatePeer);
            return out;
        }
        out.evicted = existing->second;
        members_.erase(existing->second);
        roster.erase(existing);
    } else if (roster.size() >= policy_.max_peers_per_room) {
        out.error = std::string(signal_error::kRoomFull);
        if (roster.empty()) {
            rooms_.erase(room);
        }
        return out;
    }
    roster.emplace(peer, conn);
    members_[conn] = Membership{room, peer};
    out.accepted = true;
    for (const auto& [name, id] : roster) {
        out.peers.push_back(name);
        out.members.push_back(id);
    }
    return out;
}

std::optional<LeaveOutcome> RoomRegistry::leave(ConnectionId conn) {
    auto it = members_.find(conn);
    if (it == members_.end()) {
        return std::nullopt;
    }
    LeaveOutcome out;
    out.left = it->second;
    members_.erase(it);
    auto room_it = rooms_.find(out.left.room);
    if (room_it != rooms_.end()) {
        room_it->second.erase(out.left.peer);
        for (const auto& [name, id] : room_it->second) {
            out.peers.push_back(name);
            out.members.push_back(id);
        }
        if (room_it->second.empty()) {
            rooms_.erase(room_it);
        }
    }
    return out;
}

std::optional<Membership> RoomRegistry::membership(ConnectionId conn) const {
    auto it = members_.find(conn);
    if (it == members_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<ConnectionId> RoomRegistry::relay_targets(ConnectionId sender) const {
    std::vector<ConnectionId> out;
    auto it = members_.find(sender);
    if (it == members_.end()) {
        return out;
    }
    auto room_it = rooms_.find(it->second.room);
    if (room_it == rooms_.end()) {
        return out;
    }
    for (const auto& [name, id] : room_it->second) {
        if (id != sender) {
            out.push_back(id);
        }
    }
    return out;
}

std::vector<std::string> RoomRegistry::peers(const std::string& room) const {
    std::vector<std::string> out;
    auto it = rooms_.find(room);
    if (it != rooms_.end()) {
        for (const auto& [name, id] : it->second) {
            out.push_back(name);
        }
    }
    return out;
}

}  // namespace puppetcast::transport
