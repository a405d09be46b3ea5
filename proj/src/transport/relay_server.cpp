#include "puppetcast/transport/relay_server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>
#include <vector>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "puppetcast/transport/signal_message.hpp"

namespace puppetcast::transport {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

struct Outgoing {
    bool text = false;
    std::shared_ptr<const std::string> payload;
    bool close_after = false;
};

}  // namespace

class RelayConnection;

struct RelayServer::Impl : std::enable_shared_from_this<RelayServer::Impl> {
    explicit Impl(RelayConfig cfg) : config(std::move(cfg)), registry(config.policy) {}

    RelayConfig config;
    net::io_context ioc;
    std::optional<tcp::acceptor> acceptor;
    std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
    std::vector<std::thread> threads;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
    std::uint16_t bound_port = 0;
    std::atomic<bool> stopping{false};
    bool stopped = false;

    mutable std::mutex mu;  // guards registry and connections; no I/O under it
    RoomRegistry registry;
    std::unordered_map<ConnectionId, std::weak_ptr<RelayConnection>> connections;
    std::atomic<ConnectionId> next_id{1};

    std::atomic<std::uint64_t> accepted{0};
    std::atomic<std::uint64_t> relayed{0};
    std::atomic<std::uint64_t> deliveries{0};
    std::atomic<std::uint64_t> control_errors{0};

    double now_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    }

    void log(const std::string& line) const {
        if (config.log) {
            config.log(line);
        }
    }

    void do_accept();
    void handle_text(const std::shared_ptr<RelayConnection>& conn, const std::string& text);
    void handle_binary(const std::shared_ptr<RelayConnection>& conn, const std::string& data);
    void on_disconnect(ConnectionId id);
    void send_error(const std::shared_ptr<RelayConnection>& conn, std::string_view code,
                    bool close_after);
    std::vector<std::shared_ptr<RelayConnection>> lookup(const std::vector<ConnectionId>& ids) const;
    void broadcast_roster(const std::string& room, const std::vector<std::string>& peers,
                          const std::vector<ConnectionId>& members);
};

class RelayConnection : public std::enable_shared_from_this<RelayConnection> {
public:
    RelayConnection(tcp::socket socket, std::shared_ptr<RelayServer::Impl> server, ConnectionId id)
        : ws_(std::move(socket)), server_(std::move(server)), id_(id) {}

    ConnectionId id() const noexcept { return id_; }

    void run() {
        net::dispatch(ws_.get_executor(), [self = shared_from_this()] { self->on_run(); });
    }

    void send(bool text, std::shared_ptr<const std::string> payload, bool close_after = false) {
        net::post(ws_.get_executor(), [self = shared_from_this(), text, payload = std::move(payload),
                                       close_after]() mutable {
            if (self->closed_) {
                return;
            }
            self->queue_.push_back(Outgoing{text, std::move(payload), close_after});
            if (self->queue_.size() == 1) {
                self->do_write();
            }
        });
    }

    void close(websocket::close_code code) {
        net::post(ws_.get_executor(), [self = shared_from_this(), code] {
            self->close_code_ = code;
            if (self->queue_.empty()) {
                self->do_close();
            } else {
                self->queue_.back().close_after = true;
            }
        });
    }

private:
    void on_run() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.read_message_max(64 * 1024);
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
            if (ec) {
                self->finish();
                return;
            }
            self->do_read();
        });
    }

    void do_read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->finish();
                return;
            }
            const bool text = self->ws_.got_text();
            std::string data = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            if (text) {
                self->server_->handle_text(self, data);
            } else {
                self->server_->handle_binary(self, data);
            }
            if (!self->closed_) {
                self->do_read();
            }
        });
    }

    void do_write() {
        auto& front = queue_.front();
        ws_.text(front.text);
        ws_.async_write(net::buffer(*front.payload),
                        [self = shared_from_this()](beast::error_code ec, std::size_t) {
                            if (ec) {
                                self->queue_.clear();
                                self->finish();
                                return;
                            }
                            const bool close_after = self->queue_.front().close_after;
                            self->queue_.pop_front();
                            if (close_after) {
                                self->queue_.clear();
                                self->do_close();
                            } else if (!self->queue_.empty()) {
                                self->do_write();
                            }
                        });
    }

    void do_close() {
        if (closing_ || closed_) {
            return;
        }
        closing_ = true;
        ws_.async_close(websocket::close_reason(close_code_),
                        [self = shared_from_this()](beast::error_code) { self->finish(); });
    }

    void finish() {
        if (closed_) {
            return;
        }
        closed_ = true;
        beast::error_code ignored;
        beast::get_lowest_layer(ws_).socket().close(ignored);
        server_->on_disconnect(id_);
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<Outgoing> queue_;
    std::shared_ptr<RelayServer::Impl> server_;
    ConnectionId id_;
    websocket::close_code close_code_ = websocket::close_code::normal;
    bool closing_ = false;
    bool closed_ = false;
};

void RelayServer::Impl::do_accept() {
    acceptor->async_accept(net::make_strand(ioc), [self = shared_from_this()](beast::error_code ec,
                                                                              tcp::socket socket) {
        if (ec) {
            if (ec == net::error::operation_aborted || self->stopping) {
                return;
            }
        } else if (!self->stopping) {
            const ConnectionId id = self->next_id++;
            auto conn = std::make_shared<RelayConnection>(std::move(socket), self, id);
            {
                std::lock_guard lock(self->mu);
                self->connections[id] = conn;
            }
            ++self->accepted;
            conn->run();
        }
        if (!self->stopping) {
            self->do_accept();
        }
    });
}

std::vector<std::shared_ptr<RelayConnection>> RelayServer::Impl::lookup(
    const std::vector<ConnectionId>& ids) const {
    std::vector<std::shared_ptr<RelayConnection>> out;
    std::lock_guard lock(mu);
    for (auto id : ids) {
        auto it = connections.find(id);
        if (it != connections.end()) {
            if (auto c = it->second.lock()) {
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

void RelayServer::Impl::send_error(const std::shared_ptr<RelayConnection>& conn, std::string_view code,
                                   bool close_after) {
    ++control_errors;
    SignalMessage msg;
    msg.type = SignalType::Error;
    msg.ts_ms = now_ms();
    msg.error = std::string(code);
    conn->send(true, std::make_shared<const std::string>(to_json(msg)), close_after);
}

void RelayServer::Impl::broadcast_roster(const std::string& room, const std::vector<std::string>& peers,
                                         const std::vector<ConnectionId>& members) {
    SignalMessage msg;
    msg.type = SignalType::PeerList;
    msg.room = room;
    msg.ts_ms = now_ms();
    msg.peers = peers;
    auto payload = std::make_shared<const std::string>(to_json(msg));
    for (const auto& c : lookup(members)) {
        c->send(true, payload);
    }
}

void RelayServer::Impl::handle_text(const std::shared_ptr<RelayConnection>& conn, const std::string& text) {
    auto parsed = parse_signal(text);
    if (!parsed) {
        send_error(conn, signal_error::kMalformed, false);
        return;
    }
    const SignalMessage& msg = *parsed;
    switch (msg.type) {
        case SignalType::Join: {
            JoinOutcome outcome;
            {
                std::lock_guard lock(mu);
                outcome = registry.join(conn->id(), msg.room, msg.peer);
            }
            if (!outcome.accepted) {
                log("refused " + msg.peer + " in room " + msg.room + ": " + outcome.error);
                send_error(conn, outcome.error, true);
                return;
            }
            if (outcome.evicted) {
                for (const auto& old : lookup({*outcome.evicted})) {
                    log("evicted older registration of " + msg.peer + " in room " + msg.room);
                    send_error(old, signal_error::kEvicted, true);
                }
            }
            log("join " + msg.peer + " room " + msg.room + " (" + std::to_string(outcome.peers.size()) +
                " peers)");
            SignalMessage joined;
            joined.type = SignalType::Joined;
            joined.room = msg.room;
            joined.peer = msg.peer;
            joined.ts_ms = now_ms();
            joined.peers = outcome.peers;
            conn->send(true, std::make_shared<const std::string>(to_json(joined)));
            broadcast_roster(msg.room, outcome.peers, outcome.members);
            return;
        }
        case SignalType::Leave: {
            std::optional<LeaveOutcome> left;
            {
                std::lock_guard lock(mu);
                left = registry.leave(conn->id());
            }
            if (!left) {
                send_error(conn, signal_error::kNotJoined, false);
                return;
            }
            log("leave " + left->left.peer + " room " + left->left.room);
            SignalMessage bye;
            bye.type = SignalType::Leave;
            bye.room = left->left.room;
            bye.peer = left->left.peer;
            bye.ts_ms = now_ms();
            auto payload = std::make_shared<const std::string>(to_json(bye));
            for (const auto& c : lookup(left->members)) {
                c->send(true, payload);
            }
            broadcast_roster(left->left.room, left->peers, left->members);
            return;
        }
        case SignalType::Ping: {
            SignalMessage pong;
            pong.type = SignalType::Pong;
            pong.room = msg.room;
            pong.peer = msg.peer;
            pong.ts_ms = now_ms();
            pong.echo_ts_ms = msg.ts_ms;
            conn->send(true, std::make_shared<const std::string>(to_json(pong)));
            return;
        }
        default:
            send_error(conn, signal_error::kBadRequest, false);
            return;
    }
}

void RelayServer::Impl::handle_binary(const std::shared_ptr<RelayConnection>& conn, const std::string& data) {
    std::optional<Membership> member;
    std::vector<ConnectionId> targets;
    {
        std::lock_guard lock(mu);
        member = registry.membership(conn->id());
        targets = registry.relay_targets(conn->id());
    }
    if (!member) {
        send_error(conn, signal_error::kNotJoined, false);
        return;
    }
    ++relayed;
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(data.data());
    auto wrapped = wrap_relay_data(member->peer, std::span<const std::uint8_t>(bytes, data.size()));
    auto payload = std::make_shared<const std::string>(wrapped.begin(), wrapped.end());
    for (const auto& c : lookup(targets)) {
        ++deliveries;
        c->send(false, payload);
    }
}

void RelayServer::Impl::on_disconnect(ConnectionId id) {
    std::optional<LeaveOutcome> left;
    {
        std::lock_guard lock(mu);
        connections.erase(id);
        left = registry.leave(id);
    }
    if (!left) {
        return;
    }
    log("disconnect " + left->left.peer + " room " + left->left.room);
    SignalMessage bye;
    bye.type = SignalType::Leave;
    bye.room = left->left.room;
    bye.peer = left->left.peer;
    bye.ts_ms = now_ms();
    auto payload = std::make_shared<const std::string>(to_json(bye));
    for (const auto& c : lookup(left->members)) {
        c->send(true, payload);
    }
    broadcast_roster(left->left.room, left->peers, left->members);
}

RelayServer::RelayServer(RelayConfig config) : impl_(std::make_shared<Impl>(std::move(config))) {}

RelayServer::~RelayServer() { stop(); }

Expected<std::uint16_t, std::string> RelayServer::start() {
    beast::error_code ec;
    const auto address = net::ip::make_address(impl_->config.address, ec);
    if (ec) {
        return unexpected("bad bind address '" + impl_->config.address + "': " + ec.message());
    }
    tcp::endpoint endpoint{address, impl_->config.port};
    impl_->acceptor.emplace(impl_->ioc);
    auto fail = [&](const char* what) {
        impl_->acceptor.reset();
        return unexpected(std::string(what) + " " + impl_->config.address + ":" +
                          std::to_string(impl_->config.port) + ": " + ec.message());
    };
    impl_->acceptor->open(endpoint.protocol(), ec);
    if (ec) {
        return fail("cannot open");
    }
    impl_->acceptor->set_option(net::socket_base::reuse_address(true), ec);
    impl_->acceptor->bind(endpoint, ec);
    if (ec) {
        return fail("cannot bind");
    }
    impl_->acceptor->listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
        return fail("cannot listen on");
    }
    impl_->bound_port = impl_->acceptor->local_endpoint().port();
    impl_->work.emplace(net::make_work_guard(impl_->ioc));
    impl_->do_accept();
    const std::size_t n = std::max<std::size_t>(1, impl_->config.io_threads);
    for (std::size_t i = 0; i < n; ++i) {
        impl_->threads.emplace_back([impl = impl_] { impl->ioc.run(); });
    }
    impl_->log("listening on " + impl_->config.address + ":" + std::to_string(impl_->bound_port));
    return impl_->bound_port;
}

void RelayServer::stop() {
    if (!impl_ || impl_->stopped || impl_->threads.empty()) {
        return;
    }
    impl_->stopped = true;
    impl_->stopping = true;
    net::post(impl_->ioc, [impl = impl_] {
        beast::error_code ignored;
        if (impl->acceptor) {
            impl->acceptor->close(ignored);
        }
    });
    std::vector<std::shared_ptr<RelayConnection>> live;
    {
        std::lock_guard lock(impl_->mu);
        for (auto& [id, weak] : impl_->connections) {
            if (auto c = weak.lock()) {
                live.push_back(std::move(c));
            }
        }
    }
    for (auto& c : live) {
        c->close(websocket::close_code::going_away);
    }
    live.clear();
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
    while (connection_count() > 0 && std::chrono::steady_clock::now() < deadline) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    impl_->work.reset();
    impl_->ioc.stop();
    for (auto& t : impl_->threads) {
        t.join();
    }
    impl_->threads.clear();
    // ioc.stop() may have raced the posted close; no handler can run now.
    if (impl_->acceptor) {
        beast::error_code ignored;
        impl_->acceptor->close(ignored);
    }
    // Connections still referenced by pending handlers hold the Impl; drop them now.
    {
        std::lock_guard lock(impl_->mu);
        impl_->connections.clear();
    }
    impl_->log("stopped");
}

std::uint16_t RelayServer::port() const noexcept { return impl_->bound_port; }

RelayStats RelayServer::stats() const {
    return RelayStats{impl_->accepted.load(), impl_->relayed.load(), impl_->deliveries.load(),
                      impl_->control_errors.load()};
}

std::size_t RelayServer::connection_count() const {
    std::lock_guard lock(impl_->mu);
    return impl_->connections.size();
}

double RelayServer::server_time_ms() const { return impl_->now_ms(); }

}  // namespace puppetcast::transport
