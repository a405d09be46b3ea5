#include "puppetcast/transport/peer_session.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "puppetcast/codec/wire.hpp"
#include "puppetcast/common/clock.hpp"
#include "puppetcast/transport/sequence_gate.hpp"
#include "puppetcast/transport/signal_message.hpp"

namespace puppetcast::transport {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct PeerSession::Impl : std::enable_shared_from_this<PeerSession::Impl> {
    explicit Impl(SessionConfig cfg)
        : config(std::move(cfg)), ws(net::make_strand(ioc)), channel(config.channel) {}

    SessionConfig config;
    net::io_context ioc;
    websocket::stream<beast::tcp_stream> ws;
    beast::flat_buffer read_buffer;
    std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
    std::thread io_thread;
    std::thread pump_thread;
    std::chrono::steady_clock::time_point epoch = std::chrono::steady_clock::now();

    // Receive side and control state.
    mutable std::mutex mu;
    std::condition_variable cv;
    std::deque<ReceivedFrame> inbox;
    SequenceGate gate;
    std::vector<std::string> peers;
    std::map<double, std::pair<double, double>> pongs;  // echo -> (server ts, local recv)
    bool open = false;
    std::optional<std::string> close_reason;
    std::uint64_t frames_received = 0;
    std::uint64_t receive_overflow = 0;

    // Send side; the pump thread owns delivery timing.
    mutable std::mutex chan_mu;
    std::condition_variable chan_cv;
    ThrottledChannel channel;
    bool stop_pump = false;
    std::uint64_t frames_offered = 0;
    std::atomic<std::uint64_t> frames_sent{0};

    // Strand-only write queue.
    struct Outgoing {
        bool text;
        std::shared_ptr<const std::string> payload;
        bool close_after;
    };
    std::deque<Outgoing> write_queue;
    bool closing = false;

    Micros now_us() const {
        return std::chrono::duration_cast<Micros>(std::chrono::steady_clock::now() - epoch);
    }

    void set_peers(const std::vector<std::string>& roster) {
        std::vector<std::string> others;
        for (const auto& p : roster) {
            if (p != config.peer_id) {
                others.push_back(p);
            }
        }
        {
            std::lock_guard lock(mu);
            peers = others;
        }
        {
            std::lock_guard lock(chan_mu);
            channel.set_paused(others.empty());
        }
        chan_cv.notify_all();
        cv.notify_all();
    }

    void mark_closed(std::string reason) {
        {
            std::lock_guard lock(mu);
            if (open) {
                open = false;
                if (!close_reason) {
                    close_reason = std::move(reason);
                }
            }
        }
        cv.notify_all();
    }

    void post_write(bool text, std::shared_ptr<const std::string> payload, bool close_after = false) {
        net::post(ws.get_executor(), [self = shared_from_this(), text, payload = std::move(payload),
                                      close_after]() mutable {
            if (self->closing) {
                return;
            }
            self->write_queue.push_back(Outgoing{text, std::move(payload), close_after});
            if (self->write_queue.size() == 1) {
                self->do_write();
            }
        });
    }

    void do_write() {
        auto& front = write_queue.front();
        ws.text(front.text);
        ws.async_write(net::buffer(*front.payload), [self = shared_from_this()](beast::error_code ec,
                                                                                std::size_t) {
            if (ec) {
                self->write_queue.clear();
                self->mark_closed("write failed: " + ec.message());
                return;
            }
            const bool close_after = self->write_queue.front().close_after;
            self->write_queue.pop_front();
            if (close_after) {
                self->write_queue.clear();
                self->closing = true;
                self->ws.async_close(websocket::close_code::normal,
                                     [self](beast::error_code) { self->mark_closed("closed"); });
            } else if (!self->write_queue.empty()) {
                self->do_write();
            }
        });
    }

    void do_read() {
        ws.async_read(read_buffer, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->mark_closed(ec == websocket::error::closed ? "closed by relay"
                                                                 : "read failed: " + ec.message());
                return;
            }
            const double recv_ms = monotonic_ms();
            const bool text = self->ws.got_text();
            std::string data = beast::buffers_to_string(self->read_buffer.data());
            self->read_buffer.consume(self->read_buffer.size());
            if (text) {
                self->on_control(data, recv_ms);
            } else {
                self->on_data(data, recv_ms);
            }
            self->do_read();
        });
    }

    void on_control(const std::string& text, double recv_ms) {
        auto msg = parse_signal(text);
        if (!msg) {
            return;
        }
        switch (msg->type) {
            case SignalType::PeerList:
                if (msg->peers) {
                    set_peers(*msg->peers);
                }
                break;
            case SignalType::Pong:
                if (msg->echo_ts_ms) {
                    std::lock_guard lock(mu);
                    pongs[*msg->echo_ts_ms] = {msg->ts_ms, recv_ms};
                }
                cv.notify_all();
                break;
            case SignalType::Error:
                if (msg->error && *msg->error == signal_error::kEvicted) {
                    std::lock_guard lock(mu);
                    close_reason = "evicted by a newer registration";
                }
                break;
            default:
                break;
        }
    }

    void on_data(const std::string& data, double recv_ms) {
        const auto* bytes = reinterpret_cast<const std::uint8_t*>(data.data());
        auto relay = unwrap_relay_data(std::span<const std::uint8_t>(bytes, data.size()));
        if (!relay) {
            return;
        }
        {
            std::lock_guard lock(mu);
            if (auto header = codec::parse_header(relay->payload)) {
                if (!gate.admit(relay->sender, header->seq)) {
                    return;
                }
            }
            ++frames_received;
            if (inbox.size() >= config.receive_capacity) {
                inbox.pop_front();
                ++receive_overflow;
            }
            inbox.push_back(ReceivedFrame{std::move(relay->sender), std::move(relay->payload), recv_ms});
        }
        cv.notify_all();
    }

    void pump() {
        std::unique_lock lock(chan_mu);
        while (!stop_pump) {
            auto deliveries = channel.poll(now_us());
            for (auto& d : deliveries) {
                ++frames_sent;
                post_write(false, std::make_shared<const std::string>(d.bytes.begin(), d.bytes.end()));
            }
            if (auto next = channel.next_event()) {
                chan_cv.wait_until(lock, epoch + *next);
            } else {
                chan_cv.wait(lock);
            }
        }
    }
};

Expected<std::unique_ptr<PeerSession>, SessionError> PeerSession::open(SessionConfig config) {
    using Kind = SessionError::Kind;
    if (!valid_identifier(config.room) || !valid_identifier(config.peer_id)) {
        return unexpected(SessionError{Kind::Rejected, "room and peer id must be 1-64 chars of [A-Za-z0-9._-]", false});
    }
    if (auto err = validate(config.channel)) {
        return unexpected(SessionError{Kind::Rejected, "invalid channel config: " + *err, false});
    }
    auto impl = std::make_shared<Impl>(std::move(config));
    const auto& cfg = impl->config;

    // The join handshake runs as async operations on the caller's thread so every step is
    // bounded by the connect timeout (tcp_stream expiry does not apply to blocking calls).
    auto run = [&impl](auto&& start_op) {
        beast::error_code result = net::error::would_block;
        start_op([&result](beast::error_code ec, auto&&...) { result = ec; });
        impl->ioc.restart();
        impl->ioc.run();
        return result;
    };
    auto& stream = beast::get_lowest_layer(impl->ws);
    const std::string where = cfg.host + ":" + std::to_string(cfg.port);

    beast::error_code ec;
    tcp::resolver resolver(impl->ioc);
    const auto results = resolver.resolve(cfg.host, std::to_string(cfg.port), ec);
    if (ec) {
        return unexpected(SessionError{Kind::Unreachable, "cannot resolve " + cfg.host + ": " + ec.message(), true});
    }
    stream.expires_after(cfg.connect_timeout);
    ec = run([&](auto handler) { stream.async_connect(results, handler); });
    if (!ec && stream.socket().local_endpoint(ec) == stream.socket().remote_endpoint(ec)) {
        ec = net::error::connection_refused;  // TCP self-connect to an unused local port
    }
    if (ec) {
        return unexpected(SessionError{Kind::Unreachable, "cannot connect to " + where + ": " + ec.message(), true});
    }
    ec = run([&](auto handler) { impl->ws.async_handshake(where, "/", handler); });
    if (ec) {
        return unexpected(SessionError{Kind::Protocol, "websocket handshake with " + where + " failed: " + ec.message(), true});
    }

    SignalMessage join;
    join.type = SignalType::Join;
    join.room = cfg.room;
    join.peer = cfg.peer_id;
    join.ts_ms = monotonic_ms();
    const std::string join_text = to_json(join);
    impl->ws.text(true);
    ec = run([&](auto handler) { impl->ws.async_write(net::buffer(join_text), handler); });
    if (ec) {
        return unexpected(SessionError{Kind::Unreachable, "join failed: " + ec.message(), true});
    }
    for (;;) {
        beast::flat_buffer buffer;
        ec = run([&](auto handler) { impl->ws.async_read(buffer, handler); });
        if (ec) {
            return unexpected(SessionError{Kind::Protocol, "no join reply from relay: " + ec.message(), true});
        }
        auto reply = parse_signal(beast::buffers_to_string(buffer.data()));
        if (!reply) {
            continue;
        }
        if (reply->type == SignalType::Error) {
            const std::string code = reply->error.value_or("");
            beast::error_code ignored;
            stream.socket().close(ignored);
            if (code == signal_error::kRoomFull) {
                return unexpected(SessionError{Kind::RoomFull, "room " + cfg.room + " is full", true});
            }
            return unexpected(SessionError{Kind::Rejected, "join refused: " + code, false});
        }
        if (reply->type == SignalType::Joined) {
            impl->set_peers(reply->peers.value_or(std::vector<std::string>{}));
            break;
        }
    }
    stream.expires_never();
    impl->ws.set_option(websocket::stream_base::timeout::suggested(beast::role_type::client));
    impl->open = true;

    impl->ioc.restart();
    impl->work.emplace(net::make_work_guard(impl->ioc));
    net::post(impl->ws.get_executor(), [impl] { impl->do_read(); });
    impl->io_thread = std::thread([impl] { impl->ioc.run(); });
    impl->pump_thread = std::thread([impl] { impl->pump(); });

    std::unique_ptr<PeerSession> session(new PeerSession());
    session->impl_ = std::move(impl);
    return session;
}

PeerSession::~PeerSession() { close(); }

ThrottledChannel::OfferResult PeerSession::send_frame(std::vector<std::uint8_t> frame) {
    ThrottledChannel::OfferResult result;
    {
        std::lock_guard lock(impl_->chan_mu);
        ++impl_->frames_offered;
        result = impl_->channel.offer(std::move(frame), impl_->now_us());
    }
    impl_->chan_cv.notify_all();
    return result;
}

std::optional<ReceivedFrame> PeerSession::recv_frame(std::chrono::milliseconds timeout) {
    std::unique_lock lock(impl_->mu);
    impl_->cv.wait_for(lock, timeout, [this] { return !impl_->inbox.empty() || !impl_->open; });
    if (impl_->inbox.empty()) {
        return std::nullopt;
    }
    ReceivedFrame f = std::move(impl_->inbox.front());
    impl_->inbox.pop_front();
    return f;
}

Expected<OffsetEstimate, std::string> PeerSession::estimate_clock_offset(std::size_t n_pings,
                                                                         std::chrono::milliseconds timeout) {
    std::vector<PingSample> samples;
    for (std::size_t i = 0; i < n_pings; ++i) {
        if (!is_open()) {
            break;
        }
        SignalMessage ping;
        ping.type = SignalType::Ping;
        ping.room = impl_->config.room;
        ping.peer = impl_->config.peer_id;
        ping.ts_ms = monotonic_ms();
        const double sent = ping.ts_ms;
        impl_->post_write(true, std::make_shared<const std::string>(to_json(ping)));
        std::unique_lock lock(impl_->mu);
        const bool got = impl_->cv.wait_for(lock, timeout, [&] { return impl_->pongs.count(sent) > 0; });
        if (got) {
            const auto [server_ts, recv_ms] = impl_->pongs[sent];
            impl_->pongs.erase(sent);
            samples.push_back(PingSample{sent, server_ts, recv_ms});
        }
    }
    return transport::estimate_clock_offset(samples, n_pings);
}

bool PeerSession::wait_for_peers(std::size_t n, std::chrono::milliseconds timeout) {
    std::unique_lock lock(impl_->mu);
    return impl_->cv.wait_for(lock, timeout, [&] { return impl_->peers.size() >= n; });
}

bool PeerSession::flush(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        {
            std::lock_guard lock(impl_->chan_mu);
            if (impl_->channel.pending() == 0 && impl_->channel.in_flight() == 0) {
                return true;
            }
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            return false;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
}

std::vector<std::string> PeerSession::remote_peers() const {
    std::lock_guard lock(impl_->mu);
    return impl_->peers;
}

SessionCounters PeerSession::counters() const {
    SessionCounters c;
    {
        std::lock_guard lock(impl_->chan_mu);
        c.frames_offered = impl_->frames_offered;
        c.dropped_overflow = impl_->channel.stats().dropped_overflow;
        c.lost = impl_->channel.stats().lost;
    }
    c.frames_sent = impl_->frames_sent.load();
    std::lock_guard lock(impl_->mu);
    c.frames_received = impl_->frames_received;
    c.stale_dropped = impl_->gate.stale_dropped();
    c.receive_overflow = impl_->receive_overflow;
    return c;
}

bool PeerSession::is_open() const {
    std::lock_guard lock(impl_->mu);
    return impl_->open;
}

std::optional<std::string> PeerSession::close_reason() const {
    std::lock_guard lock(impl_->mu);
    return impl_->close_reason;
}

void PeerSession::close() {
    if (!impl_ || !impl_->io_thread.joinable()) {
        return;
    }
    {
        std::lock_guard lock(impl_->chan_mu);
        impl_->stop_pump = true;
    }
    impl_->chan_cv.notify_all();
    impl_->pump_thread.join();

    if (is_open()) {
        SignalMessage leave;
        leave.type = SignalType::Leave;
        leave.room = impl_->config.room;
        leave.peer = impl_->config.peer_id;
        leave.ts_ms = monotonic_ms();
        impl_->post_write(true, std::make_shared<const std::string>(to_json(leave)), true);
        std::unique_lock lock(impl_->mu);
        impl_->cv.wait_for(lock, std::chrono::seconds(1), [this] { return !impl_->open; });
    }
    impl_->work.reset();
    net::post(impl_->ws.get_executor(), [impl = impl_] {
        beast::error_code ignored;
        beast::get_lowest_layer(impl->ws).socket().close(ignored);
    });
    impl_->io_thread.join();
    impl_->mark_closed("closed");
}

const std::string& PeerSession::peer_id() const noexcept { return impl_->config.peer_id; }
const std::string& PeerSession::room() const noexcept { return impl_->config.room; }

}  // namespace puppetcast::transport
