#include <chrono>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include "puppetcast/codec/wire.hpp"
#include "puppetcast/common/clock.hpp"
#include "puppetcast/transport/peer_session.hpp"
#include "puppetcast/transport/relay_server.hpp"

namespace puppetcast::transport {
namespace {

using namespace std::chrono_literals;

std::vector<std::uint8_t> frame_with_seq(std::uint16_t seq) {
    keypoint::KeypointFrame f;
    f.seq = seq;
    f.capture_ts_ms = 1000u + seq;
    keypoint::PoseFrame p;
    for (std::size_t i = 0; i < p.keypoints.size(); ++i) {
        p.keypoints[i] = {0.01 * static_cast<double>(i), 0.5, 0.9};
    }
    p.score = 0.8;
    f.pose = p;
    return codec::encode_frame(f).value();
}

class RelayTest : public ::testing::Test {
protected:
    void SetUp() override { start_server({}); }

    void start_server(RoomPolicy policy) {
        server_.reset();
        RelayConfig cfg;
        cfg.port = 0;
        cfg.policy = policy;
        server_ = std::make_unique<RelayServer>(cfg);
        auto port = server_->start();
        ASSERT_TRUE(port) << port.error();
        port_ = *port;
    }

    std::unique_ptr<PeerSession> open(const std::string& peer, const std::string& room = "R",
                                      ChannelConfig channel = {}) {
        SessionConfig cfg;
        cfg.port = port_;
        cfg.room = room;
        cfg.peer_id = peer;
        cfg.channel = channel;
        auto s = PeerSession::open(cfg);
        EXPECT_TRUE(s) << (s ? "" : s.error().message);
        return s ? std::move(*s) : nullptr;
    }

    std::unique_ptr<RelayServer> server_;
    std::uint16_t port_ = 0;
};

TEST_F(RelayTest, JoinWithEmptyRosterThenBothSeeEachOther) {
    auto a = open("A");
    ASSERT_TRUE(a);
    EXPECT_TRUE(a->remote_peers().empty());
    auto b = open("B");
    ASSERT_TRUE(b);
    EXPECT_EQ(b->remote_peers(), std::vector<std::string>{"A"});
    EXPECT_TRUE(a->wait_for_peers(1, 2s));
    EXPECT_EQ(a->remote_peers(), std::vector<std::string>{"B"});
}

TEST_F(RelayTest, DataReachesTheOtherPeerOnly) {
    auto a = open("A");
    auto b = open("B");
    ASSERT_TRUE(a && b);
    ASSERT_TRUE(a->wait_for_peers(1, 2s));
    const auto frame = frame_with_seq(7);
    a->send_frame(frame);
    auto got = b->recv_frame(2s);
    ASSERT_TRUE(got);
    EXPECT_EQ(got->sender, "A");
    EXPECT_EQ(got->bytes, frame);
    EXPECT_FALSE(a->recv_frame(200ms));
}

TEST_F(RelayTest, ThirdPeerFanOut) {
    auto a = open("A");
    auto b = open("B");
    auto c = open("C");
    ASSERT_TRUE(a && b && c);
    ASSERT_TRUE(a->wait_for_peers(2, 2s));
    a->send_frame(frame_with_seq(1));
    auto at_b = b->recv_frame(2s);
    auto at_c = c->recv_frame(2s);
    ASSERT_TRUE(at_b && at_c);
    EXPECT_EQ(at_b->bytes, at_c->bytes);
    EXPECT_FALSE(a->recv_frame(200ms));
}

TEST_F(RelayTest, RoomsDoNotLeak) {
    auto a = open("A", "R1");
    auto b = open("B", "R2");
    ASSERT_TRUE(a && b);
    a->send_frame(frame_with_seq(1));
    EXPECT_FALSE(b->recv_frame(300ms));
}

TEST_F(RelayTest, FramesBufferedUntilAPeerJoins) {
    ChannelConfig ch;
    ch.queue_capacity = 4;
    auto a = open("A", "R", ch);
    ASSERT_TRUE(a);
    for (std::uint16_t s = 0; s < 10; ++s) {
        a->send_frame(frame_with_seq(s));
    }
    EXPECT_EQ(a->counters().dropped_overflow, 6u);
    auto b = open("B");
    ASSERT_TRUE(b);
    for (std::uint16_t s = 6; s < 10; ++s) {
        auto got = b->recv_frame(2s);
        ASSERT_TRUE(got);
        EXPECT_EQ(codec::parse_header(got->bytes)->seq, s);
    }
}

TEST_F(RelayTest, TotalLossDeliversNothing) {
    ChannelConfig ch;
    ch.loss_prob = 1.0;
    auto a = open("A", "R", ch);
    auto b = open("B");
    ASSERT_TRUE(a && b);
    ASSERT_TRUE(a->wait_for_peers(1, 2s));
    for (std::uint16_t s = 0; s < 12; ++s) {
        a->send_frame(frame_with_seq(s));
    }
    ASSERT_TRUE(a->flush(2s));
    EXPECT_FALSE(b->recv_frame(300ms));
    EXPECT_EQ(a->counters().lost, 12u);
}

TEST_F(RelayTest, RejoinEvictsOlderRegistration) {
    auto old_a = open("A");
    auto b = open("B");
    ASSERT_TRUE(old_a && b);
    auto new_a = open("A");
    ASSERT_TRUE(new_a);
    for (int i = 0; i < 100 && old_a->is_open(); ++i) {
        std::this_thread::sleep_for(20ms);
    }
    EXPECT_FALSE(old_a->is_open());
    ASSERT_TRUE(old_a->close_reason());
    EXPECT_NE(old_a->close_reason()->find("evicted"), std::string::npos);
    new_a->send_frame(frame_with_seq(3));
    auto got = b->recv_frame(2s);
    ASSERT_TRUE(got);
    EXPECT_EQ(got->sender, "A");
}

TEST_F(RelayTest, RejectPolicyRefusesDuplicateAndRoomFull) {
    start_server({1, DuplicatePeerPolicy::Reject});
    auto a = open("A");
    ASSERT_TRUE(a);
    SessionConfig cfg;
    cfg.port = port_;
    cfg.room = "R";
    cfg.peer_id = "A";
    auto dup = PeerSession::open(cfg);
    ASSERT_FALSE(dup);
    EXPECT_EQ(dup.error().kind, SessionError::Kind::Rejected);
    cfg.peer_id = "B";
    auto full = PeerSession::open(cfg);
    ASSERT_FALSE(full);
    EXPECT_EQ(full.error().kind, SessionError::Kind::RoomFull);
    EXPECT_TRUE(full.error().retryable);
}

TEST(RelayUnreachable, ConnectionErrorIsRetryable) {
    // Bind then release a port so nothing listens on it.
    RelayConfig rc;
    rc.port = 0;
    std::uint16_t port = 0;
    {
        RelayServer s(rc);
        port = *s.start();
        s.stop();
    }
    SessionConfig cfg;
    cfg.port = port;
    cfg.room = "R";
    cfg.peer_id = "A";
    cfg.connect_timeout = 1000ms;
    auto s = PeerSession::open(cfg);
    ASSERT_FALSE(s);
    EXPECT_EQ(s.error().kind, SessionError::Kind::Unreachable);
    EXPECT_TRUE(s.error().retryable);
}

TEST_F(RelayTest, ClockOffsetAgainstRelayIsSmallOnLoopback) {
    auto a = open("A");
    ASSERT_TRUE(a);
    auto est = a->estimate_clock_offset(10, 500ms);
    ASSERT_TRUE(est) << est.error();
    EXPECT_EQ(est->samples, 10u);
    EXPECT_LT(est->rtt_ms, 50.0);
    // Relay clock is ms since its start; local clock is process monotonic ms.
    EXPECT_NEAR(est->offset_ms, server_->server_time_ms() - monotonic_ms(), 25.0);
}

TEST_F(RelayTest, StaleArrivalsAreDropped) {
    auto a = open("A");
    auto b = open("B");
    ASSERT_TRUE(a && b);
    ASSERT_TRUE(a->wait_for_peers(1, 2s));
    for (std::uint16_t s : {10, 11, 9, 11, 12}) {
        a->send_frame(frame_with_seq(s));
    }
    std::vector<std::uint16_t> seen;
    while (auto f = b->recv_frame(300ms)) {
        seen.push_back(codec::parse_header(f->bytes)->seq);
    }
    EXPECT_EQ(seen, (std::vector<std::uint16_t>{10, 11, 12}));
    EXPECT_EQ(b->counters().stale_dropped, 2u);
}

// Raw protocol client for checks the session API does not expose.
class RawClient {
public:
    explicit RawClient(std::uint16_t port) : ws_(ioc_) {
        namespace net = boost::asio;
        net::ip::tcp::resolver r(ioc_);
        net::connect(ws_.next_layer(), r.resolve("127.0.0.1", std::to_string(port)));
        ws_.handshake("127.0.0.1", "/");
    }
    void text(const std::string& s) {
        ws_.text(true);
        ws_.write(boost::asio::buffer(s));
    }
    void binary(const std::vector<std::uint8_t>& b) {
        ws_.binary(true);
        ws_.write(boost::asio::buffer(b));
    }
    nlohmann::json read_json() {
        boost::beast::flat_buffer buf;
        ws_.read(buf);
        return nlohmann::json::parse(boost::beast::buffers_to_string(buf.data()));
    }

private:
    boost::asio::io_context ioc_;
    boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
};

TEST_F(RelayTest, MalformedMessageKeepsConnection) {
    RawClient c(port_);
    c.text("{not json");
    auto err = c.read_json();
    EXPECT_EQ(err["type"], "error");
    EXPECT_EQ(err["error"], "malformed");
    c.binary({1, 2, 3});
    EXPECT_EQ(c.read_json()["error"], "not-joined");
    c.text(R"({"type":"join","room":"R","peer":"Z","ts_ms":0})");
    auto joined = c.read_json();
    EXPECT_EQ(joined["type"], "joined");
    EXPECT_EQ(joined["peers"], nlohmann::json::array({"Z"}));
    c.text(R"({"type":"ping","room":"R","peer":"Z","ts_ms":123.5})");
    nlohmann::json pong;
    do {
        pong = c.read_json();
    } while (pong["type"] != "pong");
    EXPECT_EQ(pong["echo_ts_ms"], 123.5);
    EXPECT_TRUE(pong["ts_ms"].is_number());
}

}  // namespace
}  // namespace puppetcast::transport
