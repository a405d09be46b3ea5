#include "puppetcast/pipeline/loopback.hpp"

#include <filesystem>

#include <gtest/gtest.h>

#include "golden_vectors.hpp"
#include "puppetcast/codec/wire.hpp"
#include "puppetcast/metrics/report.hpp"

namespace puppetcast::pipeline {
namespace {

using puppetcast::testing::fixture_path;
using puppetcast::testing::read_bytes;

LoopbackConfig fixture_config() {
    LoopbackConfig c;
    c.source = parse_source("trace:" + fixture_path("traces/synth_10s.kpt")).value();
    c.fps = 10.0;
    c.duration_s = 10.0;
    c.simulated = true;
    return c;
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("puppetcast_pipeline_" + name);
    std::filesystem::remove_all(p);
    return p;
}

TEST(Source, ParsesSpecs) {
    auto t = parse_source("trace:a.kpt");
    ASSERT_TRUE(t.has_value());
    EXPECT_EQ(t->kind, SourceSpec::Kind::Trace);
    EXPECT_EQ(t->path, "a.kpt");
    auto s = parse_source("synth:amp=0.05,period=1500");
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->kind, SourceSpec::Kind::Synth);
    EXPECT_DOUBLE_EQ(s->synth.amplitude, 0.05);
    EXPECT_EQ(s->synth.period_ms, 1500u);
    EXPECT_TRUE(parse_source("synth").has_value());
    EXPECT_TRUE(parse_source("synth:").has_value());
    EXPECT_FALSE(parse_source("trace:").has_value());
    EXPECT_FALSE(parse_source("camera:0").has_value());
    auto bad = parse_source("synth:amp=banana");
    ASSERT_FALSE(bad.has_value());
    EXPECT_EQ(bad.error().kind, ErrorKind::Config);
}

TEST(Source, MissingTraceIsConfigError) {
    auto spec = parse_source("trace:/nonexistent/x.kpt").value();
    auto src = FrameSource::open(spec, 10.0);
    ASSERT_FALSE(src.has_value());
    EXPECT_EQ(src.error().kind, ErrorKind::Config);
}

TEST(Source, CorruptTraceIsCorruption) {
    auto bytes = read_bytes(fixture_path("traces/synth_10s.kpt"));
    bytes[4 + 4] = 0x07;
    const auto path = scratch("corrupt.kpt");
    std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                static_cast<std::streamsize>(bytes.size()));
    auto src = FrameSource::open(parse_source("trace:" + path.string()).value(), 10.0);
    ASSERT_FALSE(src.has_value());
    EXPECT_EQ(src.error().kind, ErrorKind::Corrupt);
    std::filesystem::remove(path);
}

TEST(Source, TraceLoopsAtFixedRate) {
    auto src = FrameSource::open(fixture_config().source, 20.0).value();
    for (int i = 0; i < 250; ++i) {
        ASSERT_DOUBLE_EQ(*src.next_due(), 50.0 * i);
        const auto f = src.produce();
        EXPECT_EQ(f.seq, i);
        EXPECT_TRUE(f.pose && f.face);
    }
}

TEST(Loopback, FixtureAtTenFpsGivesNominalBitrate) {
    auto result = run_loopback(fixture_config());
    ASSERT_TRUE(result.has_value()) << result.error().message;
    EXPECT_EQ(result->frames_offered, 100u);
    EXPECT_EQ(result->channel.delivered, 100u);
    const auto r = metrics::report(result->ledger);
    EXPECT_EQ(r.frames, 100u);
    EXPECT_NEAR(r.mean_bitrate_bps, 408.0 * 8 * 10, 1e-6);
    EXPECT_NEAR(r.bitrate_bps.median, 32640.0, 1e-6);
    EXPECT_NEAR(r.mean_fps, 10.0, 1e-9);
    EXPECT_EQ(r.monotonicity_violations, 0u);
}

TEST(Loopback, InjectedStageDelaysAreRecovered) {
    auto c = fixture_config();
    c.extract_delay_ms = 5.0;
    c.channel.base_delay_ms = 20;
    c.render_delay_ms = 3.0;
    auto result = run_loopback(c).value();
    const auto r = metrics::report(result.ledger);
    EXPECT_DOUBLE_EQ(r.extraction_ms.median, 5.0);
    EXPECT_DOUBLE_EQ(r.transmission_ms.median, 20.0);
    EXPECT_DOUBLE_EQ(r.render_ms.median, 3.0);
    EXPECT_DOUBLE_EQ(r.net_ms.median, 28.0);
    for (const auto& [key, rec] : result.ledger.snapshot()) {
        ASSERT_TRUE(rec.complete());
        using metrics::Stage;
        const auto at = [&](Stage s) { return *rec.at(s); };
        EXPECT_EQ(at(Stage::RenderDone) - at(Stage::Capture),
                  (at(Stage::ExtractDone) - at(Stage::Capture)) + (at(Stage::Send) - at(Stage::ExtractDone)) +
                      (at(Stage::Recv) - at(Stage::Send)) + (at(Stage::RenderDone) - at(Stage::Recv)));
    }
}

TEST(Loopback, ThrottleCapsDeliveredRate) {
    auto c = fixture_config();
    c.fps = 20.0;
    c.duration_s = 20.0;
    c.channel.rate_bps = 35'000;
    auto result = run_loopback(c).value();
    EXPECT_EQ(result.frames_offered, 400u);
    EXPECT_GT(result.channel.dropped_overflow, 0u);
    const auto r = metrics::report(result.ledger);
    EXPECT_NEAR(r.mean_fps, 35000.0 / 3264.0, 0.3);
    EXPECT_LE(r.mean_bitrate_bps, 35000.0 * 1.02);
    // Queueing delay grows until the pending queue saturates.
    EXPECT_GT(r.transmission_ms.p90, 1000.0);
}

TEST(Loopback, ZeroDurationIsEmpty) {
    auto c = fixture_config();
    c.duration_s = 0.0;
    auto result = run_loopback(c).value();
    EXPECT_EQ(result.frames_offered, 0u);
    EXPECT_TRUE(metrics::report(result.ledger).empty);
}

TEST(Loopback, RejectsBadChannel) {
    auto c = fixture_config();
    c.channel.loss_prob = 2.0;
    auto result = run_loopback(c);
    ASSERT_FALSE(result.has_value());
    EXPECT_EQ(result.error().kind, ErrorKind::Config);
}

TEST(Loopback, RenderedFramesAreByteStable) {
    auto puppet = load_bound_puppet(fixture_path("puppets/stick_figure.json"));
    ASSERT_TRUE(puppet.has_value()) << puppet.error().message;
    std::vector<std::vector<std::uint8_t>> runs[2];
    for (int run = 0; run < 2; ++run) {
        auto c = fixture_config();
        c.duration_s = 2.0;
        c.puppet = *puppet;
        c.render_dir = scratch("render" + std::to_string(run));
        c.animated = true;
        auto result = run_loopback(c).value();
        EXPECT_EQ(result.receiver.rendered, 20u);
        for (std::uint64_t i = 1; i <= 20; ++i) {
            const auto path = *c.render_dir / svg_frame_name(i);
            ASSERT_TRUE(std::filesystem::exists(path)) << path;
            runs[run].push_back(read_bytes(path.string()));
        }
        EXPECT_FALSE(std::filesystem::exists(*c.render_dir / svg_frame_name(21)));
        EXPECT_TRUE(std::filesystem::exists(*c.render_dir / "animated.svg"));
        std::filesystem::remove_all(*c.render_dir);
    }
    EXPECT_EQ(runs[0], runs[1]);
    EXPECT_NE(runs[0][0], runs[0][5]);
}

TEST(Loopback, DeltaModeRendersIdenticalGeometry) {
    auto puppet = load_bound_puppet(fixture_path("puppets/mannequin.json")).value();
    std::vector<std::vector<std::uint8_t>> frames[2];
    std::uint64_t bytes[2] = {0, 0};
    for (int delta = 0; delta < 2; ++delta) {
        auto c = fixture_config();
        c.duration_s = 4.0;
        c.delta = delta == 1;
        c.puppet = puppet;
        c.render_dir = scratch("delta" + std::to_string(delta));
        auto result = run_loopback(c).value();
        bytes[delta] = result.channel.bytes_delivered;
        for (std::uint64_t i = 1; i <= 40; ++i) {
            frames[delta].push_back(read_bytes((*c.render_dir / svg_frame_name(i)).string()));
        }
        std::filesystem::remove_all(*c.render_dir);
    }
    EXPECT_EQ(frames[0], frames[1]);
    EXPECT_LT(bytes[1], bytes[0]);
}

TEST(Receiver, MalformedFramesAreCountedAndSkipped) {
    metrics::LatencyLedger ledger;
    ReceiverOptions opt;
    opt.puppet = load_bound_puppet(fixture_path("puppets/stick_figure.json")).value();
    ReceiverStage rx(opt, ledger);
    VirtualClock clock;
    const std::vector<std::uint8_t> junk = {0x01, 0x00, 0x00};
    EXPECT_FALSE(rx.on_frame("a", junk, 0.0, clock));
    auto frame = read_bytes(fixture_path("traces/synth_10s.kpt"));
    std::vector<std::uint8_t> good(frame.begin() + 8, frame.begin() + 8 + 408);
    auto wrong_version = good;
    wrong_version[0] = 0x02;
    EXPECT_FALSE(rx.on_frame("a", wrong_version, 1.0, clock));
    EXPECT_TRUE(rx.on_frame("a", good, 2.0, clock));
    EXPECT_EQ(rx.counters().received, 3u);
    EXPECT_EQ(rx.counters().malformed, 1u);
    EXPECT_EQ(rx.counters().unsupported_version, 1u);
    EXPECT_EQ(rx.counters().rendered, 1u);
    EXPECT_EQ(ledger.size(), 1u);
}

TEST(Receiver, BadPuppetIsConfigError) {
    auto r = load_bound_puppet("/nonexistent/puppet.json");
    ASSERT_FALSE(r.has_value());
    EXPECT_EQ(r.error().kind, ErrorKind::Config);
}

TEST(Loopback, RealtimeShortRun) {
    auto c = fixture_config();
    c.simulated = false;
    c.duration_s = 1.0;
    c.fps = 20.0;
    auto result = run_loopback(c).value();
    EXPECT_EQ(result.frames_offered, 20u);
    EXPECT_EQ(result.receiver.received, 20u);
    EXPECT_GE(result.elapsed_ms, 950.0);
    EXPECT_EQ(metrics::report(result.ledger).monotonicity_violations, 0u);
}

}  // namespace
}  // namespace puppetcast::pipeline
