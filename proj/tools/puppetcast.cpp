#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "puppetcast/common/clock.hpp"
#include "puppetcast/metrics/report.hpp"
#include "puppetcast/pipeline/loopback.hpp"
#include "puppetcast/transport/peer_session.hpp"
#include "puppetcast/transport/relay_server.hpp"

namespace {

using namespace puppetcast;
using pipeline::ErrorKind;
using pipeline::PipelineError;
using json = nlohmann::json;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

int fail(const PipelineError& e) {
    spdlog::error("{}", e.message);
    return pipeline::exit_code(e.kind);
}

int fail(ErrorKind kind, const std::string& message) { return fail(PipelineError{kind, message}); }

void configure_logging() {
    spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    const char* level = std::getenv("PUPPETCAST_LOG");
    spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

// host:port; a bare port means localhost.
bool split_endpoint(const std::string& text, std::string& host, std::uint16_t& port) {
    const auto colon = text.rfind(':');
    const std::string port_text = colon == std::string::npos ? text : text.substr(colon + 1);
    if (colon != std::string::npos) host = text.substr(0, colon);
    if (host.empty()) host = "127.0.0.1";
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(port_text, &used);
        if (used != port_text.size() || v > 65535) return false;
        port = static_cast<std::uint16_t>(v);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

struct ChannelFlags {
    std::uint64_t throttle_bps = 0;
    std::uint64_t burst_bytes = 408;
    std::uint32_t delay_ms = 0;
    std::uint32_t jitter_ms = 0;
    double loss = 0.0;

    void add(CLI::App* cmd) {
        cmd->add_option("--throttle-bps", throttle_bps, "Token-bucket rate in bits/s (0 = unlimited)");
        cmd->add_option("--burst-bytes", burst_bytes, "Token-bucket capacity");
        cmd->add_option("--delay-ms", delay_ms, "Base one-way delay of the virtual channel");
        cmd->add_option("--jitter-ms", jitter_ms, "Uniform jitter bound");
        cmd->add_option("--loss", loss, "Per-message loss probability");
    }

    transport::ChannelConfig config(std::uint64_t seed) const {
        transport::ChannelConfig c;
        c.rate_bps = throttle_bps;
        c.burst_bytes = burst_bytes;
        c.base_delay_ms = delay_ms;
        c.jitter_ms = jitter_ms;
        c.loss_prob = loss;
        c.seed = seed;
        return c;
    }
};

json stats_document(const metrics::LatencyLedger& ledger, const metrics::Report& report, json counters) {
    json doc;
    doc["report"] = json::parse(metrics::export_report(report, metrics::ReportFormat::Json));
    doc["ledger"] = json::parse(ledger.to_json());
    doc["counters"] = std::move(counters);
    return doc;
}

bool write_stats(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    out << doc.dump(2) << '\n';
    if (!out) {
        spdlog::error("cannot write stats to {}", path);
        return false;
    }
    spdlog::info("stats written to {}", path);
    return true;
}

json receiver_counters(const pipeline::ReceiverCounters& c) {
    return {{"received", c.received},
            {"rendered", c.rendered},
            {"malformed", c.malformed},
            {"unsupported_version", c.unsupported_version},
            {"write_errors", c.write_errors}};
}

// ---- serve -----------------------------------------------------------------

struct ServeFlags {
    std::string bind = "127.0.0.1:8765";
    std::string policy = "evict";
    std::size_t max_peers = 16;
};

int cmd_serve(const ServeFlags& f) {
    transport::RelayConfig cfg;
    if (!split_endpoint(f.bind, cfg.address, cfg.port)) {
        return fail(ErrorKind::Config, "bad --bind '" + f.bind + "' (expected host:port)");
    }
    cfg.policy.max_peers_per_room = f.max_peers;
    cfg.policy.on_duplicate = f.policy == "reject" ? transport::DuplicatePeerPolicy::Reject
                                                   : transport::DuplicatePeerPolicy::EvictOlder;
    cfg.log = [](std::string_view line) { spdlog::info("{}", line); };
    transport::RelayServer server(cfg);
    auto port = server.start();
    if (!port) {
        return fail(ErrorKind::Config, "cannot bind " + f.bind + ": " + port.error());
    }
    spdlog::info("relay listening on {}:{}", cfg.address, *port);
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    spdlog::info("shutting down");
    server.stop();
    const auto st = server.stats();
    spdlog::info("relayed {} frames ({} deliveries)", st.frames_relayed, st.deliveries);
    return 0;
}

// ---- send / recv -----------------------------------------------------------

struct NetFlags {
    std::string server = "127.0.0.1:8765";
    std::string room = "default";
    std::string peer;
    std::string stats_out;
    double duration = 10.0;
    double wait_s = 30.0;

    void add(CLI::App* cmd, const std::string& default_peer) {
        peer = default_peer;
        cmd->add_option("--server", server, "Relay host:port")->capture_default_str();
        cmd->add_option("--room", room, "Room to join")->capture_default_str();
        cmd->add_option("--peer", peer, "Peer id")->capture_default_str();
        cmd->add_option("--stats-out", stats_out, "Write stats JSON here on exit");
    }
};

Expected<std::unique_ptr<transport::PeerSession>, PipelineError> connect(const NetFlags& f,
                                                                          transport::ChannelConfig channel) {
    transport::SessionConfig cfg;
    if (!split_endpoint(f.server, cfg.host, cfg.port)) {
        return unexpected(PipelineError{ErrorKind::Config, "bad --server '" + f.server + "'"});
    }
    cfg.room = f.room;
    cfg.peer_id = f.peer;
    cfg.channel = channel;
    auto session = transport::PeerSession::open(cfg);
    if (!session) {
        const auto kind = session.error().kind;
        const bool config_problem = kind == transport::SessionError::Kind::Rejected;
        return unexpected(PipelineError{config_problem ? ErrorKind::Config : ErrorKind::Network,
                                        "cannot join " + f.room + " at " + f.server + ": " + session.error().message});
    }
    return std::move(*session);
}

double clock_offset(transport::PeerSession& session) {
    auto est = session.estimate_clock_offset();
    if (!est) {
        spdlog::warn("clock offset unavailable ({}); assuming 0", est.error());
        return 0.0;
    }
    spdlog::info("relay clock offset {:.3f} ms (rtt {:.3f} ms, {} samples)", est->offset_ms, est->rtt_ms,
                 est->samples);
    return est->offset_ms;
}

struct SendFlags {
    NetFlags net;
    ChannelFlags channel;
    std::string source = "synth";
    double fps = 10.0;
    bool delta = false;
};

int cmd_send(const SendFlags& f, std::uint64_t seed) {
    // Everything that can be validated is validated before connecting.
    auto spec = pipeline::parse_source(f.source);
    if (!spec) return fail(spec.error());
    auto source = pipeline::FrameSource::open(*spec, f.fps);
    if (!source) return fail(source.error());
    if (source->warning()) spdlog::warn("{}", trace::describe(*source->warning()));
    const auto channel = f.channel.config(seed);
    if (auto err = transport::validate(channel)) return fail(ErrorKind::Config, "channel: " + *err);
    if (!(f.net.duration >= 0.0)) return fail(ErrorKind::Config, "--duration must be >= 0");

    auto session = connect(f.net, channel);
    if (!session) return fail(session.error());
    auto& s = **session;
    spdlog::info("joined room {} as {}", s.room(), s.peer_id());
    if (!s.wait_for_peers(1, std::chrono::milliseconds(static_cast<long>(f.net.wait_s * 1000)))) {
        spdlog::warn("no peer joined within {} s; frames are held until one does", f.net.wait_s);
    }

    metrics::LatencyLedger ledger;
    pipeline::SenderOptions opt;
    opt.sender_id = s.peer_id();
    opt.delta = f.delta;
    opt.clock_offset_ms = clock_offset(s);
    pipeline::SenderStage sender(opt, ledger);
    pipeline::SteadyClock clock(std::chrono::steady_clock::time_point{});
    const double start = clock.now_ms();
    const double limit = f.net.duration * 1000.0;
    std::uint64_t offered = 0;
    while (!g_stop.load() && s.is_open()) {
        const auto due = source->next_due();
        if (!due || *due >= limit) break;
        while (!g_stop.load() && clock.now_ms() < start + *due) {
            clock.sleep_until_ms(std::min(start + *due, clock.now_ms() + 50.0));
        }
        if (g_stop.load()) break;
        auto out = sender.capture(*source, clock);
        if (!out) return fail(out.error());
        sender.mark_sent(out->seq, clock.now_ms());
        s.send_frame(std::move(out->bytes));
        ++offered;
    }
    if (!s.flush(std::chrono::seconds(10))) spdlog::warn("channel not drained before close");
    const auto counters = s.counters();
    const auto reason = s.close_reason();
    s.close();
    spdlog::info("offered {} frames, {} sent, {} dropped, {} lost", counters.frames_offered, counters.frames_sent,
                 counters.dropped_overflow, counters.lost);

    const auto r = metrics::report(ledger);
    std::cout << metrics::export_report(r, metrics::ReportFormat::Table);
    if (!f.net.stats_out.empty()) {
        json c = {{"frames_offered", counters.frames_offered},
                  {"frames_sent", counters.frames_sent},
                  {"dropped_overflow", counters.dropped_overflow},
                  {"lost", counters.lost}};
        if (!write_stats(f.net.stats_out, stats_document(ledger, r, c))) return 1;
    }
    if (reason && offered > 0 && counters.frames_sent == 0) {
        return fail(ErrorKind::Network, "session closed: " + *reason);
    }
    return 0;
}

struct RecvFlags {
    NetFlags net;
    std::string puppet;
    std::string render_dir;
    bool animated = false;
    double idle_timeout = 0.0;
};

int cmd_recv(const RecvFlags& f) {
    pipeline::ReceiverOptions opt;
    if (!f.puppet.empty()) {
        auto puppet = pipeline::load_bound_puppet(f.puppet);
        if (!puppet) return fail(puppet.error());
        opt.puppet = *puppet;
    }
    if (!f.render_dir.empty()) {
        if (!opt.puppet) return fail(ErrorKind::Config, "--render-dir needs --puppet");
        std::error_code ec;
        std::filesystem::create_directories(f.render_dir, ec);
        if (ec) return fail(ErrorKind::Config, "cannot create " + f.render_dir);
        opt.render_dir = f.render_dir;
        opt.animated = f.animated;
    }
    if (!(f.net.duration >= 0.0)) return fail(ErrorKind::Config, "--duration must be >= 0");

    auto session = connect(f.net, {});
    if (!session) return fail(session.error());
    auto& s = **session;
    spdlog::info("joined room {} as {}", s.room(), s.peer_id());

    metrics::LatencyLedger ledger;
    ledger.set_receiver_offset(clock_offset(s));
    pipeline::ReceiverStage receiver(opt, ledger);
    pipeline::SteadyClock clock(std::chrono::steady_clock::time_point{});
    const double start = clock.now_ms();
    double last_frame = start;
    while (!g_stop.load() && s.is_open()) {
        const double now = clock.now_ms();
        if (f.net.duration > 0.0 && now - start >= f.net.duration * 1000.0) break;
        if (f.idle_timeout > 0.0 && receiver.counters().received > 0 && now - last_frame >= f.idle_timeout * 1000.0) {
            break;
        }
        auto frame = s.recv_frame(std::chrono::milliseconds(100));
        if (!frame) continue;
        last_frame = clock.now_ms();
        receiver.on_frame(frame->sender, frame->bytes, frame->recv_ms, clock);
    }
    if (auto path = receiver.finish()) spdlog::info("animation written to {}", path->string());
    const auto sc = s.counters();
    s.close();
    const auto& rc = receiver.counters();
    if (rc.malformed + rc.unsupported_version > 0) {
        spdlog::warn("skipped {} malformed and {} unsupported-version frames", rc.malformed, rc.unsupported_version);
    }
    spdlog::info("received {} frames, rendered {}, stale {}", rc.received, rc.rendered, sc.stale_dropped);

    const auto r = metrics::report(ledger);
    std::cout << metrics::export_report(r, metrics::ReportFormat::Table);
    if (!f.net.stats_out.empty()) {
        auto c = receiver_counters(rc);
        c["stale_dropped"] = sc.stale_dropped;
        if (!write_stats(f.net.stats_out, stats_document(ledger, r, c))) return 1;
    }
    return 0;
}

// ---- loopback --------------------------------------------------------------

struct LoopbackFlags {
    ChannelFlags channel;
    std::string source = "synth";
    double fps = 10.0;
    double duration = 10.0;
    bool delta = false;
    std::string puppet;
    std::string render_dir;
    bool animated = false;
    std::string stats_out;
    std::string format = "table";
    double extract_ms = 0.0;
    double render_ms = 0.0;
    bool simulated = false;
};

int cmd_loopback(const LoopbackFlags& f, std::uint64_t seed) {
    auto format = metrics::report_format_from(f.format);
    if (!format) return fail(ErrorKind::Config, "unknown --format '" + f.format + "'");
    auto spec = pipeline::parse_source(f.source);
    if (!spec) return fail(spec.error());
    pipeline::LoopbackConfig cfg;
    cfg.source = *spec;
    cfg.fps = f.fps;
    cfg.duration_s = f.duration;
    cfg.channel = f.channel.config(seed);
    cfg.delta = f.delta;
    cfg.extract_delay_ms = f.extract_ms;
    cfg.render_delay_ms = f.render_ms;
    cfg.simulated = f.simulated;
    cfg.stop = &g_stop;
    if (!f.puppet.empty()) {
        auto puppet = pipeline::load_bound_puppet(f.puppet);
        if (!puppet) return fail(puppet.error());
        cfg.puppet = *puppet;
    }
    if (!f.render_dir.empty()) {
        if (!cfg.puppet) return fail(ErrorKind::Config, "--render-dir needs --puppet");
        cfg.render_dir = f.render_dir;
        cfg.animated = f.animated;
    }
    auto result = pipeline::run_loopback(cfg);
    if (!result) return fail(result.error());
    if (result->source_warning) spdlog::warn("{}", trace::describe(*result->source_warning));
    const auto& ch = result->channel;
    spdlog::info("offered {}, delivered {}, dropped {}, lost {}", result->frames_offered, ch.delivered,
                 ch.dropped_overflow, ch.lost);

    const auto r = metrics::report(result->ledger);
    std::cout << metrics::export_report(r, *format);
    if (!f.stats_out.empty()) {
        auto c = receiver_counters(result->receiver);
        c["frames_offered"] = result->frames_offered;
        c["delivered"] = ch.delivered;
        c["dropped_overflow"] = ch.dropped_overflow;
        c["lost"] = ch.lost;
        if (!write_stats(f.stats_out, stats_document(result->ledger, r, c))) return 1;
    }
    return 0;
}

// ---- report ----------------------------------------------------------------

struct ReportFlags {
    std::vector<std::string> inputs;
    std::string format = "table";
    std::string out;
    double window_ms = 2000.0;
};

int cmd_report(const ReportFlags& f) {
    auto format = metrics::report_format_from(f.format);
    if (!format) return fail(ErrorKind::Config, "unknown --format '" + f.format + "'");
    metrics::LatencyLedger merged;
    for (const auto& path : f.inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) return fail(ErrorKind::Config, "cannot read " + path);
        json doc = json::parse(in, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) return fail(ErrorKind::Corrupt, path + ": not JSON");
        const json& ledger_json = doc.contains("ledger") ? doc["ledger"] : doc;
        auto ledger = metrics::LatencyLedger::from_json(ledger_json.dump());
        if (!ledger) return fail(ErrorKind::Corrupt, path + ": " + ledger.error());
        merged.merge(*ledger);
    }
    metrics::ReportOptions opt;
    opt.window_ms = f.window_ms;
    const auto text = metrics::export_report(metrics::report(merged, opt), *format);
    if (f.out.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream out(f.out, std::ios::binary);
    out << text;
    return out ? 0 : fail(ErrorKind::Config, "cannot write " + f.out);
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Keypoint puppet streaming: relay, sender, receiver and loopback benchmark"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file whose keys mirror the flags");
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "Seed for channel loss and jitter")->capture_default_str();

    ServeFlags serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the signaling and relay server");
    serve_cmd->add_option("--bind", serve.bind, "Listen address host:port")->capture_default_str();
    serve_cmd->add_option("--policy", serve.policy, "Duplicate peer id: evict or reject")
        ->check(CLI::IsMember({"evict", "reject"}))
        ->capture_default_str();
    serve_cmd->add_option("--max-peers", serve.max_peers, "Peers per room")->capture_default_str();

    SendFlags send;
    auto* send_cmd = app.add_subcommand("send", "Stream keypoint frames to a room");
    send.net.add(send_cmd, "sender");
    send_cmd->add_option("--source", send.source, "trace:FILE or synth:PARAMS")->capture_default_str();
    send_cmd->add_option("--fps", send.fps, "Send rate (0 = recorded trace pacing)")->capture_default_str();
    send_cmd->add_flag("--delta", send.delta, "Delta-encode between keyframes");
    send_cmd->add_option("--duration", send.net.duration, "Seconds of frames to send")->capture_default_str();
    send_cmd->add_option("--wait", send.net.wait_s, "Seconds to wait for a receiver")->capture_default_str();
    send.channel.add(send_cmd);

    RecvFlags recv;
    auto* recv_cmd = app.add_subcommand("recv", "Receive, animate and optionally render frames");
    recv.net.add(recv_cmd, "receiver");
    recv.net.duration = 0.0;
    recv_cmd->add_option("--puppet", recv.puppet, "Puppet JSON");
    recv_cmd->add_option("--render-dir", recv.render_dir, "Write frame_NNNNNN.svg per frame here");
    recv_cmd->add_flag("--animated", recv.animated, "Also write animated.svg");
    recv_cmd->add_option("--duration", recv.net.duration, "Stop after this many seconds (0 = until interrupted)");
    recv_cmd->add_option("--idle-timeout", recv.idle_timeout, "Stop when no frame arrives for this many seconds");

    LoopbackFlags loop;
    auto* loop_cmd = app.add_subcommand("loopback", "Sender and receiver in one process over a virtual channel");
    loop_cmd->add_option("--source", loop.source, "trace:FILE or synth:PARAMS")->capture_default_str();
    loop_cmd->add_option("--fps", loop.fps, "Send rate (0 = recorded trace pacing)")->capture_default_str();
    loop_cmd->add_option("--duration", loop.duration, "Seconds of frames to offer")->capture_default_str();
    loop_cmd->add_flag("--delta", loop.delta, "Delta-encode between keyframes");
    loop_cmd->add_option("--puppet", loop.puppet, "Puppet JSON to animate");
    loop_cmd->add_option("--render-dir", loop.render_dir, "Write frame_NNNNNN.svg per frame here");
    loop_cmd->add_flag("--animated", loop.animated, "Also write animated.svg");
    loop_cmd->add_option("--stats-out", loop.stats_out, "Write stats JSON here");
    loop_cmd->add_option("--format", loop.format, "table, json or csv")->capture_default_str();
    loop_cmd->add_option("--inject-extract-ms", loop.extract_ms, "Synthetic extraction delay");
    loop_cmd->add_option("--inject-render-ms", loop.render_ms, "Synthetic render delay");
    loop_cmd->add_flag("--simulated", loop.simulated, "Run on a virtual clock instead of real time");
    loop.channel.add(loop_cmd);

    ReportFlags rep;
    auto* rep_cmd = app.add_subcommand("report", "Merge stats JSON files and print the report");
    rep_cmd->add_option("inputs", rep.inputs, "Stats or ledger JSON files")->required();
    rep_cmd->add_option("--format", rep.format, "table, json or csv")->capture_default_str();
    rep_cmd->add_option("--out", rep.out, "Write here instead of stdout");
    rep_cmd->add_option("--window-ms", rep.window_ms, "Sliding bitrate window")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    try {
        if (*serve_cmd) return cmd_serve(serve);
        if (*send_cmd) return cmd_send(send, seed);
        if (*recv_cmd) return cmd_recv(recv);
        if (*loop_cmd) return cmd_loopback(loop, seed);
        if (*rep_cmd) return cmd_report(rep);
    } catch (const std::exception& e) {
        spdlog::critical("{}", e.what());
        return 1;
    }
    return 1;
}
