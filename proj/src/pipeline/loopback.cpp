#include "puppetcast/pipeline/loopback.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <thread>

namespace puppetcast::pipeline {

namespace {

using transport::Micros;
using transport::ThrottledChannel;

constexpr const char* kLoopbackSender = "local";

Micros to_channel(double ms) { return Micros{std::llround(ms * 1000.0)}; }
double from_channel(Micros us) { return static_cast<double>(us.count()) / 1000.0; }

bool stopped(const LoopbackConfig& c) { return c.stop && c.stop->load(); }

struct Parts {
    FrameSource source;
    SenderOptions sender;
    ReceiverOptions receiver;
};

Expected<Parts, PipelineError> prepare(const LoopbackConfig& c) {
    if (!(c.duration_s >= 0.0 && std::isfinite(c.duration_s))) {
        return unexpected(PipelineError{ErrorKind::Config, "duration must be >= 0"});
    }
    if (auto err = transport::validate(c.channel)) {
        return unexpected(PipelineError{ErrorKind::Config, "channel: " + *err});
    }
    if (c.extract_delay_ms < 0.0 || c.render_delay_ms < 0.0) {
        return unexpected(PipelineError{ErrorKind::Config, "injected delays must be >= 0"});
    }
    auto source = FrameSource::open(c.source, c.fps);
    if (!source) {
        return unexpected(source.error());
    }
    if (c.render_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*c.render_dir, ec);
        if (ec) {
            return unexpected(PipelineError{ErrorKind::Config, "cannot create " + c.render_dir->string()});
        }
    }
    SenderOptions s;
    s.sender_id = kLoopbackSender;
    s.delta = c.delta;
    s.keyframe_interval = c.keyframe_interval;
    s.extract_delay_ms = c.extract_delay_ms;
    ReceiverOptions r;
    r.puppet = c.puppet;
    r.render_dir = c.render_dir;
    r.animated = c.animated;
    r.animated_fps = c.fps > 0.0 ? c.fps : 10.0;
    r.render_delay_ms = c.render_delay_ms;
    return Parts{std::move(*source), s, r};
}

std::optional<double> due_within(const FrameSource& src, double limit_ms) {
    auto due = src.next_due();
    if (due && *due < limit_ms) return due;
    return std::nullopt;
}

Expected<LoopbackResult, PipelineError> run_simulated(const LoopbackConfig& c, Parts parts) {
    LoopbackResult result;
    result.source_warning = parts.source.warning();
    VirtualClock clock;
    ThrottledChannel channel(c.channel);
    SenderStage sender(parts.sender, result.ledger);
    ReceiverStage receiver(parts.receiver, result.ledger);
    const double limit_ms = c.duration_s * 1000.0;

    while (!stopped(c)) {
        const auto due = due_within(parts.source, limit_ms);
        const auto event = channel.next_event();
        if (!due && !event) break;
        if (due && (!event || *due <= from_channel(*event))) {
            clock.sleep_until_ms(*due);
            auto out = sender.capture(parts.source, clock);
            if (!out) return unexpected(out.error());
            const double send_ms = clock.now_ms();
            sender.mark_sent(out->seq, send_ms);
            channel.offer(std::move(out->bytes), to_channel(send_ms));
            ++result.frames_offered;
        } else {
            clock.sleep_until_ms(from_channel(*event));
            for (auto& d : channel.poll(to_channel(clock.now_ms()))) {
                receiver.on_frame(kLoopbackSender, d.bytes, from_channel(d.delivery), clock);
            }
        }
    }
    receiver.finish();
    result.channel = channel.stats();
    result.receiver = receiver.counters();
    result.elapsed_ms = clock.now_ms();
    return result;
}

Expected<LoopbackResult, PipelineError> run_realtime(const LoopbackConfig& c, Parts parts) {
    LoopbackResult result;
    result.source_warning = parts.source.warning();
    const auto epoch = std::chrono::steady_clock::now();
    std::mutex mu;
    std::condition_variable cv;
    ThrottledChannel channel(c.channel);
    bool sender_done = false;
    std::optional<PipelineError> failure;
    const double limit_ms = c.duration_s * 1000.0;

    SenderStage sender(parts.sender, result.ledger);
    ReceiverStage receiver(parts.receiver, result.ledger);

    std::thread send_thread([&] {
        SteadyClock clock(epoch);
        while (!stopped(c)) {
            const auto due = due_within(parts.source, limit_ms);
            if (!due) break;
            // Sleep in slices so a stop request is noticed promptly.
            while (!stopped(c) && clock.now_ms() < *due) {
                clock.sleep_until_ms(std::min(*due, clock.now_ms() + 50.0));
            }
            if (stopped(c)) break;
            auto out = sender.capture(parts.source, clock);
            if (!out) {
                std::lock_guard lock(mu);
                failure = out.error();
                break;
            }
            {
                std::lock_guard lock(mu);
                const double send_ms = clock.now_ms();
                sender.mark_sent(out->seq, send_ms);
                channel.offer(std::move(out->bytes), to_channel(send_ms));
                ++result.frames_offered;
            }
            cv.notify_one();
        }
        std::lock_guard lock(mu);
        sender_done = true;
        cv.notify_one();
    });

    SteadyClock clock(epoch);
    std::optional<double> drain_deadline;
    for (;;) {
        std::vector<transport::Delivery> batch;
        {
            std::unique_lock lock(mu);
            if (sender_done) {
                if (!drain_deadline) drain_deadline = clock.now_ms() + c.drain_timeout_ms;
                const bool idle = channel.pending() == 0 && channel.in_flight() == 0;
                if (idle || stopped(c) || clock.now_ms() >= *drain_deadline || failure) break;
            }
            const auto event = channel.next_event();
            double wake = clock.now_ms() + 50.0;
            if (event) wake = std::min(wake, from_channel(*event));
            cv.wait_until(lock, epoch + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                            std::chrono::duration<double, std::milli>(wake)));
            batch = channel.poll(to_channel(clock.now_ms()));
        }
        for (auto& d : batch) {
            receiver.on_frame(kLoopbackSender, d.bytes, clock.now_ms(), clock);
        }
    }
    send_thread.join();
    if (failure) return unexpected(*failure);
    receiver.finish();
    result.channel = channel.stats();
    result.receiver = receiver.counters();
    result.elapsed_ms = clock.now_ms();
    return result;
}

}  // namespace

Expected<LoopbackResult, PipelineError> run_loopback(const LoopbackConfig& config) {
    auto parts = prepare(config);
    if (!parts) return unexpected(parts.error());
    return config.simulated ? run_simulated(config, std::move(*parts)) : run_realtime(config, std::move(*parts));
}

}  // namespace puppetcast::pipeline
