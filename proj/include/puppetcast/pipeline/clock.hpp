#pragma once

#include <chrono>
#include <thread>

namespace puppetcast::pipeline {

/// Millisecond time source for pipeline stages. Readings are relative to the clock's epoch.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now_ms() = 0;
    virtual void sleep_until_ms(double t_ms) = 0;
    void sleep_for_ms(double d_ms) {
        if (d_ms > 0.0) sleep_until_ms(now_ms() + d_ms);
    }
};

class SteadyClock final : public Clock {
public:
    SteadyClock() : epoch_(std::chrono::steady_clock::now()) {}
    explicit SteadyClock(std::chrono::steady_clock::time_point epoch) : epoch_(epoch) {}

    double now_ms() override {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - epoch_).count();
    }
    void sleep_until_ms(double t_ms) override {
        std::this_thread::sleep_until(epoch_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                   std::chrono::duration<double, std::milli>(t_ms)));
    }
    std::chrono::steady_clock::time_point epoch() const noexcept { return epoch_; }

private:
    std::chrono::steady_clock::time_point epoch_;
};

/// Simulated time: sleeping advances the clock instantly.
class VirtualClock final : public Clock {
public:
    double now_ms() override { return now_; }
    void sleep_until_ms(double t_ms) override {
        if (t_ms > now_) now_ = t_ms;
    }
    void set(double t_ms) noexcept { now_ = t_ms; }

private:
    double now_ = 0.0;
};

}  // namespace puppetcast::pipeline
