#pragma once

#include <chrono>
#include <cstddef>

namespace streamdec {

// Monotonic time source used to measure compute per decoding step.
// Searchers report scorer work through on_scorer_calls() so that a
// simulated clock can charge a deterministic cost for it.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now_ms() = 0;
    virtual void on_scorer_calls(std::size_t /*calls*/) {}
};

class SteadyClock final : public Clock {
public:
    double now_ms() override {
        using namespace std::chrono;
        return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
    }
};

// Deterministic cost model: every scorer call costs a fixed amount.
class SimulatedClock final : public Clock {
public:
    explicit SimulatedClock(double ms_per_scorer_call = 0.05) : cost_(ms_per_scorer_call) {}
    double now_ms() override { return now_; }
    void on_scorer_calls(std::size_t calls) override { now_ += cost_ * static_cast<double>(calls); }

private:
    double cost_;
    double now_ = 0.0;
};

// Test clock: advances by a fixed tick on every read, plus explicit advance().
class ManualClock final : public Clock {
public:
    explicit ManualClock(double tick_ms = 0.0) : tick_(tick_ms) {}
    double now_ms() override {
        double t = now_;
        now_ += tick_;
        return t;
    }
    void advance(double ms) { now_ += ms; }

private:
    double tick_;
    double now_ = 0.0;
};

} // namespace streamdec
