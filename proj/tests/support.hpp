#pragma once

// Small behaviours shared across kernel-level tests.

#include <any>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ebdevs/atomic.hpp"
#include "ebdevs/macro.hpp"
#include "ebdevs/simulation.hpp"

namespace ebtest {

using namespace ebdevs;

// Fires every `period` time units; optionally emits `payload` on "out".
class Periodic final : public Atomic {
public:
    explicit Periodic(double period, bool emits = false, int payload = 0)
        : period_(period), emits_(emits), payload_(payload) {}

    SimTime time_advance() override { return SimTime(period_); }
    void output(OutputBus& out) override {
        ++output_calls;
        if (emits_) out.emit("out", payload_);
    }
    void internal_transition(MacroAccess&) override { ++internal_count; }
    void external_transition(SimTime, std::span<const Message> inputs, MacroAccess&) override {
        external_count += 1;
        received += inputs.size();
    }

    int internal_count = 0;
    int external_count = 0;
    int output_calls = 0;
    std::size_t received = 0;

private:
    double period_;
    bool emits_;
    int payload_;
};

// Emits one scheduled payload per internal transition at fixed times.
class Emitter final : public Atomic {
public:
    explicit Emitter(std::vector<std::pair<double, int>> plan) : plan_(std::move(plan)) {}

    SimTime time_advance() override {
        if (idx_ >= plan_.size()) return SimTime::infinity();
        double prev = idx_ == 0 ? 0.0 : plan_[idx_ - 1].first;
        return SimTime(plan_[idx_].first - prev);
    }
    void output(OutputBus& out) override { out.emit("out", plan_[idx_].second); }
    void internal_transition(MacroAccess&) override { ++idx_; }

private:
    std::vector<std::pair<double, int>> plan_;
    std::size_t idx_ = 0;
};

// Passive receiver recording payloads and elapsed times.
class Sink final : public Atomic {
public:
    SimTime time_advance() override { return SimTime::infinity(); }
    void internal_transition(MacroAccess&) override {}
    void external_transition(SimTime elapsed, std::span<const Message> inputs,
                             MacroAccess&) override {
        for (const Message& m : inputs) received.push_back(std::any_cast<int>(m.payload));
        elapsed_values.push_back(elapsed.value());
    }

    std::vector<int> received;
    std::vector<double> elapsed_values;
};

// Minimalist trajectory model: s1 -(internal at ta(s1))-> s2 -(x1)-> s3
// -(x2)-> s4. Emits y_up on the first two transitions only.
class Minimalist final : public Atomic {
public:
    explicit Minimalist(double first_ta = 2.0) : first_ta_(first_ta) {}

    SimTime time_advance() override {
        return state == 1 ? SimTime(first_ta_) : SimTime::infinity();
    }
    void output(OutputBus& out) override {
        ++output_calls;
        out.emit("y", state);
    }
    void internal_transition(MacroAccess&) override {
        state = 2;
        history.push_back(state);
        yup_ = std::string("y_up1");
    }
    void external_transition(SimTime elapsed, std::span<const Message> inputs,
                             MacroAccess&) override {
        state += static_cast<int>(inputs.size());
        history.push_back(state);
        elapsed_values.push_back(elapsed.value());
        if (state == 3) yup_ = std::string("y_up2");  // no y_up for s3 -> s4
    }
    std::optional<std::any> take_yup() override {
        return std::exchange(yup_, std::nullopt);
    }

    int state = 1;
    std::vector<int> history{1};
    std::vector<double> elapsed_values;
    int output_calls = 0;

private:
    double first_ta_;
    std::optional<std::any> yup_;
};

// Returns a negative time advance after the first internal transition.
class IllegalTa final : public Atomic {
public:
    SimTime time_advance() override { return fired_ ? SimTime(-1.0) : SimTime(1.0); }
    void internal_transition(MacroAccess&) override { fired_ = true; }

private:
    bool fired_ = false;
};

// Macro block recording every delta_G batch.
class RecordingMacro final : public MacroState {
public:
    std::optional<std::any> global_transition(GlobalContext&, SimTime elapsed,
                                              std::span<const std::any> batch,
                                              const MacroState*) override {
        ++invocations;
        elapsed_values.push_back(elapsed.value());
        std::vector<std::string> values;
        for (const std::any& v : batch) values.push_back(std::any_cast<std::string>(v));
        batches.push_back(std::move(values));
        return std::nullopt;
    }

    int invocations = 0;
    std::vector<std::vector<std::string>> batches;
    std::vector<double> elapsed_values;
};

}  // namespace ebtest
