#pragma once

#include <any>
#include <optional>
#include <span>
#include <vector>

#include "ebdevs/errors.hpp"
#include "ebdevs/message.hpp"
#include "ebdevs/rng.hpp"
#include "ebdevs/structure.hpp"
#include "ebdevs/time.hpp"

namespace ebdevs {

class MacroAccess;

// Collects the values emitted by one invocation of an output function.
class OutputBus {
public:
    void emit(std::string port, std::any payload) {
        values_.push_back(PortValue{std::move(port), std::move(payload)});
    }
    bool empty() const { return values_.empty(); }

private:
    friend class Simulation;
    std::vector<PortValue> values_;
};

// Behaviour protocol of a micro-level (atomic) model. The kernel drives it
// under the following contract:
//   - time_advance() is called exactly once right after every transition of
//     this model (and once at initialization); its result must be >= 0.
//   - output() is called exactly once immediately before each
//     internal_transition, never otherwise.
//   - take_yup() is polled once after every transition; it returns at most
//     one value and clears the pending one.
class Atomic {
public:
    virtual ~Atomic() = default;

    virtual SimTime time_advance() = 0;

    virtual void output(OutputBus& out) { (void)out; }

    virtual void internal_transition(MacroAccess& macro) = 0;

    // `inputs` batches every message that reached this model in one step,
    // ordered as emitted. Models that cannot receive inherit the throwing
    // default.
    virtual void external_transition(SimTime elapsed, std::span<const Message> inputs,
                                     MacroAccess& macro) {
        (void)elapsed;
        (void)inputs;
        (void)macro;
        throw SimError("model received input events but defines no external transition");
    }

    virtual std::optional<std::any> take_yup() { return std::nullopt; }

    // Structure changes requested by this model's last transition, if any.
    virtual void take_structure_changes(std::vector<StructureChange>& out) { (void)out; }

    // Per-model random stream, bound by the kernel at registration (tests
    // may attach one directly). Draw runtime randomness only from here.
    void attach_stream(RngStream* stream) { stream_ = stream; }
    RngStream& stream() {
        if (!stream_) throw SimError("atomic has no attached random stream");
        return *stream_;
    }

private:
    RngStream* stream_ = nullptr;
};

}  // namespace ebdevs
