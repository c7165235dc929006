#pragma once

#include <any>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "ebdevs/errors.hpp"
#include "ebdevs/message.hpp"
#include "ebdevs/rng.hpp"
#include "ebdevs/structure.hpp"
#include "ebdevs/time.hpp"

namespace ebdevs {

class Simulation;

// Downward-information request. Property tags are closed per model: an
// unknown tag raises QueryError instead of producing a default answer.
struct MacroQuery {
    std::string property;
    std::any params;
};

using MacroAnswer = std::any;

// Capabilities handed to a global transition: current time, the coupled
// model's own random stream, and deferred structure-change requests.
// Requested changes become visible to message routing in the next step.
class GlobalContext {
public:
    SimTime now() const;
    RngStream& rng();

    // Queues creation of an atomic under this coupled model and returns the
    // reserved id immediately; the component exists from the next step on.
    ModelId add_atomic(std::string name, AtomicFactory factory);
    void remove_atomic(ModelId id);
    void connect(PortRef from, PortRef to);
    void disconnect(PortRef from, PortRef to);

private:
    friend class Simulation;
    GlobalContext(Simulation& sim, ModelId coupled) : sim_(sim), coupled_(coupled) {}

    Simulation& sim_;
    ModelId coupled_;
};

// Macro-level block of a coupled model: the state record, the global
// transition fed by the upward-causation mailbox, and the v_down query hook.
class MacroState {
public:
    virtual ~MacroState() = default;

    // Global transition. Invoked once per step, only when the mailbox is
    // nonempty; `micro_batch` holds the collected y_up values ordered by the
    // select rank of the emitting models. The optional return value is
    // forwarded to the parent coupled model's mailbox.
    virtual std::optional<std::any> global_transition(GlobalContext& ctx, SimTime elapsed,
                                                      std::span<const std::any> micro_batch,
                                                      const MacroState* parent_macro) = 0;

    // Downward information. Pure with respect to the macro record; answers
    // that need randomness draw from `rng`, the coupled model's own stream.
    virtual MacroAnswer query(const MacroQuery& q, RngStream& rng) const {
        (void)rng;
        throw QueryError("unknown v_down property: " + q.property);
    }
};

// Identity macro block: never queried, never transitions state. Useful to
// run classic models with macrolevel hooks formally enabled.
class NullMacro final : public MacroState {
public:
    std::optional<std::any> global_transition(GlobalContext&, SimTime,
                                              std::span<const std::any>,
                                              const MacroState*) override {
        return std::nullopt;
    }
};

// Read-only macro capability handed to micro-level transition hooks. Valid
// only for the duration of the hook call; queries through a retained
// reference raise SimError.
class MacroAccess {
public:
    // Normally constructed by the kernel; public so hook logic can be unit
    // tested against a bare macro record.
    MacroAccess(const MacroState* macro, RngStream* rng) : macro_(macro), rng_(rng) {}
    MacroAccess(const MacroAccess&) = delete;
    MacroAccess& operator=(const MacroAccess&) = delete;

    // True when the enclosing coupled model has a macro block at all.
    bool attached() const { return macro_ != nullptr; }

    MacroAnswer query(const MacroQuery& q) const {
        if (!valid_) throw SimError("macro access used outside its transition");
        if (!macro_) throw SimError("coupled parent has no macro state");
        return macro_->query(q, *rng_);
    }
    MacroAnswer query(std::string property, std::any params = {}) const {
        return query(MacroQuery{std::move(property), std::move(params)});
    }

private:
    friend class Simulation;
    void invalidate() { valid_ = false; }

    const MacroState* macro_;
    RngStream* rng_;
    bool valid_ = true;
};

}  // namespace ebdevs
