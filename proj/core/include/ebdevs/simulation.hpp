#pragma once

#include <any>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ebdevs/atomic.hpp"
#include "ebdevs/errors.hpp"
#include "ebdevs/macro.hpp"
#include "ebdevs/message.hpp"
#include "ebdevs/rng.hpp"
#include "ebdevs/structure.hpp"
#include "ebdevs/time.hpp"
#include "ebdevs/trace.hpp"

namespace ebdevs {

// Tie-breaking for simultaneous events: returns the member of `imminent`
// ranked first by select order (lower rank wins). Deterministic.
ModelId select_imminent(std::span<const std::pair<ModelId, std::uint32_t>> imminent);

struct StepReport {
    SimTime time;
    bool quiescent = false;
    ModelId internal_model;
    std::vector<ModelId> transitioned;  // execution order, internal first
    std::size_t messages_routed = 0;
    std::size_t yup_count = 0;
};

struct RunSummary {
    std::size_t steps = 0;
    std::size_t internal_transitions = 0;
    std::size_t external_transitions = 0;
    std::size_t yup_count = 0;
    SimTime final_clock;
    bool quiescent = false;
};

// One discrete-event simulation: a tree of coupled models with atomic
// leaves, an event schedule, macro-level blocks and runtime structure
// changes. Single-threaded by construction; distinct simulations share
// nothing and may run on different threads.
class Simulation {
public:
    explicit Simulation(std::uint64_t seed);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    // ---- structure building (before initialize; later via apply_changes) ----
    ModelId root_id() const { return root_; }
    ModelId add_coupled(ModelId parent, std::string name,
                        std::unique_ptr<MacroState> macro = nullptr);
    ModelId add_atomic(ModelId parent, std::string name, std::unique_ptr<Atomic> behaviour);
    void set_macro(ModelId coupled, std::unique_ptr<MacroState> macro);
    void couple(PortRef from, PortRef to);

    // Validates the structure, schedules every atomic at ta(initial state)
    // and sets the clock to zero.
    void initialize();
    bool initialized() const { return initialized_; }

    // ---- execution ----
    StepReport step();
    RunSummary run_until(SimTime t_end);
    SimTime now() const { return clock_; }
    SimTime next_event_time() const;

    // Applies a change sequence immediately (between steps). Changes
    // requested from transitions or delta_G are queued and applied at the
    // end of the running step instead.
    AppliedReport apply_changes(std::span<StructureChange> changes);

    // ---- introspection ----
    std::size_t atomic_count() const { return alive_atomics_; }
    std::size_t schedule_size() const;
    std::size_t coupling_count(ModelId coupled) const;
    std::optional<ModelId> find(std::string_view name) const;
    const std::string& name_of(ModelId id) const;
    std::uint32_t select_rank(ModelId id) const;
    bool is_alive(ModelId id) const;
    const std::vector<ModelId>& children_of(ModelId coupled) const;

    Atomic& behaviour(ModelId id);
    const Atomic& behaviour(ModelId id) const;
    template <typename T>
    T& atomic_as(ModelId id) {
        return dynamic_cast<T&>(behaviour(id));
    }
    template <typename T>
    const T& atomic_as(ModelId id) const {
        return dynamic_cast<const T&>(behaviour(id));
    }

    MacroState* macro_of(ModelId coupled);
    template <typename T>
    T& macro_as(ModelId coupled) {
        return dynamic_cast<T&>(*macro_of(coupled));
    }

    SimTime t_next_of(ModelId id) const;
    RngStream& stream_of(ModelId id);

    void set_trace_sink(TraceSink* sink) { trace_ = sink; }

    std::uint64_t seed() const { return seed_; }

private:
    friend class GlobalContext;

    enum class Kind : std::uint8_t { atomic, coupled, dead };

    struct Slot {
        Kind kind = Kind::dead;
        std::uint32_t index = 0;
    };

    struct AtomicRecord {
        ModelId id;
        std::string name;
        ModelId parent;
        std::uint32_t rank = 0;
        std::unique_ptr<Atomic> behaviour;
        RngStream stream;
        SimTime last_event_time;
        SimTime t_next;
        bool alive = true;
        std::int32_t heap_pos = -1;
        // flattened route cache, keyed by output port name
        std::unordered_map<std::string, std::vector<PortRef>> routes;
    };

    struct SourceKey {
        std::uint32_t model;
        std::string port;
        bool operator==(const SourceKey&) const = default;
    };
    struct SourceKeyHash {
        std::size_t operator()(const SourceKey& k) const {
            return std::hash<std::string>{}(k.port) ^ (k.model * 0x9e3779b9u);
        }
    };

    struct CoupledRecord {
        ModelId id;
        std::string name;
        ModelId parent;  // invalid for root
        std::uint32_t rank = 0;
        std::uint32_t depth = 0;
        std::unique_ptr<MacroState> macro;
        RngStream stream;
        SimTime last_global_time;
        std::vector<ModelId> children;
        // couplings owned by this coupled model, indexed by source port
        std::unordered_map<SourceKey, std::vector<PortRef>, SourceKeyHash> by_source;
        std::unordered_map<std::uint32_t, std::uint32_t> incoming;
        std::size_t coupling_count = 0;
        // upward-causation mailbox: (order key, value)
        std::vector<std::pair<std::uint64_t, std::any>> mailbox;
        bool dirty = false;
    };

    AtomicRecord& atomic_rec(ModelId id);
    const AtomicRecord& atomic_rec(ModelId id) const;
    CoupledRecord& coupled_rec(ModelId id);
    const CoupledRecord& coupled_rec(ModelId id) const;
    bool is_atomic(ModelId id) const;
    bool is_coupled(ModelId id) const;

    ModelId new_id(Kind kind, std::uint32_t index);
    void register_name(const std::string& name, ModelId id);

    void validate_coupling(const PortRef& from, const PortRef& to, CoupledRecord*& owner) const;
    const std::vector<PortRef>& routes_for(AtomicRecord& a, const std::string& port);
    void resolve_routes(const AtomicRecord& a, const std::string& port,
                        std::vector<PortRef>& out) const;
    void invalidate_routes_from(const PortRef& from);
    void clear_all_route_caches();

    void schedule_insert(AtomicRecord& a);
    void schedule_update(AtomicRecord& a);
    void schedule_erase(AtomicRecord& a);
    bool schedule_less(std::uint32_t a, std::uint32_t b) const;
    void sift_up(std::size_t i);
    void sift_down(std::size_t i);

    void post_transition(AtomicRecord& a, bool internal);
    void deliver_external(AtomicRecord& a, std::vector<Message>&& batch);
    void flush_mailboxes();
    void apply_one(StructureChange& c, AppliedReport& report);
    void apply_pending();
    void step_impl(StepReport* report);

    std::uint64_t seed_;
    bool initialized_ = false;
    SimTime clock_;
    ModelId root_;
    std::uint32_t next_rank_ = 0;
    std::uint64_t mailbox_seq_ = 0;

    std::vector<Slot> slots_;  // indexed by ModelId::value
    std::vector<std::unique_ptr<AtomicRecord>> atomics_;
    std::vector<std::unique_ptr<CoupledRecord>> coupleds_;
    std::unordered_map<std::string, ModelId> names_;
    std::size_t alive_atomics_ = 0;

    std::vector<std::uint32_t> heap_;  // atomic indices ordered by (t_next, rank)

    // messages buffered for models whose internal event shares the arrival
    // time; delivered right after their internal transition. The source rank
    // is captured at buffering time since the source may be removed before
    // delivery.
    std::unordered_map<std::uint32_t, std::vector<std::pair<std::uint32_t, Message>>>
        pending_ext_;

    std::vector<StructureChange> pending_changes_;
    std::vector<ModelId> dirty_coupleds_;

    TraceSink* trace_ = nullptr;

    RunSummary* run_stats_ = nullptr;  // accumulation target inside run_until
};

}  // namespace ebdevs
