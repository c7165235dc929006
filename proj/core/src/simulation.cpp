#include "ebdevs/simulation.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <set>

namespace ebdevs {

namespace {

std::string time_str(SimTime t) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, t.value());
    return std::string(buf, p);
}

}  // namespace

ModelId select_imminent(std::span<const std::pair<ModelId, std::uint32_t>> imminent) {
    if (imminent.empty()) throw SimError("select called on an empty imminent set");
    const std::pair<ModelId, std::uint32_t>* best = &imminent[0];
    for (const auto& cand : imminent.subspan(1)) {
        if (cand.second < best->second) best = &cand;
    }
    return best->first;
}

// ---------------------------------------------------------------- lifecycle

Simulation::Simulation(std::uint64_t seed) : seed_(seed) {
    auto rec = std::make_unique<CoupledRecord>();
    rec->name = "root";
    rec->rank = next_rank_++;
    rec->depth = 0;
    rec->stream = RngStream::derive(seed_, 0);
    coupleds_.push_back(std::move(rec));
    slots_.push_back(Slot{Kind::coupled, 0});
    root_ = ModelId{0};
    coupleds_[0]->id = root_;
    names_.emplace("root", root_);
}

Simulation::~Simulation() = default;

ModelId Simulation::new_id(Kind kind, std::uint32_t index) {
    slots_.push_back(Slot{kind, index});
    return ModelId{static_cast<std::uint32_t>(slots_.size() - 1)};
}

void Simulation::register_name(const std::string& name, ModelId id) {
    if (name.empty()) throw ConfigError("model name must not be empty");
    auto [it, inserted] = names_.emplace(name, id);
    if (!inserted) throw ConfigError("duplicate model name: " + name);
}

ModelId Simulation::add_coupled(ModelId parent, std::string name,
                                std::unique_ptr<MacroState> macro) {
    CoupledRecord& p = coupled_rec(parent);
    ModelId id = new_id(Kind::coupled, static_cast<std::uint32_t>(coupleds_.size()));
    register_name(name, id);
    auto rec = std::make_unique<CoupledRecord>();
    rec->id = id;
    rec->name = std::move(name);
    rec->parent = parent;
    rec->rank = next_rank_++;
    rec->depth = p.depth + 1;
    rec->macro = std::move(macro);
    rec->stream = RngStream::derive(seed_, id.value);
    rec->last_global_time = clock_;
    coupleds_.push_back(std::move(rec));
    p.children.push_back(id);
    return id;
}

ModelId Simulation::add_atomic(ModelId parent, std::string name,
                               std::unique_ptr<Atomic> behaviour) {
    if (!behaviour) throw ConfigError("null atomic behaviour");
    CoupledRecord& p = coupled_rec(parent);
    ModelId id = new_id(Kind::atomic, static_cast<std::uint32_t>(atomics_.size()));
    register_name(name, id);
    auto rec = std::make_unique<AtomicRecord>();
    rec->id = id;
    rec->name = std::move(name);
    rec->parent = parent;
    rec->rank = next_rank_++;
    rec->behaviour = std::move(behaviour);
    rec->stream = RngStream::derive(seed_, id.value);
    rec->behaviour->attach_stream(&rec->stream);
    rec->last_event_time = clock_;
    rec->t_next = SimTime::infinity();
    atomics_.push_back(std::move(rec));
    p.children.push_back(id);
    ++alive_atomics_;
    AtomicRecord& a = *atomics_.back();
    if (initialized_) {
        SimTime ta = a.behaviour->time_advance();
        if (ta.negative())
            throw LegitimacyError("model '" + a.name + "' has negative initial time advance");
        a.t_next = clock_ + ta;
        schedule_insert(a);
    }
    return id;
}

void Simulation::set_macro(ModelId coupled, std::unique_ptr<MacroState> macro) {
    coupled_rec(coupled).macro = std::move(macro);
}

void Simulation::initialize() {
    if (initialized_) throw SimError("simulation already initialized");
    clock_ = SimTime::zero();
    heap_.reserve(atomics_.size());
    for (auto& up : atomics_) {
        AtomicRecord& a = *up;
        if (!a.alive) continue;
        a.last_event_time = SimTime::zero();
        SimTime ta = a.behaviour->time_advance();
        if (ta.negative())
            throw LegitimacyError("model '" + a.name + "' has negative initial time advance");
        a.t_next = ta;
        schedule_insert(a);
    }
    initialized_ = true;
}

// ------------------------------------------------------------------ lookup

bool Simulation::is_atomic(ModelId id) const {
    return id.valid() && id.value < slots_.size() && slots_[id.value].kind == Kind::atomic;
}

bool Simulation::is_coupled(ModelId id) const {
    return id.valid() && id.value < slots_.size() && slots_[id.value].kind == Kind::coupled;
}

Simulation::AtomicRecord& Simulation::atomic_rec(ModelId id) {
    if (!is_atomic(id)) throw ConfigError("unknown atomic model id");
    return *atomics_[slots_[id.value].index];
}

const Simulation::AtomicRecord& Simulation::atomic_rec(ModelId id) const {
    if (!is_atomic(id)) throw ConfigError("unknown atomic model id");
    return *atomics_[slots_[id.value].index];
}

Simulation::CoupledRecord& Simulation::coupled_rec(ModelId id) {
    if (!is_coupled(id)) throw ConfigError("unknown coupled model id");
    return *coupleds_[slots_[id.value].index];
}

const Simulation::CoupledRecord& Simulation::coupled_rec(ModelId id) const {
    if (!is_coupled(id)) throw ConfigError("unknown coupled model id");
    return *coupleds_[slots_[id.value].index];
}

std::optional<ModelId> Simulation::find(std::string_view name) const {
    auto it = names_.find(std::string(name));
    if (it == names_.end()) return std::nullopt;
    return it->second;
}

const std::string& Simulation::name_of(ModelId id) const {
    if (is_atomic(id)) return atomic_rec(id).name;
    return coupled_rec(id).name;
}

std::uint32_t Simulation::select_rank(ModelId id) const {
    if (is_atomic(id)) return atomic_rec(id).rank;
    return coupled_rec(id).rank;
}

bool Simulation::is_alive(ModelId id) const {
    if (is_atomic(id)) return atomic_rec(id).alive;
    return is_coupled(id);
}

const std::vector<ModelId>& Simulation::children_of(ModelId coupled) const {
    return coupled_rec(coupled).children;
}

Atomic& Simulation::behaviour(ModelId id) { return *atomic_rec(id).behaviour; }
const Atomic& Simulation::behaviour(ModelId id) const { return *atomic_rec(id).behaviour; }

MacroState* Simulation::macro_of(ModelId coupled) { return coupled_rec(coupled).macro.get(); }

SimTime Simulation::t_next_of(ModelId id) const { return atomic_rec(id).t_next; }

RngStream& Simulation::stream_of(ModelId id) {
    if (is_atomic(id)) return atomic_rec(id).stream;
    return coupled_rec(id).stream;
}

std::size_t Simulation::coupling_count(ModelId coupled) const {
    return coupled_rec(coupled).coupling_count;
}

std::size_t Simulation::schedule_size() const { return heap_.size(); }

// --------------------------------------------------------------- couplings

void Simulation::validate_coupling(const PortRef& from, const PortRef& to,
                                   CoupledRecord*& owner) const {
    if (!from.model.valid() || from.model.value >= slots_.size() ||
        slots_[from.model.value].kind == Kind::dead)
        throw StructureError("coupling source model does not exist");
    if (!to.model.valid() || to.model.value >= slots_.size() ||
        slots_[to.model.value].kind == Kind::dead)
        throw StructureError("coupling destination model does not exist");

    auto parent_of = [&](ModelId m) {
        return is_atomic(m) ? atomic_rec(m).parent : coupled_rec(m).parent;
    };

    ModelId owner_id;
    if (from.dir == PortDir::input) {
        // EIC: from a coupled model's own input port down to a child input.
        if (!is_coupled(from.model))
            throw CouplingError("cannot couple from the input port of an atomic model");
        if (to.dir != PortDir::input || parent_of(to.model) != from.model)
            throw CouplingError("input boundary port must couple to a child input port");
        owner_id = from.model;
    } else if (to.dir == PortDir::output) {
        // EOC: from a child output up to the coupled model's own output port.
        if (!is_coupled(to.model))
            throw CouplingError("cannot couple to the output port of an atomic model");
        if (parent_of(from.model) != to.model)
            throw CouplingError("output boundary port must be fed by a child output port");
        owner_id = to.model;
    } else {
        // IC: child output to sibling input.
        owner_id = parent_of(from.model);
        if (parent_of(to.model) != owner_id)
            throw CouplingError("coupling endpoints belong to different coupled models");
        if (from.model == to.model)
            throw CouplingError("self-loop coupling on model '" + name_of(from.model) + "'");
    }
    owner = &const_cast<Simulation*>(this)->coupled_rec(owner_id);
}

void Simulation::couple(PortRef from, PortRef to) {
    CoupledRecord* owner = nullptr;
    validate_coupling(from, to, owner);
    owner->by_source[SourceKey{from.model.value, from.port}].push_back(to);
    owner->incoming[to.model.value] += 1;
    owner->coupling_count += 1;
    invalidate_routes_from(from);
}

void Simulation::invalidate_routes_from(const PortRef& from) {
    if (is_atomic(from.model)) {
        atomic_rec(from.model).routes.erase(from.port);
    } else {
        clear_all_route_caches();
    }
}

void Simulation::clear_all_route_caches() {
    for (auto& up : atomics_) {
        if (up && up->alive) up->routes.clear();
    }
}

void Simulation::resolve_routes(const AtomicRecord& a, const std::string& port,
                                std::vector<PortRef>& out) const {
    out.clear();
    std::vector<std::pair<ModelId, SourceKey>> stack;
    std::set<std::pair<std::uint32_t, std::string>> visited;
    stack.emplace_back(a.parent, SourceKey{a.id.value, port});
    while (!stack.empty()) {
        auto [owner_id, key] = std::move(stack.back());
        stack.pop_back();
        if (!visited.insert({key.model, key.port}).second)
            throw ConfigError("coupling cycle through boundary ports of model '" +
                              name_of(ModelId{key.model}) + "'");
        const CoupledRecord& owner = coupled_rec(owner_id);
        auto it = owner.by_source.find(key);
        if (it == owner.by_source.end()) continue;
        for (const PortRef& dest : it->second) {
            if (dest.model == owner.id) {
                // EOC boundary: continue in the grandparent, or drop at root.
                if (owner.parent.valid())
                    stack.emplace_back(owner.parent, SourceKey{owner.id.value, dest.port});
            } else if (is_atomic(dest.model)) {
                out.push_back(dest);
            } else {
                stack.emplace_back(dest.model, SourceKey{dest.model.value, dest.port});
            }
        }
    }
}

const std::vector<PortRef>& Simulation::routes_for(AtomicRecord& a, const std::string& port) {
    auto it = a.routes.find(port);
    if (it == a.routes.end()) {
        std::vector<PortRef> resolved;
        resolve_routes(a, port, resolved);
        it = a.routes.emplace(port, std::move(resolved)).first;
    }
    return it->second;
}

// ---------------------------------------------------------------- schedule

bool Simulation::schedule_less(std::uint32_t ia, std::uint32_t ib) const {
    const AtomicRecord& a = *atomics_[ia];
    const AtomicRecord& b = *atomics_[ib];
    if (a.t_next != b.t_next) return a.t_next < b.t_next;
    return a.rank < b.rank;
}

void Simulation::sift_up(std::size_t i) {
    while (i > 0) {
        std::size_t p = (i - 1) / 2;
        if (!schedule_less(heap_[i], heap_[p])) break;
        std::swap(heap_[i], heap_[p]);
        atomics_[heap_[i]]->heap_pos = static_cast<std::int32_t>(i);
        atomics_[heap_[p]]->heap_pos = static_cast<std::int32_t>(p);
        i = p;
    }
}

void Simulation::sift_down(std::size_t i) {
    const std::size_t n = heap_.size();
    while (true) {
        std::size_t l = 2 * i + 1, r = l + 1, best = i;
        if (l < n && schedule_less(heap_[l], heap_[best])) best = l;
        if (r < n && schedule_less(heap_[r], heap_[best])) best = r;
        if (best == i) break;
        std::swap(heap_[i], heap_[best]);
        atomics_[heap_[i]]->heap_pos = static_cast<std::int32_t>(i);
        atomics_[heap_[best]]->heap_pos = static_cast<std::int32_t>(best);
        i = best;
    }
}

void Simulation::schedule_insert(AtomicRecord& a) {
    assert(a.heap_pos < 0);
    heap_.push_back(slots_[a.id.value].index);
    a.heap_pos = static_cast<std::int32_t>(heap_.size() - 1);
    sift_up(heap_.size() - 1);
}

void Simulation::schedule_update(AtomicRecord& a) {
    if (a.heap_pos < 0) {
        schedule_insert(a);
        return;
    }
    sift_up(static_cast<std::size_t>(a.heap_pos));
    sift_down(static_cast<std::size_t>(a.heap_pos));
}

void Simulation::schedule_erase(AtomicRecord& a) {
    if (a.heap_pos < 0) return;
    std::size_t i = static_cast<std::size_t>(a.heap_pos);
    std::size_t last = heap_.size() - 1;
    if (i != last) {
        std::swap(heap_[i], heap_[last]);
        atomics_[heap_[i]]->heap_pos = static_cast<std::int32_t>(i);
    }
    heap_.pop_back();
    a.heap_pos = -1;
    if (i < heap_.size()) {
        sift_up(i);
        sift_down(i);
    }
}

SimTime Simulation::next_event_time() const {
    if (heap_.empty()) return SimTime::infinity();
    return atomics_[heap_[0]]->t_next;
}

// --------------------------------------------------------------- execution

void Simulation::post_transition(AtomicRecord& a, bool internal) {
    a.last_event_time = clock_;

    bool had_yup = false;
    if (auto yup = a.behaviour->take_yup()) {
        CoupledRecord& parent = coupled_rec(a.parent);
        if (!parent.macro)
            throw SimError("model '" + a.name + "' emitted y_up but coupled '" + parent.name +
                           "' has no macro state");
        parent.mailbox.emplace_back((static_cast<std::uint64_t>(a.rank) << 32) |
                                        (mailbox_seq_++ & 0xffffffffULL),
                                    std::move(*yup));
        if (!parent.dirty) {
            parent.dirty = true;
            dirty_coupleds_.push_back(parent.id);
        }
        had_yup = true;
        if (run_stats_) ++run_stats_->yup_count;
    }

    a.behaviour->take_structure_changes(pending_changes_);

    SimTime ta = a.behaviour->time_advance();
    if (ta.negative())
        throw LegitimacyError("model '" + a.name + "' returned negative time advance at t=" +
                              time_str(clock_));
    a.t_next = clock_ + ta;
    schedule_update(a);

    if (trace_) trace_->on_event(TraceEvent{clock_, a.name, internal, had_yup});
    if (run_stats_) {
        if (internal)
            ++run_stats_->internal_transitions;
        else
            ++run_stats_->external_transitions;
    }
}

void Simulation::flush_mailboxes() {
    if (dirty_coupleds_.empty()) return;
    std::uint32_t max_depth = 0;
    for (ModelId id : dirty_coupleds_) max_depth = std::max(max_depth, coupled_rec(id).depth);

    for (std::uint32_t depth = max_depth + 1; depth-- > 0;) {
        std::vector<ModelId> level;
        for (ModelId id : dirty_coupleds_) {
            CoupledRecord& k = coupled_rec(id);
            if (k.dirty && k.depth == depth) level.push_back(id);
        }
        std::sort(level.begin(), level.end(), [&](ModelId a, ModelId b) {
            return coupled_rec(a).rank < coupled_rec(b).rank;
        });
        for (ModelId id : level) {
            CoupledRecord& k = coupled_rec(id);
            k.dirty = false;
            std::sort(k.mailbox.begin(), k.mailbox.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::vector<std::any> batch;
            batch.reserve(k.mailbox.size());
            for (auto& [key, value] : k.mailbox) batch.push_back(std::move(value));
            k.mailbox.clear();

            const MacroState* parent_macro =
                k.parent.valid() ? coupled_rec(k.parent).macro.get() : nullptr;
            GlobalContext ctx(*this, k.id);
            std::optional<std::any> y_g_up;
            try {
                y_g_up = k.macro->global_transition(ctx, clock_ - k.last_global_time,
                                                    std::span<const std::any>(batch),
                                                    parent_macro);
            } catch (const std::exception& e) {
                throw SimError("delta_G of '" + k.name + "' failed at t=" + time_str(clock_) +
                               ": " + e.what());
            }
            k.last_global_time = clock_;

            if (y_g_up) {
                if (!k.parent.valid())
                    throw SimError("root coupled '" + k.name + "' emitted an upward value");
                CoupledRecord& parent = coupled_rec(k.parent);
                if (!parent.macro)
                    throw SimError("coupled '" + k.name + "' emitted y_G_up but parent '" +
                                   parent.name + "' has no macro state");
                parent.mailbox.emplace_back((static_cast<std::uint64_t>(k.rank) << 32) |
                                                (mailbox_seq_++ & 0xffffffffULL),
                                            std::move(*y_g_up));
                if (!parent.dirty) {
                    parent.dirty = true;
                    dirty_coupleds_.push_back(parent.id);
                }
            }
        }
    }
    dirty_coupleds_.clear();
}

void Simulation::step_impl(StepReport* report) {
    if (!initialized_) initialize();

    SimTime t = next_event_time();
    if (t.is_infinite()) {
        if (report) {
            report->time = clock_;
            report->quiescent = true;
        }
        return;
    }
    if (t < clock_) throw SimError("schedule corrupted: next event in the past");
    clock_ = t;

    AtomicRecord& chosen = *atomics_[heap_[0]];
    if (report) {
        report->time = t;
        report->internal_model = chosen.id;
    }

    // Output function, then routing. Messages towards models that are
    // themselves imminent at t are buffered until their own internal
    // transition has run.
    OutputBus bus;
    chosen.behaviour->output(bus);

    std::vector<std::pair<std::uint32_t, std::vector<Message>>> deliveries;
    for (PortValue& pv : bus.values_) {
        const std::vector<PortRef>& dests = routes_for(chosen, pv.port);
        if (dests.empty()) continue;  // uncoupled output port: value is dropped
        Message msg{PortRef{chosen.id, pv.port, PortDir::output}, std::move(pv.payload)};
        for (const PortRef& dest : dests) {
            if (!is_atomic(dest.model) || !atomic_rec(dest.model).alive)
                throw RoutingError("message from '" + chosen.name +
                                   "' routed to nonexistent model");
            AtomicRecord& recv = atomic_rec(dest.model);
            Message delivered{msg.source, msg.payload};
            if (recv.t_next == t) {
                pending_ext_[slots_[recv.id.value].index].emplace_back(chosen.rank,
                                                                       std::move(delivered));
            } else {
                auto it = std::find_if(deliveries.begin(), deliveries.end(),
                                       [&](const auto& d) {
                                           return d.first == slots_[recv.id.value].index;
                                       });
                if (it == deliveries.end()) {
                    deliveries.emplace_back(slots_[recv.id.value].index,
                                            std::vector<Message>{});
                    it = std::prev(deliveries.end());
                }
                it->second.push_back(std::move(delivered));
            }
            if (report) ++report->messages_routed;
        }
    }

    // Internal transition of the selected model.
    {
        CoupledRecord& parent = coupled_rec(chosen.parent);
        MacroAccess access(parent.macro.get(), &parent.stream);
        chosen.behaviour->internal_transition(access);
        access.invalidate();
    }
    post_transition(chosen, true);
    if (report) report->transitioned.push_back(chosen.id);

    // Deliver messages buffered for the chosen model while it was imminent:
    // its internal transition wins, the batch follows with zero elapsed time.
    if (auto pit = pending_ext_.find(slots_[chosen.id.value].index);
        pit != pending_ext_.end()) {
        auto buffered = std::move(pit->second);
        pending_ext_.erase(pit);
        // Order by the select rank of the emitting models, arrival order
        // within one source.
        std::stable_sort(buffered.begin(), buffered.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<Message> batch;
        batch.reserve(buffered.size());
        for (auto& [rank, m] : buffered) batch.push_back(std::move(m));
        deliver_external(chosen, std::move(batch));
        if (report) report->transitioned.push_back(chosen.id);
    }

    // External transitions, ordered by select rank.
    std::sort(deliveries.begin(), deliveries.end(), [&](const auto& a, const auto& b) {
        return atomics_[a.first]->rank < atomics_[b.first]->rank;
    });
    for (auto& [slot, batch] : deliveries) {
        AtomicRecord& recv = *atomics_[slot];
        if (!recv.alive) continue;
        deliver_external(recv, std::move(batch));
        if (report) report->transitioned.push_back(recv.id);
    }

    flush_mailboxes();
    apply_pending();
    if (run_stats_) ++run_stats_->steps;
}

void Simulation::deliver_external(AtomicRecord& a, std::vector<Message>&& batch) {
    SimTime elapsed = clock_ - a.last_event_time;
    CoupledRecord& parent = coupled_rec(a.parent);
    MacroAccess access(parent.macro.get(), &parent.stream);
    a.behaviour->external_transition(elapsed, std::span<const Message>(batch), access);
    access.invalidate();
    post_transition(a, false);
}

StepReport Simulation::step() {
    StepReport report;
    step_impl(&report);
    return report;
}

RunSummary Simulation::run_until(SimTime t_end) {
    if (!initialized_) initialize();
    if (t_end < clock_) throw ParamError("run_until target precedes the current clock");

    RunSummary summary;
    run_stats_ = &summary;
    try {
        while (true) {
            SimTime nt = next_event_time();
            if (nt.is_infinite() || nt > t_end) break;
            step_impl(nullptr);
        }
    } catch (...) {
        run_stats_ = nullptr;
        throw;
    }
    run_stats_ = nullptr;

    summary.quiescent = next_event_time().is_infinite();
    if (!summary.quiescent) clock_ = t_end;
    summary.final_clock = clock_;
    return summary;
}

// --------------------------------------------------------------- dynstruct

AppliedReport Simulation::apply_changes(std::span<StructureChange> changes) {
    AppliedReport report;
    for (StructureChange& c : changes) apply_one(c, report);
    return report;
}

void Simulation::apply_pending() {
    if (pending_changes_.empty()) return;
    std::vector<StructureChange> changes;
    changes.swap(pending_changes_);
    AppliedReport report;
    for (StructureChange& c : changes) apply_one(c, report);
}

void Simulation::apply_one(StructureChange& c, AppliedReport& report) {
    switch (c.kind) {
        case StructureChange::Kind::add_atomic: {
            CoupledRecord& parent = coupled_rec(c.parent);
            ModelId id = c.reserved_id;
            if (id.valid()) {
                if (id.value >= slots_.size() || slots_[id.value].kind != Kind::dead)
                    throw StructureError("reserved model id already in use");
            } else {
                if (names_.count(c.name))
                    throw StructureError("duplicate model name: " + c.name);
                id = new_id(Kind::dead, 0);
                register_name(c.name, id);
            }
            auto rec = std::make_unique<AtomicRecord>();
            rec->id = id;
            rec->name = c.name;
            rec->parent = c.parent;
            rec->rank = next_rank_++;
            rec->behaviour = c.factory();
            if (!rec->behaviour) throw StructureError("atomic factory returned null");
            rec->stream = RngStream::derive(seed_, id.value);
            rec->behaviour->attach_stream(&rec->stream);
            rec->last_event_time = clock_;
            SimTime ta = rec->behaviour->time_advance();
            if (ta.negative())
                throw LegitimacyError("model '" + rec->name +
                                      "' has negative initial time advance");
            rec->t_next = clock_ + ta;
            slots_[id.value] = Slot{Kind::atomic, static_cast<std::uint32_t>(atomics_.size())};
            atomics_.push_back(std::move(rec));
            parent.children.push_back(id);
            ++alive_atomics_;
            if (initialized_) schedule_insert(*atomics_.back());
            ++report.added;
            report.added_ids.push_back(id);
            break;
        }
        case StructureChange::Kind::remove_atomic: {
            if (!is_atomic(c.target))
                throw StructureError("remove references a model that does not exist");
            AtomicRecord& a = atomic_rec(c.target);
            CoupledRecord& parent = coupled_rec(a.parent);

            // Purge couplings incident to the removed model.
            for (auto it = parent.by_source.begin(); it != parent.by_source.end();) {
                if (it->first.model == c.target.value) {
                    for (const PortRef& dest : it->second) {
                        parent.coupling_count -= 1;
                        auto inc = parent.incoming.find(dest.model.value);
                        if (inc != parent.incoming.end() && --inc->second == 0)
                            parent.incoming.erase(inc);
                    }
                    it = parent.by_source.erase(it);
                } else {
                    ++it;
                }
            }
            if (auto inc = parent.incoming.find(c.target.value); inc != parent.incoming.end()) {
                for (auto& [key, dests] : parent.by_source) {
                    auto removed = std::remove_if(dests.begin(), dests.end(),
                                                  [&](const PortRef& d) {
                                                      return d.model == c.target;
                                                  });
                    parent.coupling_count -= static_cast<std::size_t>(dests.end() - removed);
                    dests.erase(removed, dests.end());
                }
                parent.incoming.erase(inc);
            }

            schedule_erase(a);
            pending_ext_.erase(slots_[c.target.value].index);
            auto child = std::find(parent.children.begin(), parent.children.end(), c.target);
            if (child != parent.children.end()) parent.children.erase(child);
            names_.erase(a.name);
            a.alive = false;
            --alive_atomics_;
            std::uint32_t index = slots_[c.target.value].index;
            slots_[c.target.value] = Slot{Kind::dead, 0};
            atomics_[index]->behaviour.reset();
            clear_all_route_caches();
            ++report.removed;
            break;
        }
        case StructureChange::Kind::connect: {
            couple(c.from, c.to);
            ++report.connected;
            break;
        }
        case StructureChange::Kind::disconnect: {
            CoupledRecord* owner = nullptr;
            validate_coupling(c.from, c.to, owner);
            auto it = owner->by_source.find(SourceKey{c.from.model.value, c.from.port});
            if (it == owner->by_source.end())
                throw StructureError("no such coupling to disconnect");
            auto pos = std::find(it->second.begin(), it->second.end(), c.to);
            if (pos == it->second.end())
                throw StructureError("no such coupling to disconnect");
            it->second.erase(pos);
            if (it->second.empty()) owner->by_source.erase(it);
            owner->coupling_count -= 1;
            auto inc = owner->incoming.find(c.to.model.value);
            if (inc != owner->incoming.end() && --inc->second == 0) owner->incoming.erase(inc);
            invalidate_routes_from(c.from);
            ++report.disconnected;
            break;
        }
    }
}

// ----------------------------------------------------------- GlobalContext

SimTime GlobalContext::now() const { return sim_.clock_; }

RngStream& GlobalContext::rng() { return sim_.coupled_rec(coupled_).stream; }

ModelId GlobalContext::add_atomic(std::string name, AtomicFactory factory) {
    ModelId id = sim_.new_id(Simulation::Kind::dead, 0);
    sim_.register_name(name, id);
    StructureChange c = StructureChange::add(coupled_, std::move(name), std::move(factory));
    c.reserved_id = id;
    sim_.pending_changes_.push_back(std::move(c));
    return id;
}

void GlobalContext::remove_atomic(ModelId id) {
    sim_.pending_changes_.push_back(StructureChange::remove(id));
}

void GlobalContext::connect(PortRef from, PortRef to) {
    sim_.pending_changes_.push_back(StructureChange::link(std::move(from), std::move(to)));
}

void GlobalContext::disconnect(PortRef from, PortRef to) {
    sim_.pending_changes_.push_back(StructureChange::unlink(std::move(from), std::move(to)));
}

}  // namespace ebdevs
