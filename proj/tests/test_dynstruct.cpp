#include <doctest.h>

#include <memory>

#include "ebdevs/simulation.hpp"
#include "support.hpp"

using namespace ebdevs;
using namespace ebtest;

namespace {

std::unique_ptr<Atomic> make_sink() { return std::make_unique<Sink>(); }

}  // namespace

TEST_CASE("adding one atomic with one coupling updates both counts") {
    Simulation sim(1);
    auto node0 = sim.add_atomic(sim.root_id(), "node_0", make_sink());
    sim.initialize();

    std::vector<StructureChange> changes;
    changes.push_back(StructureChange::add(sim.root_id(), "node_1", make_sink));
    AppliedReport r1 = sim.apply_changes(changes);
    REQUIRE(r1.added == 1);
    ModelId node1 = r1.added_ids[0];

    changes.clear();
    changes.push_back(StructureChange::link(out_port(node1, "link"), in_port(node0, "in")));
    sim.apply_changes(changes);

    CHECK(sim.atomic_count() == 2);
    CHECK(sim.coupling_count(sim.root_id()) == 1);
    CHECK(sim.schedule_size() == 2);
}

TEST_CASE("removing a model purges its couplings and its schedule entry") {
    Simulation sim(1);
    auto a = sim.add_atomic(sim.root_id(), "a", std::make_unique<Periodic>(1.0, true));
    auto b = sim.add_atomic(sim.root_id(), "b", make_sink());
    auto c = sim.add_atomic(sim.root_id(), "c", make_sink());
    sim.couple(out_port(a, "out"), in_port(b, "in"));
    sim.couple(out_port(a, "out"), in_port(c, "in"));
    sim.couple(out_port(b, "out"), in_port(a, "in"));
    sim.initialize();
    CHECK(sim.coupling_count(sim.root_id()) == 3);
    CHECK(sim.schedule_size() == 3);

    std::vector<StructureChange> changes{StructureChange::remove(a)};
    AppliedReport r = sim.apply_changes(changes);
    CHECK(r.removed == 1);
    CHECK(sim.coupling_count(sim.root_id()) == 0);  // all 3 incident couplings vanish
    CHECK(sim.schedule_size() == 2);
    CHECK(sim.atomic_count() == 2);
    CHECK_FALSE(sim.is_alive(a));
}

TEST_CASE("empty change sequence leaves the handle unchanged") {
    Simulation sim(1);
    sim.add_atomic(sim.root_id(), "a", make_sink());
    sim.initialize();
    std::vector<StructureChange> none;
    AppliedReport r = sim.apply_changes(none);
    CHECK(r.total() == 0);
    CHECK(sim.atomic_count() == 1);
}

TEST_CASE("dangling references and bad couplings raise structure errors") {
    Simulation sim(1);
    auto a = sim.add_atomic(sim.root_id(), "a", make_sink());
    sim.initialize();

    SUBCASE("remove of a missing model") {
        std::vector<StructureChange> changes{StructureChange::remove(ModelId{777})};
        CHECK_THROWS_AS(sim.apply_changes(changes), StructureError);
    }
    SUBCASE("connect to a missing model") {
        std::vector<StructureChange> changes{
            StructureChange::link(out_port(a, "o"), in_port(ModelId{777}, "i"))};
        CHECK_THROWS_AS(sim.apply_changes(changes), StructureError);
    }
    SUBCASE("connecting two inputs") {
        auto b = sim.add_atomic(sim.root_id(), "b", make_sink());
        std::vector<StructureChange> changes{
            StructureChange::link(in_port(a, "i"), in_port(b, "i"))};
        CHECK_THROWS_AS(sim.apply_changes(changes), CouplingError);
    }
    SUBCASE("disconnect of a coupling that does not exist") {
        auto b = sim.add_atomic(sim.root_id(), "b2", make_sink());
        std::vector<StructureChange> changes{
            StructureChange::unlink(out_port(a, "o"), in_port(b, "i"))};
        CHECK_THROWS_AS(sim.apply_changes(changes), StructureError);
    }
}

TEST_CASE("new atomics are scheduled at clock + ta(initial state)") {
    Simulation sim(1);
    sim.add_atomic(sim.root_id(), "a", std::make_unique<Periodic>(1.0));
    sim.initialize();
    sim.run_until(SimTime(3.0));
    CHECK(sim.now() == SimTime(3.0));

    std::vector<StructureChange> changes;
    changes.push_back(StructureChange::add(sim.root_id(), "late",
                                           [] { return std::make_unique<Periodic>(2.5); }));
    AppliedReport r = sim.apply_changes(changes);
    CHECK(sim.t_next_of(r.added_ids[0]) == SimTime(5.5));
}

TEST_CASE("changes requested during step N become routable in step N+1") {
    // Emitter "src" fires at t=1,2,3. Its first transition requests a
    // coupling to "late" (created in the same change set). The value emitted
    // at t=1 must not reach it; the one at t=2 must.
    class Requester final : public Atomic {
    public:
        SimTime time_advance() override {
            return fired_ > 2 ? SimTime::infinity() : SimTime(1.0);
        }
        void output(OutputBus& out) override { out.emit("out", fired_); }
        void internal_transition(MacroAccess&) override {
            ++fired_;
            if (fired_ == 1) request_ = true;
        }
        void take_structure_changes(std::vector<StructureChange>& out) override {
            if (!request_) return;
            request_ = false;
            out.push_back(StructureChange::add(parent, "late", make_sink));
            // The coupling references the sink by its future name; resolved
            // in the test body instead, since ids are only known afterwards.
        }
        ModelId parent;

    private:
        int fired_ = 0;
        bool request_ = false;
    };

    Simulation sim(1);
    auto src_id = sim.add_atomic(sim.root_id(), "src", std::make_unique<Requester>());
    sim.atomic_as<Requester>(src_id).parent = sim.root_id();
    sim.initialize();

    sim.step();  // t=1: emits 0 (dropped, no coupling), requests the add
    REQUIRE(sim.find("late").has_value());
    ModelId late = *sim.find("late");
    std::vector<StructureChange> link{
        StructureChange::link(out_port(src_id, "out"), in_port(late, "in"))};
    sim.apply_changes(link);

    sim.step();  // t=2: emits 1, now routed
    auto& sink = sim.atomic_as<Sink>(late);
    CHECK(sink.received == std::vector<int>{1});
}

TEST_CASE("after any change sequence no coupling references a missing model") {
    Simulation sim(1);
    auto a = sim.add_atomic(sim.root_id(), "a", std::make_unique<Periodic>(1.0, true, 3));
    auto b = sim.add_atomic(sim.root_id(), "b", make_sink());
    sim.couple(out_port(a, "out"), in_port(b, "in"));
    sim.initialize();
    sim.step();

    std::vector<StructureChange> changes{StructureChange::remove(b)};
    sim.apply_changes(changes);
    CHECK(sim.coupling_count(sim.root_id()) == 0);
    // the emitter keeps firing; its output port is simply uncoupled now
    sim.run_until(SimTime(5.0));
    CHECK(sim.schedule_size() == sim.atomic_count());
}

TEST_CASE("removal of an imminent model drops its pending entry silently") {
    Simulation sim(1);
    auto a = sim.add_atomic(sim.root_id(), "a", std::make_unique<Periodic>(2.0));
    auto b = sim.add_atomic(sim.root_id(), "b", std::make_unique<Periodic>(1.0));
    sim.initialize();
    sim.step();  // b fires at t=1; both a and b next fire at t=2

    std::vector<StructureChange> changes{StructureChange::remove(b)};
    sim.apply_changes(changes);
    StepReport r = sim.step();
    CHECK(r.internal_model == a);
    CHECK(sim.schedule_size() == 1);
}
