#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "ebdevs/message.hpp"

namespace ebdevs {

class Atomic;

using AtomicFactory = std::function<std::unique_ptr<Atomic>()>;

// Runtime structural change. Changes are queued during a step and applied
// atomically at its end, never mid-routing.
struct StructureChange {
    enum class Kind { add_atomic, remove_atomic, connect, disconnect };

    Kind kind;
    ModelId parent;       // add_atomic: owning coupled model
    ModelId reserved_id;  // add_atomic: pre-assigned id (invalid = assign on apply)
    std::string name;     // add_atomic
    AtomicFactory factory;
    ModelId target;       // remove_atomic
    PortRef from, to;     // connect / disconnect

    static StructureChange add(ModelId parent, std::string name, AtomicFactory f) {
        StructureChange c{Kind::add_atomic};
        c.parent = parent;
        c.name = std::move(name);
        c.factory = std::move(f);
        return c;
    }
    static StructureChange remove(ModelId id) {
        StructureChange c{Kind::remove_atomic};
        c.target = id;
        return c;
    }
    static StructureChange link(PortRef from, PortRef to) {
        StructureChange c{Kind::connect};
        c.from = std::move(from);
        c.to = std::move(to);
        return c;
    }
    static StructureChange unlink(PortRef from, PortRef to) {
        StructureChange c{Kind::disconnect};
        c.from = std::move(from);
        c.to = std::move(to);
        return c;
    }
};

struct AppliedReport {
    std::size_t added = 0;
    std::size_t removed = 0;
    std::size_t connected = 0;
    std::size_t disconnected = 0;
    std::vector<ModelId> added_ids;

    std::size_t total() const { return added + removed + connected + disconnected; }
};

}  // namespace ebdevs
