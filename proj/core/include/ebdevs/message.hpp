#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace ebdevs {

// Stable identifier of an atomic or coupled model within one simulation.
struct ModelId {
    static constexpr std::uint32_t kInvalid = 0xffffffffu;

    std::uint32_t value = kInvalid;

    constexpr bool valid() const { return value != kInvalid; }
    friend constexpr auto operator<=>(ModelId, ModelId) = default;
};

enum class PortDir : std::uint8_t { input, output };

struct PortRef {
    ModelId model;
    std::string port;
    PortDir dir = PortDir::output;

    friend bool operator==(const PortRef& a, const PortRef& b) {
        return a.model == b.model && a.dir == b.dir && a.port == b.port;
    }
};

inline PortRef out_port(ModelId m, std::string name) {
    return PortRef{m, std::move(name), PortDir::output};
}
inline PortRef in_port(ModelId m, std::string name) {
    return PortRef{m, std::move(name), PortDir::input};
}

// One routed event value. The payload is owned by the emitting step and is
// immutable once emitted; receivers see it by const reference.
struct Message {
    PortRef source;
    std::any payload;
};

// (port, payload) pair collected from an atomic's output function.
struct PortValue {
    std::string port;
    std::any payload;
};

}  // namespace ebdevs

template <>
struct std::hash<ebdevs::ModelId> {
    std::size_t operator()(ebdevs::ModelId id) const noexcept {
        return std::hash<std::uint32_t>{}(id.value);
    }
};
