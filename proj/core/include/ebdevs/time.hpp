#pragma once

#include <compare>
#include <limits>

namespace ebdevs {

// Abstract simulation time. Non-negative by convention; a distinguished
// +infinity marks passive models. Addition saturates at infinity.
class SimTime {
public:
    constexpr SimTime() = default;
    constexpr explicit SimTime(double v) : v_(v) {}

    static constexpr SimTime zero() { return SimTime(0.0); }
    static constexpr SimTime infinity() {
        return SimTime(std::numeric_limits<double>::infinity());
    }

    constexpr double value() const { return v_; }
    constexpr bool is_infinite() const {
        return v_ == std::numeric_limits<double>::infinity();
    }
    constexpr bool finite() const { return !is_infinite(); }
    constexpr bool negative() const { return v_ < 0.0; }

    friend constexpr SimTime operator+(SimTime a, SimTime b) {
        return SimTime(a.v_ + b.v_);  // IEEE: inf + x == inf
    }
    friend constexpr SimTime operator-(SimTime a, SimTime b) {
        return SimTime(a.v_ - b.v_);
    }
    friend constexpr auto operator<=>(SimTime a, SimTime b) { return a.v_ <=> b.v_; }
    friend constexpr bool operator==(SimTime a, SimTime b) { return a.v_ == b.v_; }

private:
    double v_ = 0.0;
};

}  // namespace ebdevs
