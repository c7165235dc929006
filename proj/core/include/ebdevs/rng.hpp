#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ebdevs/errors.hpp"
#include "ebdevs/time.hpp"

namespace ebdevs {

namespace detail {

// splitmix64 finalizer (Vigna).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Inverse CDF of the exponential distribution with the given mean,
// -mean * ln(1 - u) for u in [0,1).
double exponential_inverse_cdf(double mean, double u);

// Deterministic per-model random stream. The generator is splitmix64;
// substream states are derived from the master seed so that distinct
// stream keys never share a draw sequence in practice.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t state) : state_(state) {}

    // Substream for (seed, key). Extra keys hash additional coordinates in,
    // e.g. (sweep index, realisation index).
    static RngStream derive(std::uint64_t seed, std::uint64_t key) {
        return RngStream(detail::mix64(detail::mix64(seed + 0x9e3779b97f4a7c15ULL) ^
                                       detail::mix64(key * 0xd1342543de82ef95ULL + 1)));
    }
    static RngStream derive(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2) {
        return derive(derive(seed, k1).state_, k2);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return detail::mix64(state_);
    }

    // Uniform real in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform real in [a,b].
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Uniform integer in [0,n).
    std::uint32_t below(std::uint32_t n) {
        return static_cast<std::uint32_t>(next_u64() % n);
    }

    // Uniform integer in [a,b], both endpoints included.
    std::int64_t randint(std::int64_t a, std::int64_t b) {
        return a + static_cast<std::int64_t>(next_u64() %
                                             static_cast<std::uint64_t>(b - a + 1));
    }

    // Exponential with the given mean (inverse-CDF transform).
    SimTime exponential(double mean);

    // Poisson via Knuth's multiplicative method. Large rates are split in
    // halves to keep exp(-lambda) away from underflow.
    std::uint64_t poisson(double lambda);

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_ = 0x853c49e6748fea9bULL;
};

// Sequential weighted sampling without replacement: each draw picks id i
// with probability w_i / sum of remaining weights, then removes it.
template <typename Id>
std::vector<Id> weighted_sample_without_replacement(
    RngStream& rng, std::span<const std::pair<Id, double>> pool, std::size_t count) {
    std::size_t positive = 0;
    double total = 0.0;
    for (const auto& [id, w] : pool) {
        if (w < 0.0) throw ParamError("negative weight in sampling pool");
        if (w > 0.0) {
            ++positive;
            total += w;
        }
    }
    if (count > positive)
        throw SamplingError("sample count exceeds positive-weight pool size");

    std::vector<double> weights(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) weights[i] = pool[i].second;

    std::vector<Id> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        double r = rng.uniform() * total;
        std::size_t chosen = pool.size();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            if (r < weights[i]) {
                chosen = i;
                break;
            }
            r -= weights[i];
            chosen = i;  // guards against round-off on the last positive entry
        }
        out.push_back(pool[chosen].first);
        total -= weights[chosen];
        weights[chosen] = 0.0;
    }
    return out;
}

}  // namespace ebdevs
