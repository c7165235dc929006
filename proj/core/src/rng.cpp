#include "ebdevs/rng.hpp"

#include <cmath>

namespace ebdevs {

double exponential_inverse_cdf(double mean, double u) {
    if (!(mean > 0.0)) throw ParamError("exponential mean must be positive");
    return -mean * std::log1p(-u);
}

SimTime RngStream::exponential(double mean) {
    return SimTime(exponential_inverse_cdf(mean, uniform()));
}

std::uint64_t RngStream::poisson(double lambda) {
    if (!(lambda > 0.0)) throw ParamError("poisson rate must be positive");
    std::uint64_t n = 0;
    while (lambda > 500.0) {
        n += poisson(500.0);
        lambda -= 500.0;
    }
    const double limit = std::exp(-lambda);
    double product = uniform();
    while (product > limit) {
        ++n;
        product *= uniform();
    }
    return n;
}

}  // namespace ebdevs
