#include "iterfilter/schedule.hpp"

#include "iterfilter/error.hpp"

#include <cmath>
#include <string>

namespace iterfilter::filter {

NoiseSchedule noise_schedule(double sigma0, std::size_t iterations) {
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw InvalidInput("noise schedule needs sigma0 > 0");
    if (iterations < 2 || iterations > 12)
        throw InvalidInput("noise schedule needs 2 <= T <= 12, got T = " + std::to_string(iterations));
    NoiseSchedule s;
    s.sigma0 = sigma0;
    s.iterations = iterations;
    s.delta = 16.0 / static_cast<double>(iterations);
    double sigma = sigma0;
    for (std::size_t t = 1; t < iterations; ++t) {
        sigma /= s.delta;
        s.sigmas.push_back(sigma);
    }
    s.sigmas.push_back(0.0);
    return s;
}

} // namespace iterfilter::filter
