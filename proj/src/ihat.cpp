#include <cmath>

#include "hotelling/errors.hpp"
#include "hotelling/geometry.hpp"
#include "hotelling/random.hpp"

namespace hotelling {

IhatEstimate estimate_ihat(int dimension, std::size_t samples, std::uint64_t seed) {
    if (dimension < 1) throw InvalidInput("ihat: dimension must be >= 1");
    if (dimension == 1) return {0.0, 0.0, samples};
    if (samples < 10'000) throw InvalidInput("ihat: at least 10^4 samples required");

    Rng rng(seed);
    const double num = static_cast<double>(dimension - 1);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t n = 1; n <= samples; ++n) {
        double r2;
        do {
            r2 = 0.0;
            for (int k = 0; k < dimension; ++k) {
                const double u = rng.uniform() - 0.5;
                r2 += u * u;
            }
        } while (r2 < 1e-24);  // ||r|| < 1e-12: redraw
        const double v = num / std::sqrt(r2);
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    const double var = m2 / static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

}  // namespace hotelling
