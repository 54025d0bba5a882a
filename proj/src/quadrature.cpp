#include <algorithm>
#include <cmath>

#include "hotelling/errors.hpp"
#include "hotelling/geometry.hpp"
#include "hotelling/random.hpp"

namespace hotelling {

Point QuadratureRule::point(std::size_t k) const {
    return Point(std::vector<double>(node(k), node(k) + dimension));
}

double QuadratureRule::total_mass() const {
    double s = 0.0;
    for (double m : masses) s += m;
    return s;
}

std::size_t default_resolution(const Manifold& m) {
    switch (m.dimension()) {
        case 1: return 512;
        case 2: return 128;
        default: return 100'000;
    }
}

QuadratureRule build_quadrature(const Manifold& m, std::size_t resolution, std::uint64_t seed) {
    if (resolution < 2) throw InvalidInput("quadrature resolution must be >= 2");
    const auto& axes = m.axes();
    const std::size_t d = m.dimension();
    QuadratureRule q;
    q.dimension = d;
    q.resolution = resolution;
    q.seed = seed;

    double box = 1.0;
    for (const auto& a : axes) box *= a.extent();
    const double vol = m.volume_element();

    if (d <= 2) {
        double spacing = INFINITY;
        for (const auto& a : axes) spacing = std::min(spacing, a.scale * a.extent() / static_cast<double>(resolution));
        q.kernel_radius = 0.5 * spacing;
        // Midpoint rule: exact weights, and no node ever lands on a cell
        // boundary such as the segment median.
        std::size_t count = 1;
        for (std::size_t k = 0; k < d; ++k) count *= resolution;
        q.nodes.resize(count * d);
        q.weights.assign(count, box / static_cast<double>(count));
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t rem = i;
            for (std::size_t k = d; k-- > 0;) {
                const std::size_t j = rem % resolution;
                rem /= resolution;
                const auto& a = axes[k];
                q.nodes[i * d + k] =
                    a.lower + (static_cast<double>(j) + 0.5) * a.extent() / static_cast<double>(resolution);
            }
        }
    } else {
        q.monte_carlo = true;
        q.kernel_radius = 0.5 * std::pow(m.total_volume() / static_cast<double>(resolution), 1.0 / static_cast<double>(d));
        Rng rng(derive_seed(seed, 0));
        q.nodes.resize(resolution * d);
        q.weights.assign(resolution, box / static_cast<double>(resolution));
        for (std::size_t i = 0; i < resolution; ++i)
            for (std::size_t k = 0; k < d; ++k) {
                const auto& a = axes[k];
                q.nodes[i * d + k] = a.lower + a.extent() * rng.uniform();
            }
    }
    q.masses.resize(q.weights.size());
    for (std::size_t i = 0; i < q.weights.size(); ++i) q.masses[i] = q.weights[i] * vol;
    return q;
}

}  // namespace hotelling
