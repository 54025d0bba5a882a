#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hotelling/geometry.hpp"
#include "hotelling/market.hpp"

namespace hotelling {

struct DynamicsOptions {
    std::size_t max_iters = 20'000;
    double tol = 1e-9;
    std::size_t record_every = 1;
    // Per-step position displacement cap, as a fraction of the diameter.
    double displacement_cap = 0.1;
};

enum class TerminationReason { converged, max_iters, diverged };

struct TrajectoryStep {
    std::size_t iteration = 0;
    MarketState state;
    DemandProfile profile;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    TerminationReason reason = TerminationReason::max_iters;
    std::size_t iterations = 0;  // updates applied

    const MarketState& final_state() const;
};

enum class OutcomeKind { concentrated, dispersed };

struct OutcomeLabel {
    OutcomeKind kind = OutcomeKind::dispersed;
    double max_pairwise_distance = 0.0;
    double mean_final_price = 0.0;
};

const char* to_string(TerminationReason r);
const char* to_string(OutcomeKind k);

// Positions uniform over the parameter box, prices uniform in [c, c + 1].
MarketState random_state(const MarketConfig& cfg, const Manifold& m, std::uint64_t seed);

// One synchronous gradient-ascent update of every firm from the same state.
// Throws DivergenceError on a non-finite gradient.
MarketState step(const MarketConfig& cfg, const MarketState& state, const Manifold& m,
                 const QuadratureRule& quad, const DynamicsOptions& opts = {});

Trajectory simulate(const MarketConfig& cfg, const Manifold& m, const QuadratureRule& quad,
                    const MarketState& initial, const DynamicsOptions& opts);
// Builds the quadrature from cfg and starts from random_state(cfg, m, cfg.seed).
Trajectory simulate(const MarketConfig& cfg, const Manifold& m, const DynamicsOptions& opts);
Trajectory simulate(const MarketConfig& cfg, const Manifold& m, const MarketState& initial,
                    const DynamicsOptions& opts);

QuadratureRule market_quadrature(const MarketConfig& cfg, const Manifold& m);

// Concentration threshold: 1% of the diameter.
double concentration_tolerance(const Manifold& m);

OutcomeLabel classify_state(const MarketState& state, const Manifold& m);
OutcomeLabel classify_outcome(const Trajectory& traj, const Manifold& m);

}  // namespace hotelling
