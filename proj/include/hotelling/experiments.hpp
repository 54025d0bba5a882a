#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hotelling/dynamics.hpp"
#include "hotelling/geometry.hpp"
#include "hotelling/market.hpp"

namespace hotelling {

// Learning rates at a quarter of the local stability bounds:
// lambda_p = 0.25 * 2N^2/(beta(N-1)),
// lambda_y = 0.25 * min(2N V / max eig I2, 2N diameter * min(1, 1/(beta diameter))).
MarketConfig auto_scaled(const Manifold& m, MarketConfig cfg, const DistanceIntegrals& at_median);
MarketConfig auto_scaled(const Manifold& m, MarketConfig cfg);

struct PhaseCell {
    double beta = 0.0;
    int n_firms = 0;
    double fraction_concentrated = 0.0;
    int replicates = 0;
    int diverged = 0;
};

struct PhaseDiagram {
    std::vector<double> beta_grid;             // ascending
    std::vector<int> n_grid;                   // ascending
    std::vector<std::vector<PhaseCell>> cells;  // cells[n index][beta index]
    std::vector<double> predicted_threshold;   // beta_threshold per N
    std::vector<double> reach_threshold;       // reachability_threshold per N

    // beta, N, fraction_concentrated, replicates, diverged, predicted_threshold, reach_threshold
    std::string to_csv() const;
};

struct PhaseOptions {
    int replicates = 8;
    DynamicsOptions dynamics;
    // Per cell; a rate left fixed is taken from the base config.
    bool auto_lambda_p = true;
    bool auto_lambda_y = true;
    std::size_t ihat_samples = 1'000'000;
};

// Replicate r of every cell starts from random_state with seed derive_seed(base.seed, r).
PhaseDiagram phase_sweep(const Manifold& m, const MarketConfig& base, std::vector<double> beta_grid,
                         std::vector<int> n_grid, const PhaseOptions& opts = {});

// Linear interpolation of the 50% crossing along beta for the given N; NaN if
// the row never crosses.
double empirical_threshold(const PhaseDiagram& diagram, int n_firms);

struct Cluster {
    double center = 0.0;
    int multiplicity = 0;
};

struct ClusterPattern {
    std::vector<Cluster> clusters;  // ascending centers
    bool matches_eaton_lipsey = false;
};

// Groups sorted segment positions whose gaps are below tol.
ClusterPattern cluster_positions(const MarketState& state, const Manifold& m, double tol);

// Matches when five firms form clusters at 1/6, 1/2, 5/6 (within tol) with multiplicities 2, 1, 2.
ClusterPattern detect_eaton_lipsey(const Trajectory& traj, const Manifold& m, double tol = 0.03);
ClusterPattern detect_eaton_lipsey(const MarketState& state, const Manifold& m, double tol = 0.03);

struct CylinderOptions {
    DynamicsOptions dynamics;
    bool auto_learning_rates = true;
    bool standalone = true;  // also run each factor alone with the same (N, beta, c, seed)
};

struct CylinderReport {
    Trajectory trajectory;
    OutcomeLabel periodic;
    OutcomeLabel bounded;
    double bounded_mean = 0.0;  // mean bounded coordinate of the final positions
    bool standalone_run = false;
    OutcomeLabel standalone_periodic;
    OutcomeLabel standalone_bounded;
    bool consistent = false;  // per-factor labels equal the standalone labels
};

// S^1 x [0,1] with the circle factor first.
Manifold cylinder();

CylinderReport cylinder_demo(const MarketConfig& cfg, const CylinderOptions& opts = {});

}  // namespace hotelling
