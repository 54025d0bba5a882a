#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hotelling/dynamics.hpp"
#include "hotelling/geometry.hpp"
#include "hotelling/market.hpp"

namespace hotelling {

enum class MedianCardinality { unique, finite_multiple, continuum };

const char* to_string(MedianCardinality c);

struct MedianSet {
    std::vector<Point> representatives;
    MedianCardinality cardinality = MedianCardinality::unique;
    double objective_value = 0.0;  // mean distance (1/V) int d(x, y) at the median
    bool closed_form = false;
};

struct MedianOptions {
    double tol = 1e-6;  // objective flatness across distinct minimizers
    std::uint64_t seed = 0;
    std::size_t starts = 32;
    std::size_t resolution = 0;  // 0: 2^14 nodes in 1-D, 256^2 in 2-D, 2*10^5 samples otherwise
};

// (1/V) int d(x, y) over the quadrature, and its Riemannian gradient.
double mean_distance(const Manifold& m, const QuadratureRule& q, const Point& y,
                     std::vector<double>* gradient = nullptr);

// Closed forms for the segment, hypercube, circle and torus; multistart
// descent on the mean distance otherwise.
MedianSet median_set(const Manifold& m, const MedianOptions& opts = {});
MedianSet numeric_median_set(const Manifold& m, const MedianOptions& opts = {});

// Distance integrals at the first median representative.
DistanceIntegrals median_distance_integrals(const Manifold& m, std::uint64_t seed = 0);

double concentrated_price(const MarketConfig& cfg);

struct CurvatureCheck {
    bool satisfied = false;
    double margin = 0.0;  // least eigenvalue of I2 - beta(N-2)/N I1
};

CurvatureCheck curvature_condition(const Manifold& m, const MarketConfig& cfg,
                                   const DistanceIntegrals& at_median);
CurvatureCheck curvature_condition(const Manifold& m, const MarketConfig& cfg);

// Largest beta for which the curvature condition can hold: closed forms for
// the segment and hypercube, the generalized eigenvalue of (I2, I1) otherwise.
double beta_threshold(const Manifold& m, const MarketConfig& cfg, const DistanceIntegrals& at_median);
double beta_threshold(const Manifold& m, const MarketConfig& cfg);

// Largest beta at which the spreading mode of the synchronous gradient
// dynamics is still contracting (mu_y1 < 0): (N-1)/(N-2) * lambda_min(I2, I1).
// It sits below beta_threshold by the factor (N-1)/N.
double reachability_threshold(const MarketConfig& cfg, const DistanceIntegrals& at_median);

struct LearningRateBounds {
    double lambda_p_max = 0.0;
    double lambda_y_max = 0.0;  // +inf when I2 is not positive definite
    bool lambda_y_applicable = true;
};

LearningRateBounds learning_rate_bounds(const Manifold& m, const MarketConfig& cfg,
                                        const DistanceIntegrals& at_median);
LearningRateBounds learning_rate_bounds(const Manifold& m, const MarketConfig& cfg);

struct EquilibriumReport {
    std::string manifold;
    int n_firms = 0;
    double beta = 0.0;
    MedianCardinality median_cardinality = MedianCardinality::unique;
    bool median_ok = false;
    bool has_boundary = false;
    Point median;
    double i1 = 0.0;  // mean eigenvalue
    double i2 = 0.0;
    double price_bar = 0.0;
    double curvature_margin = 0.0;
    double beta_threshold = 0.0;
    double beta_reach = 0.0;
    double lambda_p_max = 0.0;
    double lambda_y_max = 0.0;
    bool lambda_y_applicable = true;
    double ihat = 0.0;  // hypercube only
    double ihat_standard_error = 0.0;
    bool is_nash_candidate = false;
    bool welfare_local_max = false;
    bool welfare_global_max = false;
    std::vector<std::string> reasons;  // why is_nash_candidate is false

    // Flat "key = value" block.
    std::string to_text() const;
};

struct CheckOptions {
    std::uint64_t seed = 0;
    std::size_t ihat_samples = 1'000'000;
};

EquilibriumReport check_nash_concentrated(const Manifold& m, const MarketConfig& cfg,
                                          const CheckOptions& opts = {});

// Concentration verdict per top-level product factor, using factor geodesic distances.
std::vector<OutcomeLabel> separability_check(const Trajectory& traj, const Manifold& m);
std::vector<OutcomeLabel> separability_check(const MarketState& state, const Manifold& m);

}  // namespace hotelling
