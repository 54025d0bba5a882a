#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hotelling/geometry.hpp"

namespace hotelling {

struct MarketConfig {
    int n_firms = 2;
    double beta = 1.0;
    double cost = 0.0;
    double lambda_p = 0.1;
    double lambda_y = 0.1;
    std::size_t resolution = 0;  // 0 selects default_resolution(m)
    std::uint64_t seed = 0;

    void validate() const;
};

struct MarketState {
    std::vector<Point> positions;
    std::vector<double> prices;

    std::size_t size() const { return prices.size(); }
    // All firms at y with a common price p.
    static MarketState concentrated(int n_firms, const Point& y, double price);
};

struct DemandProfile {
    std::vector<double> shares;
    std::vector<double> profits;
    double welfare = 0.0;
};

struct ProfitGradient {
    double price_component = 0.0;
    TangentVector position_component;
};

void validate_state(const MarketConfig& cfg, const MarketState& state, const Manifold& m);

// Softmin over d(x, y_i) + p_i, max-shifted so large beta cannot overflow.
std::vector<double> choice_probabilities(const MarketConfig& cfg, const MarketState& state,
                                         const Manifold& m, const Point& x);

// Shares and welfare are normalized by the total volume.
DemandProfile demand_profile(const MarketConfig& cfg, const MarketState& state, const Manifold& m,
                             const QuadratureRule& quad);

ProfitGradient profit_gradient(const MarketConfig& cfg, const MarketState& state, const Manifold& m,
                               const QuadratureRule& quad, std::size_t firm);

std::vector<ProfitGradient> profit_gradients(const MarketConfig& cfg, const MarketState& state,
                                             const Manifold& m, const QuadratureRule& quad);

// Spectra of the stacked-gradient Jacobian at the concentrated point (median,
// common price c + N/(beta(N-1))). The "1" eigenvalues belong to the modes
// where firms move apart, the "2" eigenvalues to the joint mode. Position
// spectra are matrices' eigenvalues in an orthonormal frame, ascending.
struct HessianEigenvalues {
    Eigen::VectorXd mu_y1;
    Eigen::VectorXd mu_y2;
    double mu_p1 = 0.0;
    double mu_p2 = 0.0;
};

HessianEigenvalues concentrated_hessian_eigenvalues(const MarketConfig& cfg, const Manifold& m,
                                                    const DistanceIntegrals& at_median);
// Evaluates the distance integrals at a median first.
HessianEigenvalues concentrated_hessian_eigenvalues(const MarketConfig& cfg, const Manifold& m);

// Large-beta value of the cross term integral of f_i f_j on [0,1], for a firm
// at y facing a mirror rival at 1 - y with the same price.
double laplace_crossterm(double alpha, double beta, double y);

// Large-beta limit of the equilibrium markup p - c for boundary firms.
double limiting_boundary_markup(double alpha, double y);

namespace detail {

// Per-firm integrals shared by demand, gradients and the dynamics, all divided
// by the total volume: share = int f_i, spread = int f_i(1 - f_i),
// slope = int f_i(1 - f_i) dd/dy (coordinate partials, N x d row-major).
struct MarketTotals {
    std::vector<double> share;
    std::vector<double> spread;
    std::vector<double> slope;
    double welfare = 0.0;
};

MarketTotals market_totals(const MarketConfig& cfg, const MarketState& state, const Manifold& m,
                           const QuadratureRule& quad, bool with_slope);

DemandProfile profile_from_totals(const MarketConfig& cfg, const MarketState& state,
                                  const MarketTotals& t);

}  // namespace detail

}  // namespace hotelling
