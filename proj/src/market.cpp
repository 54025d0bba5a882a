#include "hotelling/market.hpp"

#include <algorithm>
#include <cmath>

#include "hotelling/equilibrium.hpp"
#include "hotelling/errors.hpp"

namespace hotelling {

void MarketConfig::validate() const {
    if (n_firms < 2) throw InvalidInput("market: N must be >= 2");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInput("market: beta must be > 0");
    if (!(cost >= 0.0) || !std::isfinite(cost)) throw InvalidInput("market: cost must be >= 0");
    if (!(lambda_p > 0.0) || !std::isfinite(lambda_p))
        throw InvalidInput("market: lambda_p must be > 0");
    if (!(lambda_y > 0.0) || !std::isfinite(lambda_y))
        throw InvalidInput("market: lambda_y must be > 0");
}

MarketState MarketState::concentrated(int n_firms, const Point& y, double price) {
    MarketState s;
    s.positions.assign(static_cast<std::size_t>(n_firms), y);
    s.prices.assign(static_cast<std::size_t>(n_firms), price);
    return s;
}

void validate_state(const MarketConfig& cfg, const MarketState& state, const Manifold& m) {
    if (state.positions.size() != state.prices.size())
        throw InvalidInput("state: positions and prices differ in length");
    if (state.size() != static_cast<std::size_t>(cfg.n_firms))
        throw InvalidInput("state: firm count does not match N");
    for (const auto& y : state.positions) m.check_point(y);
    for (double p : state.prices)
        if (!std::isfinite(p) || p < cfg.cost) throw InvalidInput("state: prices must be finite and >= c");
}

std::vector<double> choice_probabilities(const MarketConfig& cfg, const MarketState& state,
                                         const Manifold& m, const Point& x) {
    if (x.dimension() != m.dimension()) throw InvalidInput("choice_probabilities: dimension mismatch");
    const std::size_t n = state.size();
    std::vector<double> u(n), scratch(m.dimension());
    double top = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = detail::distance_and_partials(m.axes(), x.coords.data(),
                                                       state.positions[i].coords.data(), scratch.data());
        u[i] = -cfg.beta * (d + state.prices[i]);
        top = std::max(top, u[i]);
    }
    double sum = 0.0;
    for (double& v : u) {
        v = std::exp(v - top);
        sum += v;
    }
    for (double& v : u) v /= sum;
    return u;
}

namespace detail {

MarketTotals market_totals(const MarketConfig& cfg, const MarketState& state, const Manifold& m,
                           const QuadratureRule& quad, bool with_slope) {
    const std::size_t n = state.size();
    const std::size_t d = m.dimension();
    const auto& axes = m.axes();
    MarketTotals t;
    t.share.assign(n, 0.0);
    t.spread.assign(n, 0.0);
    if (with_slope) t.slope.assign(n * d, 0.0);

    std::vector<double> dist(n), f(n), partials(n * d);
    std::vector<const double*> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = state.positions[i].coords.data();
    const double beta = cfg.beta;
    double welfare = 0.0;

    for (std::size_t k = 0; k < quad.size(); ++k) {
        const double* x = quad.node(k);
        double top = -INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            dist[i] = kernel_distance_and_partials(axes, x, ys[i], partials.data() + i * d, quad.kernel_radius);
            f[i] = -beta * (dist[i] + state.prices[i]);
            top = std::max(top, f[i]);
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            f[i] = std::exp(f[i] - top);
            sum += f[i];
        }
        const double mass = quad.masses[k];
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fi = f[i] / sum;
            const double w = mass * fi * (1.0 - fi);
            t.share[i] += mass * fi;
            t.spread[i] += w;
            loss += fi * (cfg.cost + dist[i]);
            if (with_slope)
                for (std::size_t j = 0; j < d; ++j) t.slope[i * d + j] += w * partials[i * d + j];
        }
        welfare -= mass * loss;
    }

    const double inv_v = 1.0 / m.total_volume();
    for (double& v : t.share) v *= inv_v;
    for (double& v : t.spread) v *= inv_v;
    for (double& v : t.slope) v *= inv_v;
    t.welfare = welfare * inv_v;
    return t;
}

DemandProfile profile_from_totals(const MarketConfig& cfg, const MarketState& state,
                                  const MarketTotals& t) {
    DemandProfile p;
    p.shares = t.share;
    p.profits.resize(state.size());
    for (std::size_t i = 0; i < state.size(); ++i)
        p.profits[i] = (state.prices[i] - cfg.cost) * t.share[i];
    p.welfare = t.welfare;
    return p;
}

}  // namespace detail

DemandProfile demand_profile(const MarketConfig& cfg, const MarketState& state, const Manifold& m,
                             const QuadratureRule& quad) {
    validate_state(cfg, state, m);
    return detail::profile_from_totals(cfg, state, detail::market_totals(cfg, state, m, quad, false));
}

namespace {

ProfitGradient gradient_from_totals(const MarketConfig& cfg, const MarketState& state,
                                    const Manifold& m, const detail::MarketTotals& t,
                                    std::size_t i) {
    const std::size_t d = m.dimension();
    const double markup = state.prices[i] - cfg.cost;
    ProfitGradient g;
    g.price_component = t.share[i] - cfg.beta * markup * t.spread[i];
    std::vector<double> partials(d, 0.0);
    if (markup != 0.0)
        for (std::size_t j = 0; j < d; ++j) partials[j] = -cfg.beta * markup * t.slope[i * d + j];
    const TangentVector grad = riemannian_gradient(m, state.positions[i], partials);
    g.position_component = tangent_project(m, state.positions[i], grad.components);
    return g;
}

}  // namespace

std::vector<ProfitGradient> profit_gradients(const MarketConfig& cfg, const MarketState& state,
                                             const Manifold& m, const QuadratureRule& quad) {
    validate_state(cfg, state, m);
    const auto t = detail::market_totals(cfg, state, m, quad, true);
    std::vector<ProfitGradient> out;
    out.reserve(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) out.push_back(gradient_from_totals(cfg, state, m, t, i));
    return out;
}

ProfitGradient profit_gradient(const MarketConfig& cfg, const MarketState& state, const Manifold& m,
                               const QuadratureRule& quad, std::size_t firm) {
    if (firm >= state.size()) throw InvalidInput("profit_gradient: firm index out of range");
    validate_state(cfg, state, m);
    const auto t = detail::market_totals(cfg, state, m, quad, true);
    return gradient_from_totals(cfg, state, m, t, firm);
}

HessianEigenvalues concentrated_hessian_eigenvalues(const MarketConfig& cfg, const Manifold& m,
                                                    const DistanceIntegrals& at_median) {
    if (cfg.n_firms < 2) throw InvalidInput("hessian: N must be >= 2");
    const double n = cfg.n_firms, b = cfg.beta, v = m.total_volume();
    HessianEigenvalues e;
    e.mu_p1 = b * (-n * n + n - 1.0) / (n * n * (n - 1.0));
    e.mu_p2 = -b * (n - 1.0) / (n * n);

    const Eigen::MatrixXd y1 = (b * (n - 2.0) / (n - 1.0) * at_median.i1 - at_median.i2) / (n * v);
    const Eigen::MatrixXd y2 = -at_median.i2 / (n * v);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s1(y1, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s2(y2, Eigen::EigenvaluesOnly);
    e.mu_y1 = s1.eigenvalues();
    e.mu_y2 = s2.eigenvalues();
    return e;
}

HessianEigenvalues concentrated_hessian_eigenvalues(const MarketConfig& cfg, const Manifold& m) {
    return concentrated_hessian_eigenvalues(cfg, m, median_distance_integrals(m, cfg.seed));
}

double laplace_crossterm(double alpha, double beta, double y) {
    if (!(alpha >= 1.0)) throw InvalidInput("laplace_crossterm: alpha must be >= 1");
    if (!(beta > 0.0)) throw InvalidInput("laplace_crossterm: beta must be > 0");
    if (y == 0.5) throw InvalidInput("laplace_crossterm: singular at y = 1/2");
    return 1.0 / (2.0 * alpha * beta * std::pow(std::fabs(y - 0.5), alpha - 1.0));
}

double limiting_boundary_markup(double alpha, double y) {
    if (!(alpha >= 1.0)) throw InvalidInput("limiting_boundary_markup: alpha must be >= 1");
    if (!(y >= 0.0 && y <= 1.0)) throw InvalidInput("limiting_boundary_markup: y must lie in [0,1]");
    return alpha * std::pow(std::fabs(y - 0.5), alpha - 1.0);
}

}  // namespace hotelling
