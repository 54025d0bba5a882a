#include "hotelling/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "hotelling/errors.hpp"
#include "hotelling/random.hpp"

namespace hotelling {

namespace {

struct Advance {
    MarketState next;
    DemandProfile profile;  // of the state being advanced
    double movement = 0.0;  // max over firms of |dy| + |dp|
};

Advance advance(const MarketConfig& cfg, const MarketState& state, const Manifold& m,
                const QuadratureRule& quad, const DynamicsOptions& opts) {
    const std::size_t n = state.size();
    const std::size_t d = m.dimension();
    const auto t = detail::market_totals(cfg, state, m, quad, true);
    const double cap = opts.displacement_cap * m.diameter();

    Advance a;
    a.profile = detail::profile_from_totals(cfg, state, t);
    a.next = state;
    std::vector<double> partials(d), move(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double markup = state.prices[i] - cfg.cost;
        const double gp = t.share[i] - cfg.beta * markup * t.spread[i];
        for (std::size_t j = 0; j < d; ++j) partials[j] = -cfg.beta * markup * t.slope[i * d + j];
        TangentVector gy = riemannian_gradient(m, state.positions[i], partials);
        bool finite = std::isfinite(gp);
        for (double c : gy.components) finite = finite && std::isfinite(c);
        if (!finite) throw DivergenceError("non-finite profit gradient");
        gy = tangent_project(m, state.positions[i], gy.components);

        for (std::size_t j = 0; j < d; ++j) move[j] = cfg.lambda_y * gy.components[j];
        const double len = tangent_norm(m, TangentVector{state.positions[i], move});
        if (len > cap)
            for (double& c : move) c *= cap / len;
        a.next.positions[i] = retract(m, state.positions[i], move);
        a.next.prices[i] = std::max(cfg.cost, state.prices[i] + cfg.lambda_p * gp);

        const double moved = geodesic_distance(m, state.positions[i], a.next.positions[i]) +
                             std::fabs(a.next.prices[i] - state.prices[i]);
        a.movement = std::max(a.movement, moved);
    }
    return a;
}

}  // namespace

const MarketState& Trajectory::final_state() const {
    if (steps.empty()) throw InvalidInput("trajectory is empty");
    return steps.back().state;
}

const char* to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::converged: return "converged";
        case TerminationReason::max_iters: return "max_iters";
        case TerminationReason::diverged: return "diverged";
    }
    return "unknown";
}

const char* to_string(OutcomeKind k) {
    return k == OutcomeKind::concentrated ? "concentrated" : "dispersed";
}

MarketState random_state(const MarketConfig& cfg, const Manifold& m, std::uint64_t seed) {
    cfg.validate();
    Rng rng(derive_seed(seed, 1));
    MarketState s;
    for (int i = 0; i < cfg.n_firms; ++i) {
        Point y;
        for (const auto& a : m.axes()) y.coords.push_back(a.lower + a.extent() * rng.uniform());
        s.positions.push_back(y);
        s.prices.push_back(cfg.cost + rng.uniform());
    }
    return s;
}

QuadratureRule market_quadrature(const MarketConfig& cfg, const Manifold& m) {
    return build_quadrature(m, cfg.resolution ? cfg.resolution : default_resolution(m), cfg.seed);
}

MarketState step(const MarketConfig& cfg, const MarketState& state, const Manifold& m,
                 const QuadratureRule& quad, const DynamicsOptions& opts) {
    cfg.validate();
    validate_state(cfg, state, m);
    return advance(cfg, state, m, quad, opts).next;
}

Trajectory simulate(const MarketConfig& cfg, const Manifold& m, const QuadratureRule& quad,
                    const MarketState& initial, const DynamicsOptions& opts) {
    cfg.validate();
    validate_state(cfg, initial, m);
    if (opts.max_iters < 1) throw InvalidInput("simulate: max_iters must be >= 1");
    if (!(opts.tol > 0.0)) throw InvalidInput("simulate: tol must be > 0");
    const std::size_t every = std::max<std::size_t>(opts.record_every, 1);

    Trajectory traj;
    MarketState state = initial;
    std::size_t t = 0;
    traj.reason = TerminationReason::max_iters;
    for (; t < opts.max_iters; ++t) {
        Advance a;
        try {
            a = advance(cfg, state, m, quad, opts);
        } catch (const DivergenceError&) {
            traj.reason = TerminationReason::diverged;
            break;
        }
        if (t % every == 0) traj.steps.push_back({t, state, a.profile});
        state = std::move(a.next);
        if (a.movement < opts.tol) {
            traj.reason = TerminationReason::converged;
            ++t;
            break;
        }
    }
    traj.iterations = t;
    if (traj.steps.empty() || traj.steps.back().iteration != t) {
        const auto totals = detail::market_totals(cfg, state, m, quad, false);
        traj.steps.push_back({t, state, detail::profile_from_totals(cfg, state, totals)});
    }
    return traj;
}

Trajectory simulate(const MarketConfig& cfg, const Manifold& m, const MarketState& initial,
                    const DynamicsOptions& opts) {
    return simulate(cfg, m, market_quadrature(cfg, m), initial, opts);
}

Trajectory simulate(const MarketConfig& cfg, const Manifold& m, const DynamicsOptions& opts) {
    return simulate(cfg, m, market_quadrature(cfg, m), random_state(cfg, m, cfg.seed), opts);
}

double concentration_tolerance(const Manifold& m) { return 1e-2 * m.diameter(); }

OutcomeLabel classify_state(const MarketState& state, const Manifold& m) {
    if (state.size() == 0) throw InvalidInput("classify: empty state");
    OutcomeLabel label;
    for (std::size_t i = 0; i < state.size(); ++i)
        for (std::size_t j = i + 1; j < state.size(); ++j)
            label.max_pairwise_distance = std::max(
                label.max_pairwise_distance, geodesic_distance(m, state.positions[i], state.positions[j]));
    double s = 0.0;
    for (double p : state.prices) s += p;
    label.mean_final_price = s / static_cast<double>(state.size());
    label.kind = label.max_pairwise_distance < concentration_tolerance(m) ? OutcomeKind::concentrated
                                                                         : OutcomeKind::dispersed;
    return label;
}

OutcomeLabel classify_outcome(const Trajectory& traj, const Manifold& m) {
    return classify_state(traj.final_state(), m);
}

}  // namespace hotelling
