#include "hotelling/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hotelling/errors.hpp"
#include "hotelling/format.hpp"
#include "hotelling/random.hpp"

namespace hotelling {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::size_t median_resolution(const Manifold& m, std::size_t requested) {
    if (requested) return requested;
    switch (m.dimension()) {
        case 1: return std::size_t{1} << 14;
        case 2: return 128;
        default: return 200'000;
    }
}

// Smallest generalized eigenvalue of I2 v = lambda I1 v, i.e. the largest s
// with I2 - s I1 positive semi-definite. -inf when I2 is indefinite along a
// direction where I1 vanishes, which cannot happen for the supported manifolds.
double min_generalized_eigenvalue(const Eigen::MatrixXd& i2, const Eigen::MatrixXd& i1) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> s(i2, i1, Eigen::EigenvaluesOnly);
    if (s.info() != Eigen::Success) throw EstimationError("generalized eigenproblem failed", 0.0);
    return s.eigenvalues().minCoeff();
}

double min_eigenvalue(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(a, Eigen::EigenvaluesOnly);
    return s.eigenvalues().minCoeff();
}

double max_eigenvalue(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(a, Eigen::EigenvaluesOnly);
    return s.eigenvalues().maxCoeff();
}

// Shared by beta_threshold and reachability_threshold: factor * lambda_min(I2, I1)
// for N > 2, with the N = 2 and flat-I2 special cases.
double scaled_threshold(int n, const DistanceIntegrals& di, double factor) {
    const double i2_min = min_eigenvalue(di.i2);
    const double scale = std::max(1.0, di.i2.cwiseAbs().maxCoeff());
    if (!(i2_min > 1e-12 * scale)) return 0.0;
    if (n == 2) return inf;
    return factor * min_generalized_eigenvalue(di.i2, di.i1);
}

}  // namespace

const char* to_string(MedianCardinality c) {
    switch (c) {
        case MedianCardinality::unique: return "unique";
        case MedianCardinality::finite_multiple: return "finite_multiple";
        case MedianCardinality::continuum: return "continuum";
    }
    return "unknown";
}

double mean_distance(const Manifold& m, const QuadratureRule& q, const Point& y,
                     std::vector<double>* gradient) {
    const std::size_t d = m.dimension();
    std::vector<double> partials(d), acc(d, 0.0);
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        s += q.masses[k] * detail::kernel_distance_and_partials(m.axes(), q.node(k), y.coords.data(),
                                                              partials.data(), q.kernel_radius);
        if (gradient)
            for (std::size_t j = 0; j < d; ++j) acc[j] += q.masses[k] * partials[j];
    }
    const double inv_v = 1.0 / m.total_volume();
    if (gradient) {
        for (double& v : acc) v *= inv_v;
        *gradient = riemannian_gradient(m, y, acc).components;
    }
    return s * inv_v;
}

namespace {

// Pattern descent on the mean distance: a normalized gradient step first,
// axis-aligned polls as the fallback on kinks where the gradient is not a
// descent direction.
std::pair<Point, double> descend(const Manifold& m, const QuadratureRule& q, Point y, double step,
                                 double min_step) {
    const std::size_t d = m.dimension();
    std::vector<double> g;
    double f = mean_distance(m, q, y, &g);
    std::vector<double> move(d);
    for (int it = 0; it < 4000 && step > min_step; ++it) {
        bool improved = false;
        const double gn = tangent_norm(m, TangentVector{y, g});
        if (gn > 0.0) {
            for (std::size_t j = 0; j < d; ++j) move[j] = -step * g[j] / gn;
            const Point trial = retract(m, y, move);
            std::vector<double> tg;
            const double tf = mean_distance(m, q, trial, &tg);
            if (tf < f) {
                y = trial, f = tf, g = std::move(tg);
                improved = true;
            }
        }
        for (std::size_t j = 0; j < d && !improved; ++j)
            for (double sign : {1.0, -1.0}) {
                std::fill(move.begin(), move.end(), 0.0);
                move[j] = sign * step / m.axes()[j].scale;
                const Point trial = retract(m, y, move);
                std::vector<double> tg;
                const double tf = mean_distance(m, q, trial, &tg);
                if (tf < f) {
                    y = trial, f = tf, g = std::move(tg);
                    improved = true;
                    break;
                }
            }
        step = improved ? step * 1.5 : step * 0.5;
    }
    return {std::move(y), f};
}

}  // namespace

MedianSet numeric_median_set(const Manifold& m, const MedianOptions& opts) {
    const std::size_t res = median_resolution(m, opts.resolution);
    const QuadratureRule q = build_quadrature(m, res, opts.seed);
    // Starts run on a rule a quarter as fine (per axis on grids), then only
    // the distinct basins are polished on the full one.
    const QuadratureRule coarse =
        build_quadrature(m, std::max<std::size_t>(m.dimension() <= 2 ? res / 4 : res / 16, 16), opts.seed);
    const double diam = m.diameter();
    Rng rng(derive_seed(opts.seed, 2));

    struct Found {
        Point y;
        double f;
    };
    std::vector<Found> rough;
    for (std::size_t s = 0; s < std::max<std::size_t>(opts.starts, 1); ++s) {
        Point y;
        for (const auto& a : m.axes()) y.coords.push_back(a.lower + a.extent() * rng.uniform());
        auto [p, f] = descend(m, coarse, std::move(y), 0.1 * diam, 1e-4 * diam);
        rough.push_back({std::move(p), f});
    }
    double rough_best = inf;
    for (const auto& r : rough) rough_best = std::min(rough_best, r.f);

    // The coarse objective is only trusted to a few parts in a thousand, and
    // coarse minimizers of one basin scatter by about a percent of the diameter.
    std::vector<Found> found;
    std::vector<Point> seeds;
    for (const auto& r : rough) {
        if (r.f > rough_best + 1e-3 * diam) continue;
        const bool dup = std::any_of(seeds.begin(), seeds.end(), [&](const Point& o) {
            return geodesic_distance(m, o, r.y) < 2e-2 * diam;
        });
        if (dup) continue;
        seeds.push_back(r.y);
        auto [p, f] = descend(m, q, r.y, 1e-2 * diam, 1e-9 * diam);
        found.push_back({std::move(p), f});
    }

    double best = inf;
    for (const auto& r : found) best = std::min(best, r.f);
    std::vector<Point> distinct;
    for (const auto& r : found) {
        if (r.f > best + opts.tol) continue;
        const bool dup = std::any_of(distinct.begin(), distinct.end(), [&](const Point& p) {
            return geodesic_distance(m, p, r.y) < 1e-3 * diam;
        });
        if (!dup) distinct.push_back(r.y);
    }

    MedianSet out;
    out.objective_value = best;
    out.representatives = distinct;
    // Many starts settling at distinct points of equal objective indicate a flat
    // valley rather than isolated minima.
    if (distinct.size() == 1)
        out.cardinality = MedianCardinality::unique;
    else if (distinct.size() < 4)
        out.cardinality = MedianCardinality::finite_multiple;
    else
        out.cardinality = MedianCardinality::continuum;
    return out;
}

MedianSet median_set(const Manifold& m, const MedianOptions& opts) {
    MedianSet out;
    out.closed_form = true;
    const std::size_t d = m.dimension();
    switch (m.kind()) {
        case ManifoldKind::segment:
        case ManifoldKind::hypercube:
            out.representatives = {Point(std::vector<double>(d, 0.5))};
            out.cardinality = MedianCardinality::unique;
            break;
        case ManifoldKind::circle:
        case ManifoldKind::torus:
            out.representatives = {Point(std::vector<double>(d, 0.0))};
            out.cardinality = MedianCardinality::continuum;
            break;
        case ManifoldKind::product:
            return numeric_median_set(m, opts);
    }
    const QuadratureRule q = build_quadrature(m, median_resolution(m, opts.resolution), opts.seed);
    out.objective_value = mean_distance(m, q, out.representatives[0]);
    return out;
}

DistanceIntegrals median_distance_integrals(const Manifold& m, std::uint64_t seed) {
    MedianOptions mo;
    mo.seed = seed;
    const MedianSet ms = median_set(m, mo);
    IntegralOptions io;
    io.seed = seed;
    return aggregate_distance_integrals(m, ms.representatives.front(), io);
}

double concentrated_price(const MarketConfig& cfg) {
    if (cfg.n_firms < 2) throw InvalidInput("concentrated_price: N must be >= 2");
    if (!(cfg.beta > 0.0)) throw InvalidInput("concentrated_price: beta must be > 0");
    const double n = cfg.n_firms;
    return cfg.cost + n / (cfg.beta * (n - 1.0));
}

CurvatureCheck curvature_condition(const Manifold&, const MarketConfig& cfg,
                                   const DistanceIntegrals& at_median) {
    const double n = cfg.n_firms;
    const Eigen::MatrixXd gap = at_median.i2 - cfg.beta * (n - 2.0) / n * at_median.i1;
    CurvatureCheck c;
    c.margin = min_eigenvalue(gap);
    c.satisfied = c.margin > 0.0;
    return c;
}

CurvatureCheck curvature_condition(const Manifold& m, const MarketConfig& cfg) {
    return curvature_condition(m, cfg, median_distance_integrals(m, cfg.seed));
}

double beta_threshold(const Manifold& m, const MarketConfig& cfg, const DistanceIntegrals& at_median) {
    if (cfg.n_firms < 2) throw InvalidInput("beta_threshold: N must be >= 2");
    const double n = cfg.n_firms;
    switch (m.kind()) {
        case ManifoldKind::segment: {
            if (cfg.n_firms == 2) return inf;
            const double a = m.axes()[0].cost_exponent;
            if (a == 1.0) return 2.0 * n / (n - 2.0);
            return std::pow(2.0, a) * (2.0 * a - 1.0) * n / (a * (n - 2.0));
        }
        case ManifoldKind::circle:
        case ManifoldKind::torus:
            return 0.0;
        case ManifoldKind::hypercube:
            if (cfg.n_firms == 2) return inf;
            // I2 / I1 = ihat(A) at the center.
            return n / (n - 2.0) * at_median.i2_scalar() / at_median.i1_scalar();
        case ManifoldKind::product:
            break;
    }
    return scaled_threshold(cfg.n_firms, at_median, n / (n - 2.0));
}

double beta_threshold(const Manifold& m, const MarketConfig& cfg) {
    if (m.kind() == ManifoldKind::segment || m.kind() == ManifoldKind::circle ||
        m.kind() == ManifoldKind::torus)
        return beta_threshold(m, cfg, DistanceIntegrals{});
    return beta_threshold(m, cfg, median_distance_integrals(m, cfg.seed));
}

double reachability_threshold(const MarketConfig& cfg, const DistanceIntegrals& at_median) {
    if (cfg.n_firms < 2) throw InvalidInput("reachability_threshold: N must be >= 2");
    const double n = cfg.n_firms;
    return scaled_threshold(cfg.n_firms, at_median, (n - 1.0) / (n - 2.0));
}

LearningRateBounds learning_rate_bounds(const Manifold& m, const MarketConfig& cfg,
                                        const DistanceIntegrals& at_median) {
    if (cfg.n_firms < 2) throw InvalidInput("learning_rate_bounds: N must be >= 2");
    const double n = cfg.n_firms;
    LearningRateBounds b;
    b.lambda_p_max = 2.0 * n * n / (cfg.beta * (n - 1.0));
    const double top = max_eigenvalue(at_median.i2);
    const double least = min_eigenvalue(at_median.i2);
    if (least > 1e-12 * std::max(1.0, top)) {
        b.lambda_y_max = 2.0 * n * m.total_volume() / top;
    } else {
        b.lambda_y_max = inf;
        b.lambda_y_applicable = false;
    }
    return b;
}

LearningRateBounds learning_rate_bounds(const Manifold& m, const MarketConfig& cfg) {
    return learning_rate_bounds(m, cfg, median_distance_integrals(m, cfg.seed));
}

std::string EquilibriumReport::to_text() const {
    std::ostringstream os;
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << "manifold = " << manifold << '\n'
       << "N = " << n_firms << '\n'
       << "beta = " << format_double(beta) << '\n'
       << "median_cardinality = " << to_string(median_cardinality) << '\n'
       << "median =";
    for (double c : median.coords) os << ' ' << format_double(c);
    os << '\n'
       << "median_ok = " << b(median_ok) << '\n'
       << "has_boundary = " << b(has_boundary) << '\n'
       << "i1 = " << format_double(i1) << '\n'
       << "i2 = " << format_double(i2) << '\n'
       << "price_bar = " << format_double(price_bar) << '\n'
       << "curvature_margin = " << format_double(curvature_margin) << '\n'
       << "beta_threshold = " << format_double(beta_threshold) << '\n'
       << "beta_reach = " << format_double(beta_reach) << '\n'
       << "lambda_p_max = " << format_double(lambda_p_max) << '\n'
       << "lambda_y_max = " << format_double(lambda_y_max) << '\n'
       << "lambda_y_applicable = " << b(lambda_y_applicable) << '\n';
    if (ihat > 0.0)
        os << "ihat = " << format_double(ihat) << '\n'
           << "ihat_standard_error = " << format_double(ihat_standard_error) << '\n';
    os << "is_nash_candidate = " << b(is_nash_candidate) << '\n'
       << "welfare_local_max = " << b(welfare_local_max) << '\n'
       << "welfare_global_max = " << b(welfare_global_max) << '\n'
       << "reason =";
    if (reasons.empty()) os << " none";
    for (std::size_t k = 0; k < reasons.size(); ++k) os << (k ? "; " : " ") << reasons[k];
    os << '\n';
    return os.str();
}

EquilibriumReport check_nash_concentrated(const Manifold& m, const MarketConfig& cfg,
                                          const CheckOptions& opts) {
    if (cfg.n_firms < 2) throw InvalidInput("check: N must be >= 2");
    if (!(cfg.beta > 0.0)) throw InvalidInput("check: beta must be > 0");
    EquilibriumReport r;
    r.manifold = m.name();
    r.n_firms = cfg.n_firms;
    r.beta = cfg.beta;

    MedianOptions mo;
    mo.seed = opts.seed;
    const MedianSet ms = median_set(m, mo);
    r.median_cardinality = ms.cardinality;
    r.median_ok = ms.cardinality == MedianCardinality::unique;
    r.median = ms.representatives.front();
    r.has_boundary = m.has_boundary();

    IntegralOptions io;
    io.seed = opts.seed;
    io.ihat_samples = opts.ihat_samples;
    const DistanceIntegrals di = aggregate_distance_integrals(m, r.median, io);
    r.i1 = di.i1_scalar();
    r.i2 = di.i2_scalar();
    if (m.kind() == ManifoldKind::hypercube) {
        r.ihat = r.i2 * static_cast<double>(m.dimension());
        r.ihat_standard_error = di.residual * static_cast<double>(m.dimension());
    }

    r.price_bar = concentrated_price(cfg);
    const CurvatureCheck cc = curvature_condition(m, cfg, di);
    r.curvature_margin = cc.margin;
    r.beta_threshold = beta_threshold(m, cfg, di);
    r.beta_reach = r.has_boundary ? reachability_threshold(cfg, di) : 0.0;
    const LearningRateBounds lb = learning_rate_bounds(m, cfg, di);
    r.lambda_p_max = lb.lambda_p_max;
    r.lambda_y_max = lb.lambda_y_max;
    r.lambda_y_applicable = lb.lambda_y_applicable;

    if (!r.median_ok) r.reasons.push_back(std::string("median not unique (") + to_string(ms.cardinality) + ")");
    if (!r.has_boundary) r.reasons.push_back("no boundary");
    if (!cc.satisfied) r.reasons.push_back("curvature condition violated");
    r.is_nash_candidate = r.median_ok && cc.satisfied && r.has_boundary;
    r.welfare_local_max = r.is_nash_candidate;
    r.welfare_global_max = false;
    return r;
}

std::vector<OutcomeLabel> separability_check(const MarketState& state, const Manifold& m) {
    if (m.kind() != ManifoldKind::product) throw InvalidInput("separability_check: product manifold required");
    if (state.size() == 0) throw InvalidInput("separability_check: empty state");
    const auto factors = m.factors();
    double mean_price = 0.0;
    for (double p : state.prices) mean_price += p;
    mean_price /= static_cast<double>(state.size());

    std::vector<OutcomeLabel> labels;
    for (std::size_t k = 0; k < factors.size(); ++k) {
        const auto [first, count] = m.factor_axes(k);
        auto project = [&, first = first, count = count](const Point& y) {
            return Point(std::vector<double>(y.coords.begin() + static_cast<std::ptrdiff_t>(first),
                                             y.coords.begin() + static_cast<std::ptrdiff_t>(first + count)));
        };
        OutcomeLabel l;
        l.mean_final_price = mean_price;
        for (std::size_t i = 0; i < state.size(); ++i)
            for (std::size_t j = i + 1; j < state.size(); ++j)
                l.max_pairwise_distance =
                    std::max(l.max_pairwise_distance, geodesic_distance(factors[k], project(state.positions[i]),
                                                                        project(state.positions[j])));
        l.kind = l.max_pairwise_distance < concentration_tolerance(factors[k]) ? OutcomeKind::concentrated
                                                                               : OutcomeKind::dispersed;
        labels.push_back(l);
    }
    return labels;
}

std::vector<OutcomeLabel> separability_check(const Trajectory& traj, const Manifold& m) {
    return separability_check(traj.final_state(), m);
}

}  // namespace hotelling
