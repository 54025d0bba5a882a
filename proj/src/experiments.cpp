#include "hotelling/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hotelling/equilibrium.hpp"
#include "hotelling/errors.hpp"
#include "hotelling/format.hpp"
#include "hotelling/random.hpp"

namespace hotelling {

MarketConfig auto_scaled(const Manifold& m, MarketConfig cfg, const DistanceIntegrals& at_median) {
    const double n = cfg.n_firms;
    cfg.lambda_p = 0.25 * 2.0 * n * n / (cfg.beta * (n - 1.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(at_median.i2, Eigen::EigenvaluesOnly);
    const double top = s.eigenvalues().maxCoeff();
    // Away from the concentrated point the position gradient turns over a
    // band of width ~1/beta around each market boundary, so its Lipschitz
    // constant grows like beta times the markup, and markups reach the order
    // of the diameter. Without the 1/beta factor, steps leapfrog rivals and
    // lock into period-2 cycles at large beta.
    const double diam = m.diameter();
    double bound = 2.0 * n * diam * std::min(1.0, 1.0 / (cfg.beta * diam));
    if (top > 0.0) bound = std::min(bound, 2.0 * n * m.total_volume() / top);
    cfg.lambda_y = 0.25 * bound;
    return cfg;
}

MarketConfig auto_scaled(const Manifold& m, MarketConfig cfg) {
    return auto_scaled(m, cfg, median_distance_integrals(m, cfg.seed));
}

std::string PhaseDiagram::to_csv() const {
    std::ostringstream os;
    os << "beta,N,fraction_concentrated,replicates,diverged,predicted_threshold,reach_threshold\n";
    for (std::size_t a = 0; a < n_grid.size(); ++a)
        for (std::size_t b = 0; b < beta_grid.size(); ++b) {
            const PhaseCell& c = cells[a][b];
            os << format_double(c.beta) << ',' << c.n_firms << ',' << format_double(c.fraction_concentrated)
               << ',' << c.replicates << ',' << c.diverged << ',' << format_double(predicted_threshold[a])
               << ',' << format_double(reach_threshold[a]) << '\n';
        }
    return os.str();
}

PhaseDiagram phase_sweep(const Manifold& m, const MarketConfig& base, std::vector<double> beta_grid,
                         std::vector<int> n_grid, const PhaseOptions& opts) {
    if (opts.replicates < 1) throw InvalidInput("phase_sweep: replicates must be >= 1");
    if (beta_grid.empty() || n_grid.empty()) throw InvalidInput("phase_sweep: empty grid");
    std::sort(beta_grid.begin(), beta_grid.end());
    std::sort(n_grid.begin(), n_grid.end());
    for (double b : beta_grid)
        if (!(b > 0.0)) throw InvalidInput("phase_sweep: beta values must be > 0");
    for (int n : n_grid)
        if (n < 2) throw InvalidInput("phase_sweep: N values must be >= 2");

    PhaseDiagram out;
    out.beta_grid = beta_grid;
    out.n_grid = n_grid;

    MedianOptions mo;
    mo.seed = base.seed;
    const Point median = median_set(m, mo).representatives.front();
    IntegralOptions io;
    io.seed = base.seed;
    io.ihat_samples = opts.ihat_samples;
    const DistanceIntegrals di = aggregate_distance_integrals(m, median, io);
    const QuadratureRule quad = market_quadrature(base, m);

    for (int n : n_grid) {
        MarketConfig row = base;
        row.n_firms = n;
        out.predicted_threshold.push_back(beta_threshold(m, row, di));
        out.reach_threshold.push_back(m.has_boundary() ? reachability_threshold(row, di) : 0.0);
        std::vector<PhaseCell> cells;
        for (double beta : beta_grid) {
            MarketConfig cfg = row;
            cfg.beta = beta;
            const MarketConfig a = auto_scaled(m, cfg, di);
            if (opts.auto_lambda_p) cfg.lambda_p = a.lambda_p;
            if (opts.auto_lambda_y) cfg.lambda_y = a.lambda_y;
            PhaseCell cell;
            cell.beta = beta;
            cell.n_firms = n;
            cell.replicates = opts.replicates;
            int concentrated = 0;
            for (int r = 0; r < opts.replicates; ++r) {
                MarketConfig run = cfg;
                run.seed = derive_seed(base.seed, static_cast<std::uint64_t>(r));
                const Trajectory t = simulate(run, m, quad, random_state(run, m, run.seed), opts.dynamics);
                if (t.reason == TerminationReason::diverged) {
                    ++cell.diverged;
                    continue;
                }
                if (classify_outcome(t, m).kind == OutcomeKind::concentrated) ++concentrated;
            }
            cell.fraction_concentrated = static_cast<double>(concentrated) / opts.replicates;
            cells.push_back(cell);
        }
        out.cells.push_back(std::move(cells));
    }
    return out;
}

double empirical_threshold(const PhaseDiagram& diagram, int n_firms) {
    const auto it = std::find(diagram.n_grid.begin(), diagram.n_grid.end(), n_firms);
    if (it == diagram.n_grid.end()) throw InvalidInput("empirical_threshold: N not on the grid");
    const auto& row = diagram.cells[static_cast<std::size_t>(it - diagram.n_grid.begin())];
    for (std::size_t b = 0; b + 1 < row.size(); ++b) {
        const double f0 = row[b].fraction_concentrated, f1 = row[b + 1].fraction_concentrated;
        if (f0 >= 0.5 && f1 < 0.5) {
            const double t = (f0 - 0.5) / (f0 - f1);
            return row[b].beta + t * (row[b + 1].beta - row[b].beta);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

ClusterPattern cluster_positions(const MarketState& state, const Manifold& m, double tol) {
    if (m.kind() != ManifoldKind::segment) throw InvalidInput("clustering requires the segment");
    if (state.size() == 0) throw InvalidInput("clustering: empty state");
    std::vector<double> xs;
    for (const auto& y : state.positions) xs.push_back(y[0]);
    std::sort(xs.begin(), xs.end());
    ClusterPattern p;
    double sum = xs[0];
    int count = 1;
    for (std::size_t i = 1; i <= xs.size(); ++i) {
        if (i < xs.size() && xs[i] - xs[i - 1] < tol) {
            sum += xs[i];
            ++count;
            continue;
        }
        p.clusters.push_back({sum / count, count});
        if (i < xs.size()) sum = xs[i], count = 1;
    }
    return p;
}

ClusterPattern detect_eaton_lipsey(const MarketState& state, const Manifold& m, double tol) {
    ClusterPattern p = cluster_positions(state, m, tol);
    const double centers[3] = {1.0 / 6.0, 0.5, 5.0 / 6.0};
    const int mult[3] = {2, 1, 2};
    p.matches_eaton_lipsey = state.size() == 5 && p.clusters.size() == 3;
    for (std::size_t k = 0; k < 3 && p.matches_eaton_lipsey; ++k)
        p.matches_eaton_lipsey = std::fabs(p.clusters[k].center - centers[k]) <= tol &&
                                 p.clusters[k].multiplicity == mult[k];
    return p;
}

ClusterPattern detect_eaton_lipsey(const Trajectory& traj, const Manifold& m, double tol) {
    return detect_eaton_lipsey(traj.final_state(), m, tol);
}

Manifold cylinder() { return Manifold::product({Manifold::circle(), Manifold::segment()}); }

CylinderReport cylinder_demo(const MarketConfig& cfg, const CylinderOptions& opts) {
    const Manifold m = cylinder();
    const MarketConfig run = opts.auto_learning_rates ? auto_scaled(m, cfg) : cfg;
    CylinderReport r;
    r.trajectory = simulate(run, m, opts.dynamics);
    if (r.trajectory.reason == TerminationReason::diverged) throw DivergenceError("cylinder run diverged");
    const auto labels = separability_check(r.trajectory, m);
    r.periodic = labels[0];
    r.bounded = labels[1];
    for (const auto& y : r.trajectory.final_state().positions) r.bounded_mean += y[1];
    r.bounded_mean /= static_cast<double>(cfg.n_firms);

    if (opts.standalone) {
        r.standalone_run = true;
        const Manifold circle = Manifold::circle(), seg = Manifold::segment();
        MarketConfig c = opts.auto_learning_rates ? auto_scaled(circle, cfg) : cfg;
        MarketConfig s = opts.auto_learning_rates ? auto_scaled(seg, cfg) : cfg;
        r.standalone_periodic = classify_outcome(simulate(c, circle, opts.dynamics), circle);
        r.standalone_bounded = classify_outcome(simulate(s, seg, opts.dynamics), seg);
        r.consistent = r.standalone_periodic.kind == r.periodic.kind &&
                       r.standalone_bounded.kind == r.bounded.kind;
    }
    return r;
}

}  // namespace hotelling
