#include <algorithm>
#include <cmath>
#include <numbers>

#include "hotelling/errors.hpp"
#include "hotelling/geometry.hpp"

namespace hotelling {

namespace {

std::size_t fine_resolution(const Manifold& m) {
    switch (m.dimension()) {
        case 1: return std::size_t{1} << 14;
        case 2: return 256;
        default: return 400'000;
    }
}

// F(y) = integral of d(x, y) over x, in parameter coordinates.
double integrated_distance(const Manifold& m, const QuadratureRule& q, const double* y,
                           std::vector<double>& scratch) {
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k)
        s += q.masses[k] *
             detail::kernel_distance_and_partials(m.axes(), q.node(k), y, scratch.data(), q.kernel_radius);
    return s;
}

// Central-difference Hessian of F at c with per-axis steps h (parameter units).
Eigen::MatrixXd fd_hessian(const Manifold& m, const QuadratureRule& q, const std::vector<double>& c,
                           const std::vector<double>& h) {
    const std::size_t d = m.dimension();
    std::vector<double> scratch(d), y(c);
    auto f = [&](std::size_t i, double si, std::size_t j, double sj) {
        y = c;
        y[i] += si * h[i];
        y[j] += sj * h[j];
        return integrated_distance(m, q, y.data(), scratch);
    };
    const double f0 = integrated_distance(m, q, c.data(), scratch);
    Eigen::MatrixXd hess(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        // f(i, +1, i, 0) moves only axis i.
        hess(i, i) = (f(i, 1, i, 0) - 2.0 * f0 + f(i, -1, i, 0)) / (h[i] * h[i]);
        for (std::size_t j = i + 1; j < d; ++j) {
            const double v = (f(i, 1, j, 1) - f(i, 1, j, -1) - f(i, -1, j, 1) + f(i, -1, j, -1)) /
                             (4.0 * h[i] * h[j]);
            hess(i, j) = hess(j, i) = v;
        }
    }
    return hess;
}

Eigen::MatrixXd to_orthonormal_hessian(const Manifold& m, Eigen::MatrixXd h) {
    for (std::size_t i = 0; i < m.dimension(); ++i)
        for (std::size_t j = 0; j < m.dimension(); ++j)
            h(i, j) /= m.axes()[i].scale * m.axes()[j].scale;
    return h;
}

}  // namespace

bool DistanceIntegrals::isotropic(double rel_tol) const {
    auto scalar_like = [rel_tol](const Eigen::MatrixXd& a) {
        const double s = a.trace() / static_cast<double>(a.rows());
        const Eigen::MatrixXd diff = a - s * Eigen::MatrixXd::Identity(a.rows(), a.cols());
        return diff.cwiseAbs().maxCoeff() <= rel_tol * std::max(1.0, std::fabs(s));
    };
    return scalar_like(i1) && scalar_like(i2);
}

double DistanceIntegrals::i1_scalar() const { return i1.trace() / static_cast<double>(i1.rows()); }
double DistanceIntegrals::i2_scalar() const { return i2.trace() / static_cast<double>(i2.rows()); }

DistanceIntegrals numeric_distance_integrals(const Manifold& m, const Point& y,
                                             const IntegralOptions& opts) {
    m.check_point(y);
    const std::size_t d = m.dimension();
    const std::size_t res = opts.resolution ? opts.resolution : fine_resolution(m);
    const QuadratureRule q = build_quadrature(m, res, opts.seed);

    DistanceIntegrals out;
    out.evaluation_point = y;
    out.provenance = Provenance::numeric;

    out.i1 = Eigen::MatrixXd::Zero(d, d);
    std::vector<double> g(d);
    Eigen::VectorXd e(d);
    for (std::size_t k = 0; k < q.size(); ++k) {
        // No smoothing here: I1 never differentiates in y, and the capped
        // gradients would bias it by O(cell width).
        detail::distance_and_partials(m.axes(), q.node(k), y.coords.data(), g.data());
        for (std::size_t i = 0; i < d; ++i) e(i) = g[i] / m.axes()[i].scale;
        out.i1.noalias() += q.masses[k] * (e * e.transpose());
    }

    // On tensor grids the steps are whole cells: the midpoint sum carries a
    // ripple with the grid period (cut-locus ridges, the smoothed kink), and
    // stencils made of whole-cell shifts see it with one phase, so the second
    // difference cancels it. Bounded axes shift the stencil center inward
    // when y sits near the edge; that shift shrinks with h, so extrapolation
    // drops to first order then.
    auto hessian_at = [&](double factor, bool& shifted) {
        std::vector<double> h(d), c(y.coords);
        for (std::size_t i = 0; i < d; ++i) {
            const auto& a = m.axes()[i];
            if (q.monte_carlo) {
                h[i] = factor * 0.02 * a.extent();
            } else {
                const double cell = a.extent() / static_cast<double>(q.resolution);
                const double cells = std::max(1.0, std::round(0.01 * static_cast<double>(q.resolution)));
                h[i] = 2.0 * factor * cells * cell;
            }
            if (a.kind == CoordinateKind::bounded) {
                const double lo = a.lower + 2.0 * h[i], hi = a.upper - 2.0 * h[i];
                const double cc = std::clamp(c[i], lo, hi);
                if (cc != c[i]) shifted = true;
                c[i] = cc;
            }
        }
        return fd_hessian(m, q, c, h);
    };
    bool shifted = false;
    const Eigen::MatrixXd coarse = hessian_at(1.0, shifted);
    const Eigen::MatrixXd fine = hessian_at(0.5, shifted);
    const Eigen::MatrixXd extrapolated = shifted ? Eigen::MatrixXd(2.0 * fine - coarse)
                                                 : Eigen::MatrixXd((4.0 * fine - coarse) / 3.0);
    out.i2 = to_orthonormal_hessian(m, extrapolated);
    out.i2 = 0.5 * (out.i2 + out.i2.transpose()).eval();

    const double size = std::max(1.0, extrapolated.cwiseAbs().maxCoeff());
    out.residual = (fine - coarse).cwiseAbs().maxCoeff() / size;
    if (!std::isfinite(out.residual) || out.residual > opts.tolerance)
        throw EstimationError("numeric distance integrals did not settle", out.residual);
    return out;
}

DistanceIntegrals aggregate_distance_integrals(const Manifold& m, const Point& y,
                                               const IntegralOptions& opts) {
    m.check_point(y);
    const std::size_t d = m.dimension();
    DistanceIntegrals out;
    out.evaluation_point = y;
    out.provenance = Provenance::closed_form;

    switch (m.kind()) {
        case ManifoldKind::segment: {
            const double a = m.axes()[0].cost_exponent;
            double i1 = 1.0, i2 = 2.0;
            if (a != 1.0) {
                const double l = y[0], r = 1.0 - y[0];
                i1 = a * a * (std::pow(l, 2 * a - 1) + std::pow(r, 2 * a - 1)) / (2 * a - 1);
                i2 = a * (std::pow(l, a - 1) + std::pow(r, a - 1));
            }
            out.i1 = Eigen::MatrixXd::Constant(1, 1, i1);
            out.i2 = Eigen::MatrixXd::Constant(1, 1, i2);
            return out;
        }
        case ManifoldKind::circle:
            out.i1 = Eigen::MatrixXd::Constant(1, 1, m.total_volume());
            out.i2 = Eigen::MatrixXd::Zero(1, 1);
            return out;
        case ManifoldKind::torus: {
            // The integrated distance does not depend on y, so its Hessian vanishes.
            const auto& ax = m.axes();
            const bool equal = std::all_of(ax.begin(), ax.end(),
                                           [&](const Axis& a) { return a.scale == ax[0].scale; });
            if (equal) {
                out.i1 = (m.total_volume() / static_cast<double>(d)) * Eigen::MatrixXd::Identity(d, d);
            } else {
                out = numeric_distance_integrals(m, y, opts);
            }
            out.i2 = Eigen::MatrixXd::Zero(d, d);
            return out;
        }
        case ManifoldKind::hypercube: {
            const bool center = std::all_of(y.coords.begin(), y.coords.end(),
                                            [](double v) { return std::fabs(v - 0.5) < 1e-12; });
            if (!center) return numeric_distance_integrals(m, y, opts);
            const double a = static_cast<double>(d);
            const IhatEstimate ih = estimate_ihat(static_cast<int>(d), opts.ihat_samples, opts.seed);
            out.i1 = (1.0 / a) * Eigen::MatrixXd::Identity(d, d);
            out.i2 = (ih.estimate / a) * Eigen::MatrixXd::Identity(d, d);
            out.residual = ih.standard_error / a;
            return out;
        }
        case ManifoldKind::product:
            return numeric_distance_integrals(m, y, opts);
    }
    throw UnsupportedCase("unknown manifold kind");
}

}  // namespace hotelling
