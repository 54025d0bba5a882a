#include "hotelling/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hotelling/errors.hpp"

namespace hotelling {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void check_dimension(const Manifold& m, std::size_t got, const char* what) {
    if (got != m.dimension()) {
        std::ostringstream os;
        os << what << ": expected dimension " << m.dimension() << ", got " << got;
        throw InvalidInput(os.str());
    }
}

double wrap(const Axis& a, double v) {
    const double p = a.extent();
    double w = v - p * std::floor((v - a.lower) / p);
    if (w >= a.upper) w = a.lower;
    return w;
}

}  // namespace

Manifold Manifold::segment(double cost_exponent) {
    if (!(cost_exponent >= 1.0) || !std::isfinite(cost_exponent))
        throw InvalidInput("segment: cost exponent must be a finite real >= 1");
    Manifold m;
    m.kind_ = ManifoldKind::segment;
    m.axes_ = {Axis{CoordinateKind::bounded, 0.0, 1.0, 1.0, cost_exponent}};
    return m;
}

Manifold Manifold::circle(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidInput("circle: radius must be positive");
    Manifold m;
    m.kind_ = ManifoldKind::circle;
    m.axes_ = {Axis{CoordinateKind::periodic, 0.0, two_pi, radius, 1.0}};
    return m;
}

Manifold Manifold::hypercube(int dimension) {
    if (dimension < 2) throw InvalidInput("hypercube: dimension must be >= 2");
    Manifold m;
    m.kind_ = ManifoldKind::hypercube;
    m.axes_.assign(static_cast<std::size_t>(dimension),
                   Axis{CoordinateKind::bounded, 0.0, 1.0, 1.0, 1.0});
    return m;
}

Manifold Manifold::torus(std::vector<double> radii) {
    if (radii.empty()) throw InvalidInput("torus: at least one radius required");
    Manifold m;
    m.kind_ = ManifoldKind::torus;
    for (double r : radii) {
        if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("torus: radii must be positive");
        m.axes_.push_back(Axis{CoordinateKind::periodic, 0.0, two_pi, r, 1.0});
    }
    return m;
}

Manifold Manifold::product(const std::vector<Manifold>& factors) {
    if (factors.empty()) throw InvalidInput("product: at least one factor required");
    Manifold m;
    m.kind_ = ManifoldKind::product;
    m.factors_ = factors;
    for (const auto& f : factors) {
        m.factor_offsets_.push_back(m.axes_.size());
        m.axes_.insert(m.axes_.end(), f.axes_.begin(), f.axes_.end());
    }
    return m;
}

std::string Manifold::name() const {
    std::ostringstream os;
    switch (kind_) {
        case ManifoldKind::segment:
            os << "segment";
            if (axes_[0].cost_exponent != 1.0) os << "(alpha=" << axes_[0].cost_exponent << ")";
            break;
        case ManifoldKind::circle:
            os << "circle";
            if (axes_[0].scale != 1.0) os << "(r=" << axes_[0].scale << ")";
            break;
        case ManifoldKind::hypercube: os << "hypercube(" << axes_.size() << ")"; break;
        case ManifoldKind::torus: os << "torus(" << axes_.size() << ")"; break;
        case ManifoldKind::product:
            os << "product(";
            for (std::size_t k = 0; k < factors_.size(); ++k) {
                if (k) os << " x ";
                os << factors_[k].name();
            }
            os << ")";
            break;
    }
    return os.str();
}

std::vector<Manifold> Manifold::factors() const {
    if (kind_ == ManifoldKind::product) return factors_;
    return {*this};
}

std::size_t Manifold::factor_count() const {
    return kind_ == ManifoldKind::product ? factors_.size() : 1;
}

std::pair<std::size_t, std::size_t> Manifold::factor_axes(std::size_t k) const {
    if (kind_ != ManifoldKind::product) {
        if (k != 0) throw InvalidInput("factor index out of range");
        return {0, axes_.size()};
    }
    if (k >= factors_.size()) throw InvalidInput("factor index out of range");
    return {factor_offsets_[k], factors_[k].dimension()};
}

double Manifold::volume_element() const {
    double v = 1.0;
    for (const auto& a : axes_) v *= a.scale;
    return v;
}

double Manifold::volume_element(const Point& y) const {
    check_dimension(*this, y.dimension(), "volume_element");
    return volume_element();
}

double Manifold::total_volume() const {
    double v = 1.0;
    for (const auto& a : axes_) v *= a.extent() * a.scale;
    return v;
}

bool Manifold::has_boundary() const {
    for (const auto& a : axes_)
        if (a.kind == CoordinateKind::bounded) return true;
    return false;
}

double Manifold::diameter() const {
    double s = 0.0;
    for (const auto& a : axes_) {
        const double d = a.kind == CoordinateKind::bounded ? a.extent() * a.scale
                                                           : 0.5 * a.extent() * a.scale;
        s += d * d;
    }
    return std::sqrt(s);
}

bool Manifold::contains(const Point& y) const {
    if (y.dimension() != dimension()) return false;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        const auto& a = axes_[k];
        const double v = y[k];
        if (!std::isfinite(v)) return false;
        if (a.kind == CoordinateKind::bounded) {
            if (v < a.lower || v > a.upper) return false;
        } else if (v < a.lower || v >= a.upper) {
            return false;
        }
    }
    return true;
}

Point Manifold::normalize(Point y) const {
    check_dimension(*this, y.dimension(), "normalize");
    for (std::size_t k = 0; k < axes_.size(); ++k)
        if (axes_[k].kind == CoordinateKind::periodic) y[k] = wrap(axes_[k], y[k]);
    return y;
}

void Manifold::check_point(const Point& y) const {
    check_dimension(*this, y.dimension(), "point");
    if (!contains(y)) throw InvalidInput("point lies outside the parameter domain");
}

namespace detail {

double axis_signed_offset(const Axis& a, double x, double y) {
    const double diff = y - x;
    if (a.kind == CoordinateKind::bounded) return diff;
    const double p = a.extent();
    // Range (-p/2, p/2]: the exact antipode takes the positive branch.
    return diff - p * std::ceil(diff / p - 0.5);
}

double distance_and_partials(const std::vector<Axis>& axes, const double* x, const double* y,
                             double* partials) {
    const std::size_t d = axes.size();
    if (d == 1) {
        const Axis& a = axes[0];
        const double r = axis_signed_offset(a, x[0], y[0]);
        const double ar = std::fabs(r);
        const double s = (r > 0.0) - (r < 0.0);
        if (a.cost_exponent == 1.0) {
            partials[0] = a.scale * s;
            return a.scale * ar;
        }
        const double pm1 = std::pow(ar, a.cost_exponent - 1.0);
        partials[0] = a.scale * a.cost_exponent * pm1 * s;
        return a.scale * pm1 * ar;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const Axis& a = axes[k];
        const double r = axis_signed_offset(a, x[k], y[k]);
        const double ar = std::fabs(r);
        const double s = (r > 0.0) - (r < 0.0);
        double dk, gk;
        if (a.cost_exponent == 1.0) {
            dk = a.scale * ar;
            gk = a.scale * s;
        } else {
            const double pm1 = std::pow(ar, a.cost_exponent - 1.0);
            dk = a.scale * pm1 * ar;
            gk = a.scale * a.cost_exponent * pm1 * s;
        }
        sum += dk * dk;
        partials[k] = dk * gk;  // divided by the total below
    }
    const double dist = std::sqrt(sum);
    if (dist > 0.0) {
        for (std::size_t k = 0; k < d; ++k) partials[k] /= dist;
    } else {
        for (std::size_t k = 0; k < d; ++k) partials[k] = 0.0;
    }
    return dist;
}

double kernel_distance_and_partials(const std::vector<Axis>& axes, const double* x, const double* y,
                                    double* partials, double radius) {
    constexpr double ridge_fraction = 0.2;
    if (!(radius > 0.0)) return distance_and_partials(axes, x, y, partials);
    for (const auto& a : axes)
        if (a.cost_exponent != 1.0) return distance_and_partials(axes, x, y, partials);
    const std::size_t n = axes.size();
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Axis& a = axes[k];
        const double r = axis_signed_offset(a, x[k], y[k]);
        double dk = a.scale * std::fabs(r);
        double gk = a.scale * ((r > 0.0) - (r < 0.0));
        if (a.kind == CoordinateKind::periodic) {
            // Narrow Huber cap on the ridge at the antipode, where the short arc
            // turns over. A full-cell cap would average out the grid ripple that
            // pins the neutral rotation of periodic equilibria.
            const double half = 0.5 * a.scale * a.extent();
            const double u = half - dk;
            const double rr = ridge_fraction * radius;
            if (u < rr) {
                dk = half - 0.5 * (u * u / rr + rr);
                gk *= u / rr;
            }
        }
        sum += dk * dk;
        partials[k] = dk * gk;
    }
    const double d = std::sqrt(sum);
    if (d >= radius) {
        for (std::size_t k = 0; k < n; ++k) partials[k] /= d;
        return d;
    }
    for (std::size_t k = 0; k < n; ++k) partials[k] /= radius;
    return 0.5 * (d * d / radius + radius);
}

}  // namespace detail

double distance(const Manifold& m, const Point& x, const Point& y) {
    check_dimension(m, x.dimension(), "distance");
    check_dimension(m, y.dimension(), "distance");
    std::vector<double> g(m.dimension());
    return detail::distance_and_partials(m.axes(), x.coords.data(), y.coords.data(), g.data());
}

double geodesic_distance(const Manifold& m, const Point& x, const Point& y) {
    check_dimension(m, x.dimension(), "geodesic_distance");
    check_dimension(m, y.dimension(), "geodesic_distance");
    double s = 0.0;
    for (std::size_t k = 0; k < m.dimension(); ++k) {
        const auto& a = m.axes()[k];
        const double r = a.scale * detail::axis_signed_offset(a, x[k], y[k]);
        s += r * r;
    }
    return std::sqrt(s);
}

TangentVector riemannian_gradient(const Manifold& m, const Point& y,
                                  std::span<const double> partials) {
    check_dimension(m, partials.size(), "riemannian_gradient");
    TangentVector v{y, std::vector<double>(partials.begin(), partials.end())};
    for (std::size_t k = 0; k < m.dimension(); ++k) {
        const double s = m.axes()[k].scale;
        v.components[k] /= s * s;
    }
    return v;
}

TangentVector distance_gradient(const Manifold& m, const Point& x, const Point& y) {
    check_dimension(m, x.dimension(), "distance_gradient");
    check_dimension(m, y.dimension(), "distance_gradient");
    std::vector<double> g(m.dimension());
    detail::distance_and_partials(m.axes(), x.coords.data(), y.coords.data(), g.data());
    return riemannian_gradient(m, y, g);
}

Point retract(const Manifold& m, const Point& y, std::span<const double> v) {
    check_dimension(m, y.dimension(), "retract");
    check_dimension(m, v.size(), "retract");
    Point out = y;
    for (std::size_t k = 0; k < m.dimension(); ++k) {
        const auto& a = m.axes()[k];
        const double t = y[k] + v[k];
        out[k] = a.kind == CoordinateKind::bounded ? std::clamp(t, a.lower, a.upper) : wrap(a, t);
    }
    return out;
}

Point retract(const Manifold& m, const TangentVector& v) {
    return retract(m, v.base, v.components);
}

TangentVector tangent_project(const Manifold& m, const Point& y, std::span<const double> v) {
    check_dimension(m, y.dimension(), "tangent_project");
    if (v.size() != m.ambient_dimension())
        throw InvalidInput("tangent_project: ambient dimension mismatch");
    for (double c : v)
        if (!std::isfinite(c)) throw InvalidInput("tangent_project: non-finite component");
    return TangentVector{y, std::vector<double>(v.begin(), v.end())};
}

double tangent_norm(const Manifold& m, const TangentVector& v) {
    check_dimension(m, v.components.size(), "tangent_norm");
    double s = 0.0;
    for (std::size_t k = 0; k < m.dimension(); ++k) {
        const double c = v.components[k] * m.axes()[k].scale;
        s += c * c;
    }
    return std::sqrt(s);
}

}  // namespace hotelling
