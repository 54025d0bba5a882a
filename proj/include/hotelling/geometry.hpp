#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hotelling {

enum class CoordinateKind { bounded, periodic };

enum class ManifoldKind { segment, circle, hypercube, torus, product };

// One parameter-space coordinate. Every supported manifold is flat in its
// parameters, so the metric is diag(scale^2) and each axis carries its own
// 1-D distance: scale * |dx|^alpha on bounded axes, scale * (short arc) on
// periodic ones.
struct Axis {
    CoordinateKind kind = CoordinateKind::bounded;
    double lower = 0.0;
    double upper = 1.0;
    double scale = 1.0;
    double cost_exponent = 1.0;

    double extent() const { return upper - lower; }
};

struct Point {
    std::vector<double> coords;

    Point() = default;
    explicit Point(std::vector<double> c) : coords(std::move(c)) {}
    Point(std::initializer_list<double> c) : coords(c) {}

    std::size_t dimension() const { return coords.size(); }
    double operator[](std::size_t k) const { return coords[k]; }
    double& operator[](std::size_t k) { return coords[k]; }
    bool operator==(const Point&) const = default;
};

// Components are in the coordinate basis of the parameter space.
struct TangentVector {
    Point base;
    std::vector<double> components;
};

class Manifold {
public:
    // [0,1] with transport cost |x - y|^alpha.
    static Manifold segment(double cost_exponent = 1.0);
    // Angle in [0, 2pi), arc length radius * angle.
    static Manifold circle(double radius = 1.0);
    // [0,1]^dimension with the Euclidean distance.
    static Manifold hypercube(int dimension);
    // Flat torus: one circle per radius.
    static Manifold torus(std::vector<double> radii);
    // Riemannian product; squared distance is the sum of factor squared distances.
    static Manifold product(const std::vector<Manifold>& factors);

    ManifoldKind kind() const { return kind_; }
    std::string name() const;
    std::size_t dimension() const { return axes_.size(); }
    std::size_t ambient_dimension() const { return axes_.size(); }
    const std::vector<Axis>& axes() const { return axes_; }

    // Top-level factors of a product; a single-element list holding *this otherwise.
    std::vector<Manifold> factors() const;
    // Axis range [first, first + count) occupied by factor k.
    std::pair<std::size_t, std::size_t> factor_axes(std::size_t k) const;
    std::size_t factor_count() const;

    double total_volume() const;
    double volume_element() const;
    double volume_element(const Point& y) const;
    bool has_boundary() const;
    // Geodesic diameter; cost exponents are ignored.
    double diameter() const;

    bool contains(const Point& y) const;
    // Wraps periodic coordinates into their fundamental interval.
    Point normalize(Point y) const;
    void check_point(const Point& y) const;

private:
    ManifoldKind kind_ = ManifoldKind::segment;
    std::vector<Axis> axes_;
    std::vector<Manifold> factors_;
    std::vector<std::size_t> factor_offsets_;
};

// Transport cost d(x, y), including the segment cost exponent.
double distance(const Manifold& m, const Point& x, const Point& y);

// Arc-length distance with cost exponents forced to 1.
double geodesic_distance(const Manifold& m, const Point& x, const Point& y);

// Riemannian gradient of d(x, .) at y. Zero at x == y; at an exact antipode
// on a periodic axis the clockwise (positive) branch is used.
TangentVector distance_gradient(const Manifold& m, const Point& x, const Point& y);

// Step from y along v, clamping bounded coordinates and wrapping periodic ones.
Point retract(const Manifold& m, const TangentVector& v);
Point retract(const Manifold& m, const Point& y, std::span<const double> v);

// Flat parameterizations make the tangent space the full coordinate space,
// so the projector is the identity; it still validates shapes and finiteness.
TangentVector tangent_project(const Manifold& m, const Point& y, std::span<const double> v);

// Riemannian norm sqrt(v^T g v).
double tangent_norm(const Manifold& m, const TangentVector& v);

// Converts coordinate partial derivatives to the Riemannian gradient g^{-1} df.
TangentVector riemannian_gradient(const Manifold& m, const Point& y,
                                  std::span<const double> partials);

namespace detail {

// Hot-path kernel on raw coordinates. Writes the coordinate partials of
// d(x, .) at y into partials[0..d) and returns d(x, y).
double distance_and_partials(const std::vector<Axis>& axes, const double* x, const double* y,
                             double* partials);

double axis_signed_offset(const Axis& a, double x, double y);

// Quadrature kernel: d(x, y) replaced inside the ball d < radius by its C^1
// Huber extension d^2/(2 radius) + radius/2. For a 1-D midpoint cell of
// half-width radius this is the exact cell average of |x - y|. The kink of
// d at x = y otherwise makes quadrature sums piecewise linear in y, and
// gradient dynamics chatter between nodes. Periodic axes get the same cap on
// the antipodal ridge. Skipped when any cost exponent differs from 1 (those
// kernels are already C^1).
double kernel_distance_and_partials(const std::vector<Axis>& axes, const double* x, const double* y,
                                    double* partials, double radius);

}  // namespace detail

struct QuadratureRule {
    std::size_t dimension = 0;
    std::vector<double> nodes;    // row-major, size() * dimension
    std::vector<double> weights;  // parameter-space weights
    std::vector<double> masses;   // weights times the volume element
    std::size_t resolution = 0;
    // Smoothing radius of the distance kernel (half a cell); 0 disables it.
    double kernel_radius = 0.0;
    bool monte_carlo = false;
    std::uint64_t seed = 0;

    std::size_t size() const { return weights.size(); }
    const double* node(std::size_t k) const { return nodes.data() + k * dimension; }
    Point point(std::size_t k) const;
    double total_mass() const;
};

// Midpoint tensor grids for d <= 2 (resolution nodes per axis); seeded
// uniform samples with equal weights for d >= 3 (resolution samples).
QuadratureRule build_quadrature(const Manifold& m, std::size_t resolution, std::uint64_t seed = 0);

std::size_t default_resolution(const Manifold& m);

enum class Provenance { closed_form, numeric };

// I1 = integral of grad d (x) grad d, I2 = integral of the weak Hessian of d,
// both taken over x at a fixed y and expressed in an orthonormal frame.
struct DistanceIntegrals {
    Eigen::MatrixXd i1;
    Eigen::MatrixXd i2;
    Point evaluation_point;
    Provenance provenance = Provenance::numeric;
    double residual = 0.0;

    bool isotropic(double rel_tol = 1e-9) const;
    // Mean diagonal; equals the scalar value for isotropic matrices.
    double i1_scalar() const;
    double i2_scalar() const;
};

struct IntegralOptions {
    std::size_t resolution = 0;        // 0 picks a fine default per dimension
    std::uint64_t seed = 0;            // Monte Carlo quadrature and ihat
    std::size_t ihat_samples = 1'000'000;
    double tolerance = 1e-2;           // Richardson residual allowed on the numeric path
};

// Closed forms for the segment (any alpha), circle, equal-radius torus and
// the hypercube center; numeric estimates otherwise.
DistanceIntegrals aggregate_distance_integrals(const Manifold& m, const Point& y,
                                               const IntegralOptions& opts = {});

// Always numeric: I1 by quadrature, I2 as the Hessian of the integrated distance
// by Richardson-extrapolated central differences.
DistanceIntegrals numeric_distance_integrals(const Manifold& m, const Point& y,
                                             const IntegralOptions& opts = {});

struct IhatEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

// Monte Carlo mean of (A - 1) / ||x - center|| over the unit hypercube.
IhatEstimate estimate_ihat(int dimension, std::size_t samples, std::uint64_t seed);

}  // namespace hotelling
