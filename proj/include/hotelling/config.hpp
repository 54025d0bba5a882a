#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hotelling/dynamics.hpp"
#include "hotelling/geometry.hpp"
#include "hotelling/market.hpp"

namespace hotelling {

struct ManifoldSpec {
    std::string kind = "segment";  // segment | circle | hypercube | torus | product
    double alpha = 1.0;            // segment cost exponent
    double radius = 1.0;           // circle
    int dimension = 2;             // hypercube
    std::vector<double> radii;     // torus
    std::vector<ManifoldSpec> factors;

    Manifold build() const;
};

struct RunConfig {
    ManifoldSpec manifold;
    MarketConfig market;  // n_firms, beta, cost, seed, resolution, lambdas (when fixed)
    bool auto_lambda_p = false;
    bool auto_lambda_y = false;
    DynamicsOptions dynamics;
    std::string output_directory = "out";
    bool write_csv = true;
    bool write_txt = true;

    // Manifold plus market config with "auto" learning rates resolved.
    MarketConfig resolved_market(const Manifold& m) const;
};

// JSON document with blocks manifold, market (required) and dynamics,
// quadrature, output (optional). Unknown keys anywhere throw ConfigError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace hotelling
