#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hotelling/config.hpp"
#include "hotelling/dynamics.hpp"

namespace hotelling {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numeric = 3 };

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;  // overrides quadrature.seed
    std::optional<std::string> out;     // overrides output.directory
    bool quiet = false;
};

struct PhaseFlags {
    std::string betas;  // "1,2,3" or "start:stop:step"; empty uses market.beta
    std::string ns;     // "3,4,5" or "start:stop:step"; empty uses market.N
    int replicates = 8;
};

struct IhatFlags {
    int dimension = 2;
    std::size_t samples = 1'000'000;
};

// Grid strings: comma lists or inclusive start:stop:step ranges.
std::vector<double> parse_real_grid(const std::string& text);
std::vector<int> parse_int_grid(const std::string& text);

// Trajectory rows: iter, firm, coord_0 .. coord_{d-1}, price, share, profit.
std::string trajectory_csv(const Trajectory& traj, const Manifold& m);
std::string simulation_summary(const RunConfig& rc, const MarketConfig& cfg, const Manifold& m,
                               const Trajectory& traj);

// Each returns an ExitCode; messages go to err, results to out unless quiet.
int cmd_simulate(const GlobalOptions& g, std::ostream& out, std::ostream& err);
int cmd_check(const GlobalOptions& g, std::ostream& out, std::ostream& err);
int cmd_phase(const GlobalOptions& g, const PhaseFlags& flags, std::ostream& out, std::ostream& err);
// Needs no config; writes ihat.txt only when an output directory is given.
int cmd_ihat(const GlobalOptions& g, const IhatFlags& flags, std::ostream& out, std::ostream& err);

}  // namespace hotelling
