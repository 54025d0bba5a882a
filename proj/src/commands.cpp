#include "hotelling/commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "hotelling/equilibrium.hpp"
#include "hotelling/errors.hpp"
#include "hotelling/experiments.hpp"
#include "hotelling/format.hpp"
#include "hotelling/random.hpp"

namespace hotelling {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

double to_real(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError("grid: '" + s + "' is not a number");
    return v;
}

RunConfig load_with_overrides(const GlobalOptions& g) {
    if (g.config_path.empty()) throw ConfigError("--config is required");
    RunConfig rc = load_run_config(g.config_path);
    if (g.seed) rc.market.seed = *g.seed;
    if (g.out) {
        if (g.out->empty()) throw ConfigError("--out must not be empty");
        rc.output_directory = *g.out;
    }
    return rc;
}

std::string output_path(const std::string& dir, const char* name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_config;
    } catch (const UnsupportedCase& e) {
        err << "unsupported: " << e.what() << '\n';
        return exit_config;
    } catch (const DivergenceError& e) {
        err << "diverged: " << e.what() << '\n';
        return exit_numeric;
    } catch (const EstimationError& e) {
        err << "estimation failed: " << e.what() << " (residual " << format_double(e.residual()) << ")\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

std::vector<double> parse_real_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto p = split(text, ':');
        if (p.size() != 3) throw ConfigError("grid: ranges are start:stop:step");
        const double a = to_real(p[0]), b = to_real(p[1]), h = to_real(p[2]);
        if (!(h > 0.0) || b < a) throw ConfigError("grid: need step > 0 and stop >= start");
        const double n = std::floor((b - a) / h + 1e-9);
        if (n > 1e6) throw ConfigError("grid: too many points");
        for (long k = 0; k <= static_cast<long>(n); ++k) out.push_back(a + static_cast<double>(k) * h);
        return out;
    }
    for (const auto& s : split(text, ',')) out.push_back(to_real(s));
    return out;
}

std::vector<int> parse_int_grid(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_real_grid(text)) {
        if (v != std::floor(v) || std::fabs(v) > 1e6) throw ConfigError("grid: expected integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::string trajectory_csv(const Trajectory& traj, const Manifold& m) {
    std::ostringstream os;
    os << "iter,firm";
    for (std::size_t j = 0; j < m.dimension(); ++j) os << ",coord_" << j;
    os << ",price,share,profit\n";
    for (const auto& s : traj.steps)
        for (std::size_t i = 0; i < s.state.size(); ++i) {
            os << s.iteration << ',' << i;
            for (double c : s.state.positions[i].coords) os << ',' << format_double(c);
            os << ',' << format_double(s.state.prices[i]) << ',' << format_double(s.profile.shares[i]) << ','
               << format_double(s.profile.profits[i]) << '\n';
        }
    return os.str();
}

std::string simulation_summary(const RunConfig& rc, const MarketConfig& cfg, const Manifold& m,
                               const Trajectory& traj) {
    const OutcomeLabel label = classify_outcome(traj, m);
    const TrajectoryStep& last = traj.steps.back();
    std::ostringstream os;
    os << "manifold = " << m.name() << '\n'
       << "N = " << cfg.n_firms << '\n'
       << "beta = " << format_double(cfg.beta) << '\n'
       << "c = " << format_double(cfg.cost) << '\n'
       << "lambda_p = " << format_double(cfg.lambda_p) << (rc.auto_lambda_p ? " (auto)" : "") << '\n'
       << "lambda_y = " << format_double(cfg.lambda_y) << (rc.auto_lambda_y ? " (auto)" : "") << '\n'
       << "seed = " << cfg.seed << '\n'
       << "quadrature_nodes = " << (cfg.resolution ? cfg.resolution : default_resolution(m)) << '\n'
       << "termination = " << to_string(traj.reason) << '\n'
       << "iterations = " << traj.iterations << '\n'
       << "outcome = " << to_string(label.kind) << '\n'
       << "max_pairwise_distance = " << format_double(label.max_pairwise_distance) << '\n'
       << "mean_final_price = " << format_double(label.mean_final_price) << '\n'
       << "concentrated_price = " << format_double(concentrated_price(cfg)) << '\n'
       << "welfare = " << format_double(last.profile.welfare) << '\n';
    for (std::size_t i = 0; i < last.state.size(); ++i) {
        os << "firm_" << i << " =";
        for (double c : last.state.positions[i].coords) os << ' ' << format_double(c);
        os << " | price " << format_double(last.state.prices[i]) << " | share "
           << format_double(last.profile.shares[i]) << " | profit " << format_double(last.profile.profits[i])
           << '\n';
    }
    return os.str();
}

int cmd_simulate(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig rc = load_with_overrides(g);
        const Manifold m = rc.manifold.build();
        const MarketConfig cfg = rc.resolved_market(m);
        const QuadratureRule quad = market_quadrature(cfg, m);
        const Trajectory traj = simulate(cfg, m, quad, random_state(cfg, m, cfg.seed), rc.dynamics);

        const std::string summary = simulation_summary(rc, cfg, m, traj);
        if (rc.write_csv)
            write_file_atomic(output_path(rc.output_directory, "trajectory.csv"), trajectory_csv(traj, m));
        if (rc.write_txt) write_file_atomic(output_path(rc.output_directory, "summary.txt"), summary);
        if (!g.quiet) out << summary;
        if (traj.reason == TerminationReason::diverged) {
            err << "diverged: non-finite gradient after " << traj.iterations << " iterations\n";
            return static_cast<int>(exit_numeric);
        }
        return static_cast<int>(exit_ok);
    });
}

int cmd_check(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig rc = load_with_overrides(g);
        const Manifold m = rc.manifold.build();
        CheckOptions co;
        co.seed = rc.market.seed;
        const std::string text = check_nash_concentrated(m, rc.market, co).to_text();
        if (rc.write_txt) write_file_atomic(output_path(rc.output_directory, "report.txt"), text);
        if (!g.quiet) out << text;
        return static_cast<int>(exit_ok);
    });
}

int cmd_phase(const GlobalOptions& g, const PhaseFlags& flags, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig rc = load_with_overrides(g);
        const Manifold m = rc.manifold.build();
        const std::vector<double> betas =
            flags.betas.empty() ? std::vector<double>{rc.market.beta} : parse_real_grid(flags.betas);
        const std::vector<int> ns =
            flags.ns.empty() ? std::vector<int>{rc.market.n_firms} : parse_int_grid(flags.ns);
        if (flags.replicates < 1) throw ConfigError("--replicates must be >= 1");

        PhaseOptions po;
        po.replicates = flags.replicates;
        po.dynamics = rc.dynamics;
        po.auto_lambda_p = rc.auto_lambda_p;
        po.auto_lambda_y = rc.auto_lambda_y;
        const std::string csv = phase_sweep(m, rc.market, betas, ns, po).to_csv();
        if (rc.write_csv) write_file_atomic(output_path(rc.output_directory, "phase.csv"), csv);
        if (!g.quiet) out << csv;
        return static_cast<int>(exit_ok);
    });
}

int cmd_ihat(const GlobalOptions& g, const IhatFlags& flags, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (flags.dimension < 1) throw ConfigError("--dimension must be >= 1");
        const std::uint64_t seed = g.seed.value_or(0);
        const IhatEstimate e = estimate_ihat(flags.dimension, flags.samples, seed);
        std::ostringstream os;
        os << "dimension = " << flags.dimension << '\n'
           << "samples = " << e.samples << '\n'
           << "seed = " << seed << '\n'
           << "ihat = " << format_double(e.estimate) << '\n'
           << "standard_error = " << format_double(e.standard_error) << '\n';
        if (g.out) write_file_atomic(output_path(*g.out, "ihat.txt"), os.str());
        if (!g.quiet) out << os.str();
        return static_cast<int>(exit_ok);
    });
}

}  // namespace hotelling
