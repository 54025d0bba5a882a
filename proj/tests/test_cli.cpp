#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "hotelling/commands.hpp"
#include "hotelling/config.hpp"
#include "hotelling/errors.hpp"

using namespace hotelling;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "hotelling_cli_XXXXXX").string();
        path = mkdtemp(tmpl.data());
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path operator/(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Value of a "key = value" line.
std::string field(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
    return {};
}

const char* segment_config = R"({
  "manifold": {"kind": "segment"},
  "market": {"N": 3, "beta": 1, "c": 0.2},
  "dynamics": {"record_every": 10},
  "quadrature": {"seed": 7}
})";

GlobalOptions options(const fs::path& config, const fs::path& out) {
    GlobalOptions g;
    g.config_path = config.string();
    g.out = out.string();
    g.quiet = true;
    return g;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(HOTELLING_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config defaults") {
    const RunConfig rc = parse_run_config(R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0}})");
    CHECK(rc.manifold.kind == "segment");
    CHECK(rc.market.n_firms == 2);
    CHECK(rc.auto_lambda_p);
    CHECK(rc.auto_lambda_y);
    CHECK(rc.dynamics.max_iters == DynamicsOptions{}.max_iters);
    CHECK(rc.market.seed == 0);
    CHECK(rc.market.resolution == 0);
    CHECK(rc.output_directory == "out");
    CHECK(rc.write_csv);
    CHECK(rc.write_txt);
}

TEST_CASE("config with every block") {
    const RunConfig rc = parse_run_config(R"({
      "manifold": {"kind": "product", "factors": [{"kind": "circle", "radius": 2}, {"kind": "segment"}]},
      "market": {"N": 4, "beta": 1.5, "c": 0.2},
      "dynamics": {"lambda_p": 0.5, "lambda_y": "auto", "max_iters": 100, "tol": 1e-7, "record_every": 5},
      "quadrature": {"resolution": 32, "seed": 9},
      "output": {"directory": "runs/a", "formats": ["txt"]}
    })");
    CHECK(rc.manifold.build().dimension() == 2);
    CHECK_FALSE(rc.auto_lambda_p);
    CHECK(rc.market.lambda_p == 0.5);
    CHECK(rc.auto_lambda_y);
    CHECK(rc.dynamics.max_iters == 100);
    CHECK(rc.dynamics.tol == 1e-7);
    CHECK(rc.dynamics.record_every == 5);
    CHECK(rc.market.resolution == 32);
    CHECK(rc.market.seed == 9);
    CHECK(rc.output_directory == "runs/a");
    CHECK_FALSE(rc.write_csv);
    CHECK(rc.write_txt);
    const MarketConfig m = rc.resolved_market(rc.manifold.build());
    CHECK(m.lambda_p == 0.5);
    CHECK(m.lambda_y > 0.0);
}

TEST_CASE("strict config parsing") {
    const char* bad[] = {
        "{not json",
        R"([1, 2])",
        R"({"manifold": {"kind": "segment"}})",
        R"({"market": {"N": 2, "beta": 1, "c": 0}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0}, "extra": 1})",
        R"({"manifold": {"kind": "segment", "colour": 1}, "market": {"N": 2, "beta": 1, "c": 0}})",
        R"({"manifold": {"kind": "segment", "radius": 2}, "market": {"N": 2, "beta": 1, "c": 0}})",
        R"({"manifold": {"kind": "sphere"}, "market": {"N": 2, "beta": 1, "c": 0}})",
        R"({"manifold": {"kind": "segment", "alpha": 0.5}, "market": {"N": 2, "beta": 1, "c": 0}})",
        R"({"manifold": {"kind": "hypercube", "dimension": 1}, "market": {"N": 2, "beta": 1, "c": 0}})",
        R"({"manifold": {"kind": "torus", "radii": []}, "market": {"N": 2, "beta": 1, "c": 0}})",
        R"({"manifold": {"kind": "product", "factors": [{"kind": "segment"}]}, "market": {"N": 2, "beta": 1, "c": 0}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 1, "beta": 1, "c": 0}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2.5, "beta": 1, "c": 0}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 0, "c": 0}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "c": 0}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": -1}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0, "gamma": 1}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0}, "dynamics": {"lambda_p": "fast"}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0}, "dynamics": {"lambda_y": -1}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0}, "dynamics": {"max_iters": 0}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0}, "dynamics": {"tol": 0}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0}, "quadrature": {"seed": -1}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0}, "quadrature": {"resolution": 1}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0}, "output": {"formats": ["png"]}})",
        R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0}, "output": {"directory": ""}})",
    };
    for (const char* text : bad) {
        CAPTURE(text);
        CHECK_THROWS_AS(parse_run_config(text), ConfigError);
    }
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("grid parsing") {
    CHECK(parse_real_grid("1,2.5,4") == std::vector<double>{1, 2.5, 4});
    CHECK(parse_real_grid("1:3:0.5") == std::vector<double>{1, 1.5, 2, 2.5, 3});
    CHECK(parse_real_grid("0.1:0.3:0.1").size() == 3);
    CHECK(parse_int_grid("3:5:1") == std::vector<int>{3, 4, 5});
    CHECK(parse_int_grid("2, 7") == std::vector<int>{2, 7});
    for (const char* bad : {"", "a", "1,,2", "1:2", "2:1:1", "1:2:0", "1:2:-1"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_real_grid(bad), ConfigError);
    }
    CHECK_THROWS_AS(parse_int_grid("1.5"), ConfigError);
}

TEST_CASE("simulate writes a converged segment run") {
    TempDir dir;
    write(dir / "c.json", segment_config);
    std::ostringstream out, err;
    REQUIRE(cmd_simulate(options(dir / "c.json", dir / "run"), out, err) == exit_ok);
    CHECK(out.str().empty());
    const std::string summary = slurp(dir / "run" / "summary.txt");
    CHECK(field(summary, "termination") == "converged");
    CHECK(field(summary, "outcome") == "concentrated");
    CHECK(field(summary, "seed") == "7");
    CHECK(std::fabs(std::stod(field(summary, "mean_final_price")) - 1.7) <= 1e-3);
    CHECK(field(summary, "lambda_p").find("(auto)") != std::string::npos);

    const std::string csv = slurp(dir / "run" / "trajectory.csv");
    CHECK(csv.rfind("iter,firm,coord_0,price,share,profit\n", 0) == 0);
    CHECK(csv.find("\n0,2,") != std::string::npos);

    // Echoed to stdout when not quiet.
    GlobalOptions loud = options(dir / "c.json", dir / "run2");
    loud.quiet = false;
    std::ostringstream out2;
    REQUIRE(cmd_simulate(loud, out2, err) == exit_ok);
    CHECK(out2.str() == summary);
}

TEST_CASE("malformed config exits 2 and writes nothing") {
    TempDir dir;
    write(dir / "bad.json", R"({"manifold": {"kind": "segment"}, "market": {"N": 3, "beta": 1, "c": 0.2, "typo": 1}})");
    std::ostringstream out, err;
    CHECK(cmd_simulate(options(dir / "bad.json", dir / "run"), out, err) == exit_config);
    CHECK(err.str().find("typo") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "run"));
    CHECK(cmd_check(options(dir / "bad.json", dir / "run"), out, err) == exit_config);
    CHECK(cmd_phase(options(dir / "missing.json", dir / "run"), PhaseFlags{}, out, err) == exit_config);
    CHECK_FALSE(fs::exists(dir / "run"));

    GlobalOptions none;
    CHECK(cmd_simulate(none, out, err) == exit_config);
}

TEST_CASE("divergence exits 3") {
    TempDir dir;
    write(dir / "c.json", R"({"manifold": {"kind": "segment"}, "market": {"N": 3, "beta": 1, "c": 0.2},
                              "dynamics": {"lambda_p": 1e308, "lambda_y": 0.1}})");
    std::ostringstream out, err;
    CHECK(cmd_simulate(options(dir / "c.json", dir / "run"), out, err) == exit_numeric);
    CHECK(field(slurp(dir / "run" / "summary.txt"), "termination") == "diverged");
}

TEST_CASE("output formats select the files") {
    TempDir dir;
    write(dir / "c.json", R"({"manifold": {"kind": "segment"}, "market": {"N": 2, "beta": 1, "c": 0.2},
                              "output": {"formats": ["txt"]}})");
    std::ostringstream out, err;
    REQUIRE(cmd_simulate(options(dir / "c.json", dir / "run"), out, err) == exit_ok);
    CHECK(fs::exists(dir / "run" / "summary.txt"));
    CHECK_FALSE(fs::exists(dir / "run" / "trajectory.csv"));
}

TEST_CASE("seed override") {
    TempDir dir;
    write(dir / "c.json", segment_config);
    std::ostringstream out, err;
    GlobalOptions g = options(dir / "c.json", dir / "a");
    g.seed = 123;
    REQUIRE(cmd_simulate(g, out, err) == exit_ok);
    const std::string a = slurp(dir / "a" / "trajectory.csv");
    CHECK(field(slurp(dir / "a" / "summary.txt"), "seed") == "123");
    REQUIRE(cmd_simulate(options(dir / "c.json", dir / "b"), out, err) == exit_ok);
    CHECK(a != slurp(dir / "b" / "trajectory.csv"));
}

TEST_CASE("check reports") {
    TempDir dir;
    write(dir / "seg.json", segment_config);
    std::ostringstream out, err;
    REQUIRE(cmd_check(options(dir / "seg.json", dir / "seg"), out, err) == exit_ok);
    const std::string seg = slurp(dir / "seg" / "report.txt");
    CHECK(field(seg, "beta_threshold") == "6");
    CHECK(field(seg, "beta_reach") == "4");
    CHECK(field(seg, "is_nash_candidate") == "true");

    write(dir / "torus.json", R"({"manifold": {"kind": "torus", "radii": [1, 1]}, "market": {"N": 4, "beta": 1, "c": 0.2}})");
    REQUIRE(cmd_check(options(dir / "torus.json", dir / "torus"), out, err) == exit_ok);
    const std::string torus = slurp(dir / "torus" / "report.txt");
    CHECK(field(torus, "is_nash_candidate") == "false");
    CHECK(torus.find("no boundary") != std::string::npos);
}

TEST_CASE("phase writes one row per cell") {
    TempDir dir;
    write(dir / "c.json", segment_config);
    std::ostringstream out, err;
    PhaseFlags f;
    f.betas = "1";
    f.ns = "3,4,5";
    f.replicates = 2;
    REQUIRE(cmd_phase(options(dir / "c.json", dir / "p"), f, out, err) == exit_ok);
    std::istringstream in(slurp(dir / "p" / "phase.csv"));
    std::vector<std::string> rows;
    for (std::string l; std::getline(in, l);) rows.push_back(l);
    REQUIRE(rows.size() == 4);
    CHECK(rows[1] == "1,3,1,2,0,6,4");
    CHECK(rows[2] == "1,4,1,2,0,4,3");
    const std::string last = rows[3];
    const double thr = std::stod(last.substr(last.find(",0,") + 3));
    CHECK(thr == doctest::Approx(10.0 / 3));

    // With no grid flags the single cell comes from the config.
    REQUIRE(cmd_phase(options(dir / "c.json", dir / "q"), PhaseFlags{.replicates = 1}, out, err) == exit_ok);
    CHECK(slurp(dir / "q" / "phase.csv") ==
          "beta,N,fraction_concentrated,replicates,diverged,predicted_threshold,reach_threshold\n1,3,1,1,0,6,4\n");

    f.replicates = 0;
    CHECK(cmd_phase(options(dir / "c.json", dir / "r"), f, out, err) == exit_config);
    f.replicates = 1;
    f.betas = "1:0:1";
    CHECK(cmd_phase(options(dir / "c.json", dir / "r"), f, out, err) == exit_config);
}

TEST_CASE("ihat command") {
    TempDir dir;
    std::ostringstream out, err;
    GlobalOptions g;
    IhatFlags f;
    f.samples = 100'000;
    REQUIRE(cmd_ihat(g, f, out, err) == exit_ok);
    CHECK(std::fabs(std::stod(field(out.str(), "ihat")) - 3.5255) <= 0.05);
    CHECK(field(out.str(), "seed") == "0");

    g.out = (dir / "ih").string();
    g.quiet = true;
    g.seed = 5;
    std::ostringstream quiet;
    REQUIRE(cmd_ihat(g, f, quiet, err) == exit_ok);
    CHECK(quiet.str().empty());
    const std::string text = slurp(dir / "ih" / "ihat.txt");
    CHECK(field(text, "seed") == "5");
    CHECK(field(text, "samples") == "100000");
    CHECK(text != out.str());

    f.dimension = 0;
    CHECK(cmd_ihat(g, f, out, err) == exit_config);
}

TEST_CASE("identical inputs give byte-identical outputs") {
    TempDir dir;
    write(dir / "c.json", segment_config);
    std::ostringstream out, err;
    PhaseFlags f;
    f.betas = "1,8";
    f.ns = "3";
    f.replicates = 2;
    IhatFlags ih;
    ih.samples = 10'000;
    for (const char* run : {"a", "b"}) {
        const GlobalOptions g = options(dir / "c.json", dir / run);
        REQUIRE(cmd_simulate(g, out, err) == exit_ok);
        REQUIRE(cmd_check(g, out, err) == exit_ok);
        REQUIRE(cmd_phase(g, f, out, err) == exit_ok);
        REQUIRE(cmd_ihat(g, ih, out, err) == exit_ok);
    }
    for (const char* name : {"trajectory.csv", "summary.txt", "report.txt", "phase.csv", "ihat.txt"}) {
        CAPTURE(name);
        const std::string a = slurp(dir / "a" / name);
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(dir / "b" / name));
    }
}

TEST_CASE("binary exit codes") {
    TempDir dir;
    write(dir / "c.json", segment_config);
    const std::string cfg = (dir / "c.json").string(), out = (dir / "o").string();
    CHECK(run_binary("") == exit_config);
    CHECK(run_binary("frobnicate") == exit_config);
    CHECK(run_binary("ihat --bogus") == exit_config);
    CHECK(run_binary("ihat -A 2 --samples 10000 --quiet") == exit_ok);
    CHECK(run_binary("ihat -A 2 --samples 1000 --quiet") == exit_config);
    CHECK(run_binary("check --config " + cfg + " --out " + out + " --quiet") == exit_ok);
    CHECK(fs::exists(dir / "o" / "report.txt"));
    CHECK(run_binary("--config " + cfg + " --seed 3 --out " + out + " simulate") == exit_ok);
    CHECK(field(slurp(dir / "o" / "summary.txt"), "seed") == "3");
    CHECK(run_binary("simulate --config " + (dir / "missing.json").string()) == exit_config);
    CHECK(run_binary("--help") == exit_ok);
}
