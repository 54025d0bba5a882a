#include "hotelling/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "hotelling/errors.hpp"
#include "hotelling/experiments.hpp"
#include "json.hpp"

namespace hotelling {

namespace {

using json = nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || item.key() == k;
        if (!ok) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

double number(const json& obj, const std::string& where, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + "." + key + ": must be finite");
    return x;
}

double required_number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return number(obj, where, key, 0.0);
}

std::int64_t integer(const json& obj, const std::string& where, const char* key, std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
}

std::size_t count(const json& obj, const std::string& where, const char* key, std::size_t fallback,
                  std::size_t min) {
    const std::int64_t v = integer(obj, where, key, static_cast<std::int64_t>(fallback));
    if (v < static_cast<std::int64_t>(min))
        throw ConfigError(where + "." + key + ": must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

ManifoldSpec parse_manifold(const json& obj, const std::string& where) {
    only_keys(obj, where, {"kind", "alpha", "radius", "dimension", "radii", "factors"});
    ManifoldSpec s;
    if (!obj.contains("kind") || !obj.at("kind").is_string())
        throw ConfigError(where + ": 'kind' must be a string");
    s.kind = obj.at("kind").get<std::string>();

    auto reject = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (obj.contains(k)) throw ConfigError(where + ": key '" + k + "' does not apply to " + s.kind);
    };
    if (s.kind == "segment") {
        reject({"radius", "dimension", "radii", "factors"});
        s.alpha = number(obj, where, "alpha", 1.0);
        if (!(s.alpha >= 1.0)) throw ConfigError(where + ".alpha: must be >= 1");
    } else if (s.kind == "circle") {
        reject({"alpha", "dimension", "radii", "factors"});
        s.radius = number(obj, where, "radius", 1.0);
        if (!(s.radius > 0.0)) throw ConfigError(where + ".radius: must be > 0");
    } else if (s.kind == "hypercube") {
        reject({"alpha", "radius", "radii", "factors"});
        const std::int64_t a = integer(obj, where, "dimension", 2);
        if (a < 2 || a > 64) throw ConfigError(where + ".dimension: must lie in [2, 64]");
        s.dimension = static_cast<int>(a);
    } else if (s.kind == "torus") {
        reject({"alpha", "radius", "dimension", "factors"});
        if (!obj.contains("radii") || !obj.at("radii").is_array() || obj.at("radii").empty())
            throw ConfigError(where + ".radii: expected a non-empty array");
        for (const auto& r : obj.at("radii")) {
            if (!r.is_number()) throw ConfigError(where + ".radii: expected numbers");
            const double v = r.get<double>();
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(where + ".radii: must be > 0");
            s.radii.push_back(v);
        }
    } else if (s.kind == "product") {
        reject({"alpha", "radius", "dimension", "radii"});
        if (!obj.contains("factors") || !obj.at("factors").is_array() || obj.at("factors").size() < 2)
            throw ConfigError(where + ".factors: expected an array of at least two manifolds");
        std::size_t k = 0;
        for (const auto& f : obj.at("factors"))
            s.factors.push_back(parse_manifold(f, where + ".factors[" + std::to_string(k++) + "]"));
    } else {
        throw ConfigError(where + ".kind: unknown manifold '" + s.kind + "'");
    }
    return s;
}

// A learning rate is either a positive number or the string "auto".
void learning_rate(const json& obj, const std::string& where, const char* key, double& value, bool& automatic) {
    automatic = true;
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (v.is_string()) {
        if (v.get<std::string>() != "auto")
            throw ConfigError(where + "." + key + ": expected a number or \"auto\"");
        return;
    }
    automatic = false;
    value = number(obj, where, key, 0.0);
    if (!(value > 0.0)) throw ConfigError(where + "." + key + ": must be > 0");
}

}  // namespace

Manifold ManifoldSpec::build() const {
    if (kind == "segment") return Manifold::segment(alpha);
    if (kind == "circle") return Manifold::circle(radius);
    if (kind == "hypercube") return Manifold::hypercube(dimension);
    if (kind == "torus") return Manifold::torus(radii);
    if (kind == "product") {
        std::vector<Manifold> fs;
        for (const auto& f : factors) fs.push_back(f.build());
        return Manifold::product(fs);
    }
    throw ConfigError("unknown manifold kind '" + kind + "'");
}

MarketConfig RunConfig::resolved_market(const Manifold& m) const {
    MarketConfig cfg = market;
    if (auto_lambda_p || auto_lambda_y) {
        const MarketConfig a = auto_scaled(m, cfg);
        if (auto_lambda_p) cfg.lambda_p = a.lambda_p;
        if (auto_lambda_y) cfg.lambda_y = a.lambda_y;
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_run_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(doc, "config", {"manifold", "market", "dynamics", "quadrature", "output"});
    if (!doc.contains("manifold")) throw ConfigError("config: missing block 'manifold'");
    if (!doc.contains("market")) throw ConfigError("config: missing block 'market'");

    RunConfig rc;
    rc.manifold = parse_manifold(doc.at("manifold"), "manifold");

    const json& mk = doc.at("market");
    only_keys(mk, "market", {"N", "beta", "c"});
    const std::int64_t n = mk.contains("N") ? integer(mk, "market", "N", 0) : 0;
    if (!mk.contains("N")) throw ConfigError("market: missing key 'N'");
    if (n < 2 || n > 1000) throw ConfigError("market.N: must lie in [2, 1000]");
    rc.market.n_firms = static_cast<int>(n);
    rc.market.beta = required_number(mk, "market", "beta");
    if (!(rc.market.beta > 0.0)) throw ConfigError("market.beta: must be > 0");
    rc.market.cost = required_number(mk, "market", "c");
    if (!(rc.market.cost >= 0.0)) throw ConfigError("market.c: must be >= 0");

    const json empty = json::object();
    const json& dy = doc.contains("dynamics") ? doc.at("dynamics") : empty;
    only_keys(dy, "dynamics", {"lambda_p", "lambda_y", "max_iters", "tol", "record_every"});
    learning_rate(dy, "dynamics", "lambda_p", rc.market.lambda_p, rc.auto_lambda_p);
    learning_rate(dy, "dynamics", "lambda_y", rc.market.lambda_y, rc.auto_lambda_y);
    rc.dynamics.max_iters = count(dy, "dynamics", "max_iters", rc.dynamics.max_iters, 1);
    rc.dynamics.tol = number(dy, "dynamics", "tol", rc.dynamics.tol);
    if (!(rc.dynamics.tol > 0.0)) throw ConfigError("dynamics.tol: must be > 0");
    rc.dynamics.record_every = count(dy, "dynamics", "record_every", rc.dynamics.record_every, 1);

    const json& qd = doc.contains("quadrature") ? doc.at("quadrature") : empty;
    only_keys(qd, "quadrature", {"resolution", "seed"});
    rc.market.resolution = count(qd, "quadrature", "resolution", 0, 0);
    if (rc.market.resolution == 1) throw ConfigError("quadrature.resolution: must be 0 (default) or >= 2");
    const std::int64_t seed = integer(qd, "quadrature", "seed", 0);
    if (seed < 0) throw ConfigError("quadrature.seed: must be >= 0");
    rc.market.seed = static_cast<std::uint64_t>(seed);

    const json& out = doc.contains("output") ? doc.at("output") : empty;
    only_keys(out, "output", {"directory", "formats"});
    if (out.contains("directory")) {
        if (!out.at("directory").is_string() || out.at("directory").get<std::string>().empty())
            throw ConfigError("output.directory: expected a non-empty string");
        rc.output_directory = out.at("directory").get<std::string>();
    }
    if (out.contains("formats")) {
        const json& f = out.at("formats");
        if (!f.is_array()) throw ConfigError("output.formats: expected an array");
        rc.write_csv = rc.write_txt = false;
        for (const auto& v : f) {
            const std::string s = v.is_string() ? v.get<std::string>() : "";
            if (s == "csv") rc.write_csv = true;
            else if (s == "txt") rc.write_txt = true;
            else throw ConfigError("output.formats: entries must be \"csv\" or \"txt\"");
        }
    }

    // Surfaces range errors from the manifold constructors as config errors.
    try {
        (void)rc.manifold.build();
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("manifold: ") + e.what());
    }
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

}  // namespace hotelling
