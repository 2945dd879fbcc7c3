#include "eit/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eit/errors.hpp"

namespace eit {

PipelineConfig parse_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    static const std::set<std::string> known = {
        "phantom", "R", "Rtilde", "J", "K", "lambda", "bounds", "eta",  "seed",     "ell",
        "s",       "m", "mesh_level", "basis_N", "rho", "budget", "tv_s_param", "ell_scatter", "deltaR", "stop_thresh"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw ConfigError("unknown config key: " + it.key());
    }

    PipelineConfig c;
    auto get_num = [&](const char* key, double& slot) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
        slot = j[key].get<double>();
    };
    auto get_int = [&](const char* key, int& slot) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
        slot = j[key].get<int>();
    };
    if (j.contains("phantom")) {
        if (!j["phantom"].is_string()) throw ConfigError("phantom must be a string");
        c.phantom = j["phantom"].get<std::string>();
    }
    get_num("R", c.R);
    get_num("Rtilde", c.Rtilde);
    get_int("J", c.J);
    get_int("K", c.K);
    get_num("lambda", c.lambda);
    get_num("eta", c.eta);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) throw ConfigError("seed must be an integer");
        c.seed = j["seed"].get<uint64_t>();
    }
    get_int("ell", c.ell);
    get_num("s", c.s);
    get_int("m", c.m);
    get_int("mesh_level", c.mesh_level);
    get_int("basis_N", c.basis_N);
    get_num("rho", c.rho);
    get_int("budget", c.budget);
    get_num("tv_s_param", c.tv_s_param);
    get_int("ell_scatter", c.ell_scatter);
    if (j.contains("bounds")) {
        const auto& b = j["bounds"];
        if (!b.is_object() || !b.contains("c") || !b.contains("C"))
            throw ConfigError("bounds must be an object with keys c and C");
        c.bounds.c = b["c"].get<double>();
        c.bounds.C = b["C"].get<double>();
    }
    if (j.contains("deltaR")) c.deltaR = j["deltaR"].get<double>();
    if (j.contains("stop_thresh")) c.stop_thresh = j["stop_thresh"].get<double>();

    if (!(c.R > 1.0)) throw ConfigError("R must exceed 1");
    if (!(c.Rtilde > c.R)) throw ConfigError("Rtilde must exceed R");
    if (c.J < 1) throw ConfigError("J must be at least 1");
    if (c.K < 2) throw ConfigError("K must be at least 2");
    if (!(c.lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (c.eta < 0.0) throw ConfigError("eta must be nonnegative");
    if (c.ell < 4) throw ConfigError("ell must be at least 4");
    if (!(c.s > 1.0)) throw ConfigError("s must exceed 1");
    if (!(c.bounds.c > 0.0 && c.bounds.c < 1.0)) throw ConfigError("bounds.c must satisfy 0 < c < 1");
    if (!(c.bounds.C > 1.0)) throw ConfigError("bounds.C must exceed 1");
    if (!(c.rho > 0.0 && c.rho < c.R)) throw ConfigError("rho must satisfy 0 < rho < R");
    if (c.budget < 9) throw ConfigError("budget must be at least 9");
    return c;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const PipelineConfig& c) {
    nlohmann::json j;
    j["phantom"] = c.phantom;
    j["R"] = c.R;
    j["Rtilde"] = c.Rtilde;
    j["J"] = c.J;
    j["K"] = c.K;
    j["lambda"] = c.lambda;
    j["bounds"] = {{"c", c.bounds.c}, {"C", c.bounds.C}};
    j["eta"] = c.eta;
    j["seed"] = c.seed;
    j["ell"] = c.ell;
    j["s"] = c.s;
    j["m"] = c.m;
    j["mesh_level"] = c.mesh_level;
    j["basis_N"] = c.basis_N;
    j["rho"] = c.rho;
    j["budget"] = c.budget;
    j["tv_s_param"] = c.tv_s_param;
    if (c.ell_scatter > 0) j["ell_scatter"] = c.ell_scatter;
    if (c.deltaR) j["deltaR"] = *c.deltaR;
    if (c.stop_thresh) j["stop_thresh"] = *c.stop_thresh;
    return j.dump(2);
}

}  // namespace eit
