#include "flatnf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace flatnf {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw config_error("unknown config field '" + where + it.key() + "'");
    }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw config_error(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config root must be an object");

    reject_unknown(j, {"schema", "metric", "M", "s", "epsilon", "r", "degree_cap", "kappa",
                       "delta", "gamma", "seed", "threads", "fprime0", "q", "samples", "T",
                       "dt", "out_dir"},
                   "");

    RunConfig cfg;
    try {
        if (j.contains("schema")) cfg.schema = j["schema"].get<int>();
        if (cfg.schema != 1) throw config_error("unsupported config field 'schema'");

        if (!j.contains("metric")) throw config_error("missing config field 'metric'");
        const json& jm = j["metric"];
        reject_unknown(jm, {"G", "tau_star", "c_lower"}, "metric.");
        if (!jm.contains("G")) throw config_error("missing config field 'metric.G'");
        auto rows = jm["G"].get<std::vector<std::vector<double>>>();
        cfg.metric.dim = int(rows.size());
        for (auto& row : rows) {
            if (int(row.size()) != cfg.metric.dim)
                throw config_error("config field 'metric.G' must be square");
            cfg.metric.G.insert(cfg.metric.G.end(), row.begin(), row.end());
        }
        cfg.metric.tau_star = jm.value("tau_star", 4.0);
        cfg.metric.c_lower = jm.value("c_lower", 0.0);
        cfg.metric.validate();

        cfg.M = j.value("M", cfg.M);
        cfg.s = j.value("s", cfg.s);
        cfg.epsilon = j.value("epsilon", cfg.epsilon);
        cfg.r = j.value("r", cfg.r);
        cfg.degree_cap = j.value("degree_cap", cfg.degree_cap);
        cfg.kappa = j.value("kappa", cfg.kappa);
        cfg.delta = j.value("delta", cfg.delta);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.threads = j.value("threads", cfg.threads);
        cfg.fprime0 = j.value("fprime0", cfg.fprime0);
        cfg.q = j.value("q", cfg.q);
        cfg.samples = j.value("samples", cfg.samples);
        cfg.T = j.value("T", cfg.T);
        cfg.dt = j.value("dt", cfg.dt);
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
        if (j.contains("gamma")) {
            if (j["gamma"].is_string()) {
                if (j["gamma"].get<std::string>() != "auto")
                    throw config_error("config field 'gamma' must be a number or \"auto\"");
                cfg.gamma_auto = true;
            } else {
                cfg.gamma_auto = false;
                cfg.gamma = j["gamma"].get<double>();
            }
        }
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        throw config_error(std::string("invalid config value: ") + e.what());
    }

    if (!(cfg.M >= 1)) throw config_error("config field 'M' must be >= 1");
    if (!(cfg.s > 0)) throw config_error("config field 's' must be > 0");
    if (!(cfg.epsilon > 0 && cfg.epsilon < 1))
        throw config_error("config field 'epsilon' must lie in (0,1)");
    if (cfg.r < 1) throw config_error("config field 'r' must be >= 1");
    if (cfg.degree_cap < 4 || cfg.degree_cap % 2 != 0)
        throw config_error("config field 'degree_cap' must be an even integer >= 4");
    if (!(cfg.kappa > 0)) throw config_error("config field 'kappa' must be > 0");
    if (!(cfg.delta > 0 && cfg.delta < 1))
        throw config_error("config field 'delta' must lie in (0,1)");
    if (!cfg.gamma_auto && !(cfg.gamma > 0 && cfg.gamma < 1))
        throw config_error("config field 'gamma' must lie in (0,1)");
    if (cfg.q < 1) throw config_error("config field 'q' must be >= 1");
    if (cfg.samples < 1) throw config_error("config field 'samples' must be >= 1");
    if (!(cfg.dt > 0)) throw config_error("config field 'dt' must be > 0");
    if (!(cfg.T > 0)) throw config_error("config field 'T' must be > 0");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_echo_json(const RunConfig& cfg) {
    json jm;
    std::vector<std::vector<double>> rows(std::size_t(cfg.metric.dim));
    for (int i = 0; i < cfg.metric.dim; ++i)
        for (int k = 0; k < cfg.metric.dim; ++k)
            rows[std::size_t(i)].push_back(cfg.metric.at(i, k));
    jm["G"] = rows;
    jm["tau_star"] = cfg.metric.tau_star;
    jm["c_lower"] = cfg.metric.c_lower;

    json j;
    j["schema"] = cfg.schema;
    j["metric"] = jm;
    j["M"] = cfg.M;
    j["s"] = cfg.s;
    j["epsilon"] = cfg.epsilon;
    j["r"] = cfg.r;
    j["degree_cap"] = cfg.degree_cap;
    j["kappa"] = cfg.kappa;
    j["delta"] = cfg.delta;
    if (cfg.gamma_auto)
        j["gamma"] = "auto";
    else
        j["gamma"] = cfg.gamma;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["fprime0"] = cfg.fprime0;
    j["q"] = cfg.q;
    j["samples"] = cfg.samples;
    j["T"] = cfg.T;
    j["dt"] = cfg.dt;
    j["out_dir"] = cfg.out_dir;
    return j.dump();
}

}  // namespace flatnf
