#pragma once

#include <string>

#include "flatnf/lattice.hpp"
#include "flatnf/polyalg.hpp"

namespace flatnf {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int schema = 1;
    TorusMetric metric;
    double M = 4;
    double s = 2.0;
    double epsilon = 0.1;
    int r = 1;
    int degree_cap = 8;
    double kappa = 1e-3;
    double delta = 0.25;
    bool gamma_auto = true;   // gamma = epsilon^{1/30}
    double gamma = 0;
    std::uint64_t seed = 1;
    int threads = 0;
    double fprime0 = 1.0;
    int q = 2;
    int samples = 10000;
    double T = 100.0;
    double dt = 0.01;
    std::string out_dir = ".";

    double gamma_value() const {
        return gamma_auto ? std::pow(epsilon, 1.0 / 30.0) : gamma;
    }
    ParamSchedule schedule() const {
        ParamSchedule sc;
        sc.epsilon = epsilon;
        sc.s = s;
        sc.r = r;
        sc.rbar_cap = degree_cap;
        return sc;
    }
};

// Parses and validates the JSON config; unknown keys are rejected with the
// offending field name.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_echo_json(const RunConfig& cfg);  // deterministic echo

}  // namespace flatnf
