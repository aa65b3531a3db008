#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flatnf/clusters.hpp"
#include "flatnf/config.hpp"
#include "flatnf/measure.hpp"
#include "flatnf/normalform.hpp"
#include "flatnf/selftest.hpp"
#include "flatnf/simulator.hpp"

using json = nlohmann::json;
using namespace flatnf;

namespace {

json base_manifest(const RunConfig& cfg, bool timestamp) {
    json j;
    j["config"] = json::parse(config_echo_json(cfg));
    j["seed"] = cfg.seed;
    if (timestamp) {
        auto now = std::chrono::system_clock::now().time_since_epoch();
        j["generated_at_unix_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    }
    return j;
}

void write_output(const json& j, const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    std::filesystem::path path = std::filesystem::path(out_dir) / name;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    std::cout << "wrote " << path.string() << "\n";
}

int cmd_admissibility(const RunConfig& cfg, bool timestamp) {
    AdmissibilityReport rep = admissibility_scan(cfg.metric, cfg.M);
    json j = base_manifest(cfg, timestamp);
    j["min_value"] = rep.min_value;
    j["argmin_a"] = rep.argmin_a;
    j["argmin_b"] = rep.argmin_b;
    j["M"] = rep.M;
    j["tau_star"] = rep.tau_star;
    j["zero_hit_count"] = rep.zero_hit_count;
    j["zero_hits_truncated"] = rep.zero_hits_truncated;
    json hits = json::array();
    for (auto& [a, b] : rep.zero_hits) hits.push_back({{"a", a}, {"b", b}});
    j["zero_hits"] = hits;
    j["note"] = "empirical finite-range scan; not a proof of admissibility";
    write_output(j, cfg.out_dir, "admissibility.json");
    return 0;
}

int cmd_resonances(const RunConfig& cfg, bool timestamp) {
    auto ball = LatticeBall::make(cfg.metric.dim, cfg.M);
    json j = base_manifest(cfg, timestamp);
    if (cfg.q == 2) {
        QuartetScan scan = scan_quartets(cfg.metric, *ball, cfg.kappa);
        j["count"] = scan.total;
        j["nontrivial"] = scan.nontrivial;
        j["min_nonzero_omega"] = scan.min_nonzero_abs_omega;
        j["nontrivial_resonant_count"] = scan.nontrivial_below_threshold;
        j["max_identity_residual"] = scan.max_identity_residual;
        // explicit list only when small
        if (scan.nontrivial_below_threshold <= 200) {
            json list = json::array();
            for (auto& v : enumerate_multivectors(2, *ball)) {
                FourWave fw = four_wave_check(cfg.metric, v);
                if (!fw.trivial && std::abs(fw.omega) <= cfg.kappa) {
                    json e;
                    e["tuple"] = v.flat;
                    e["omega"] = fw.omega;
                    list.push_back(e);
                }
            }
            j["nontrivial_resonant"] = list;
        }
    } else {
        auto vs = enumerate_multivectors(cfg.q, *ball);
        std::uint64_t below = 0;
        double minnz = std::numeric_limits<double>::infinity();
        for (auto& v : vs) {
            double om = std::abs(resonance_value(cfg.metric, v));
            if (om <= cfg.kappa) ++below;
            if (om > 0) minnz = std::min(minnz, om);
        }
        j["count"] = vs.size();
        j["min_nonzero_omega"] = std::isfinite(minnz) ? minnz : 0.0;
        j["resonant_count"] = below;
    }
    j["kappa"] = cfg.kappa;
    write_output(j, cfg.out_dir, "resonances.json");
    return 0;
}

int cmd_clusters(const RunConfig& cfg, bool timestamp) {
    auto ball = LatticeBall::make(cfg.metric.dim, cfg.M);
    ClusterPartition part = build_partition(cfg.metric, ball, cfg.delta);
    PartitionReport rep = verify_partition(part, cfg.metric);
    json j = base_manifest(cfg, timestamp);
    j["delta"] = cfg.delta;
    j["class_count"] = part.classes.size();
    j["bounded_class"] = part.bounded_class;
    j["dyadic_ok"] = rep.dyadic_ok;
    j["separation_ok"] = rep.separation_ok;
    j["worst_margin"] = rep.worst_margin;
    json classes = json::array();
    for (std::size_t c = 0; c < part.classes.size(); ++c) {
        json e;
        e["m"] = part.m_of[c];
        json members = json::array();
        for (int i : part.classes[c]) {
            auto s = ball->site(i);
            members.push_back(std::vector<int>(s.begin(), s.end()));
        }
        e["sites"] = members;
        classes.push_back(e);
    }
    j["classes"] = classes;
    write_output(j, cfg.out_dir, "clusters.json");
    return 0;
}

int cmd_normal_form(const RunConfig& cfg, int alpha_max, int steps, bool timestamp) {
    auto ball = LatticeBall::make(cfg.metric.dim, cfg.M);
    ParamSchedule sched = cfg.schedule();
    const int ns = ball->site_count();

    // xi drawn from one ellipsoid sample
    auto sample = sample_ball(ball, cfg.s, cfg.epsilon, 1, cfg.seed).front();
    std::vector<double> xi(std::size_t(ns), 0.0);
    for (int i = 0; i < ns; ++i) xi[std::size_t(i)] = std::norm(sample.amps[std::size_t(i)]);

    CounterRng rng(cfg.seed);
    std::vector<HomogeneousPoly> extras;
    {
        // seed tail: kappa-filtered constant sextic on the ball
        HomogeneousPoly p6 = HomogeneousPoly::constant_on(3, *ball, cfg.epsilon, 2e6);
        extras.push_back(kappa_filter(p6, cfg.metric, cfg.kappa));
    }

    NormalFormState st = init_normal_form(cfg.metric, ball, sched, xi, cfg.fprime0, extras);
    WeightSystem ws{sched};

    json steps_log = json::array();
    for (int a = 0; a <= alpha_max; ++a) {
        for (int jstep = 0; jstep < steps; ++jstep) {
            LieStepReport rep;
            st = lie_step(st, 6, cfg.degree_cap, &rep);
            json e;
            e["alpha"] = a;
            e["j"] = jstep;
            e["h"] = rep.h_value;
            e["ysup_lambda_before"] = rep.ysup_lambda_before;
            e["ysup_lambda_after"] = rep.ysup_lambda_after;
            e["ysup_Q"] = rep.ysup_Q_after;
            e["max_freq_shift"] = rep.max_freq_shift;
            steps_log.push_back(e);
        }
        ScaleAdvanceReport srep;
        st = scale_advance(st, &srep);
        json e;
        e["alpha_advanced_to"] = st.alpha;
        e["moved_ysup"] = srep.moved_ysup;
        e["freq_drift"] = srep.freq_drift;
        e["freq_drift_budget"] = srep.freq_drift_budget;
        steps_log.push_back(e);
    }

    json j = base_manifest(cfg, timestamp);
    j["steps"] = steps_log;
    json rem = json::array();
    for (auto& entry : st.remainder_log) {
        json e;
        e["kind"] = entry.kind;
        e["degree"] = entry.degree;
        e["ysup"] = entry.ysup;
        e["zsup"] = entry.zsup;
        rem.push_back(e);
    }
    j["remainder_ledger"] = rem;
    j["quartic_anomaly"] = st.quartic_anomaly;
    j["resonance_budget"] = st.resonance_budget;
    write_output(j, cfg.out_dir, "normal_form.json");
    return 0;
}

int cmd_simulate(const RunConfig& cfg, bool timestamp) {
    auto ball = LatticeBall::make(cfg.metric.dim, cfg.M);
    HloSystem sys = build_hlo(cfg.metric, ball, cfg.fprime0);
    auto u0 = sample_ball(ball, cfg.s, cfg.epsilon, 1, cfg.seed).front();
    ClusterPartition part = build_partition(cfg.metric, ball, cfg.delta);
    IntegrateOptions opt;
    opt.dt = cfg.dt;
    opt.s = cfg.s;
    opt.partition = &part;
    opt.stride = std::max(1, int(std::llround(cfg.T / cfg.dt)) / 500);
    ObservableSeries series = integrate(sys, u0, cfg.T, opt);

    std::filesystem::create_directories(cfg.out_dir);
    std::filesystem::path csv_path = std::filesystem::path(cfg.out_dir) / "series.csv";
    {
        std::ofstream csv(csv_path);
        csv.precision(17);
        csv << "t,mass,energy,hs_norm,action_dev,superaction_dev,recentered_sum\n";
        for (auto& row : series.rows)
            csv << row.t << "," << row.mass << "," << row.energy << "," << row.hs_norm << ","
                << row.action_dev << "," << row.superaction_dev << "," << row.recentered_sum
                << "\n";
    }
    std::cout << "wrote " << csv_path.string() << "\n";

    json j = base_manifest(cfg, timestamp);
    j["rows"] = series.rows.size();
    j["fp_iterations_max"] = series.fp_iterations_max;
    double m0 = series.rows.front().mass, e0 = series.rows.front().energy;
    double dm = 0, de = 0;
    for (auto& row : series.rows) {
        dm = std::max(dm, std::abs(row.mass - m0) / std::max(m0, 1e-300));
        de = std::max(de, std::abs(row.energy - e0) / std::max(std::abs(e0), 1e-300));
    }
    j["mass_drift_rel"] = dm;
    j["energy_drift_rel"] = de;
    j["series_csv"] = "series.csv";
    write_output(j, cfg.out_dir, "simulate.json");
    return 0;
}

int cmd_measure(const RunConfig& cfg, bool timestamp) {
    auto ball = LatticeBall::make(cfg.metric.dim, cfg.M);
    NonResonanceSpec spec;
    spec.gamma = cfg.gamma_value();
    spec.epsilon = cfg.epsilon;
    spec.s = cfg.s;
    spec.degree_cap = std::min(cfg.degree_cap, 6);
    FractionReport rep =
        nonresonant_fraction(cfg.metric, ball, cfg.s, cfg.epsilon, spec, cfg.samples,
                             cfg.seed, default_modulation(cfg.metric, *ball));
    json j = base_manifest(cfg, timestamp);
    j["fraction"] = rep.fraction;
    j["wilson_lo"] = rep.wilson_lo;
    j["wilson_hi"] = rep.wilson_hi;
    j["paper_bound"] = rep.paper_bound;
    j["bound_vacuous"] = rep.bound_vacuous;
    j["gamma"] = spec.gamma;
    j["samples"] = rep.samples;
    j["passes"] = rep.passes;
    write_output(j, cfg.out_dir, "measure.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flatnf: resonance, normal-form and stability toolkit on flat tori"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    std::uint64_t seed_override = 0;
    bool have_seed = false, no_timestamp = false;
    int alpha_max = 1, steps = 3;

    app.add_option("--threads", threads, "worker threads (0 = default)");
    app.add_flag("--no-timestamp", no_timestamp, "omit the timestamp field");

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* opt = sub->add_option("--config", config_path, "JSON config path");
        if (need_config) opt->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed_override, "seed override")
            ->each([&](const std::string&) { have_seed = true; });
    };

    auto* sub_adm = app.add_subcommand("admissibility", "empirical Diophantine scan");
    add_common(sub_adm, true);
    double m_override = 0;
    sub_adm->add_option("--M", m_override, "scan radius override");

    auto* sub_res = app.add_subcommand("resonances", "zero-momentum resonance scan");
    add_common(sub_res, true);
    int q_override = 0;
    double kappa_override = 0;
    sub_res->add_option("--q", q_override, "half-degree");
    sub_res->add_option("--kappa", kappa_override, "resonance threshold");

    auto* sub_clu = app.add_subcommand("clusters", "frequency cluster partition");
    add_common(sub_clu, true);
    double m_clu = 0, delta_override = 0;
    sub_clu->add_option("--M", m_clu, "ball radius override");
    sub_clu->add_option("--delta", delta_override, "separation exponent");

    auto* sub_nf = app.add_subcommand("normal-form", "two-scale normal form iteration");
    add_common(sub_nf, true);
    sub_nf->add_option("--alpha-max", alpha_max, "scales to advance");
    sub_nf->add_option("--steps", steps, "homogeneity steps per scale");

    auto* sub_sim = app.add_subcommand("simulate", "symplectic integration");
    add_common(sub_sim, true);

    auto* sub_mea = app.add_subcommand("measure", "non-resonant measure estimate");
    add_common(sub_mea, true);
    int samples_override = 0;
    std::string gamma_str;
    sub_mea->add_option("--samples", samples_override, "Monte Carlo samples");
    sub_mea->add_option("--gamma", gamma_str, "gamma value or 'auto'");

    auto* sub_self = app.add_subcommand("selftest", "oracle-equivalence suite");
    add_common(sub_self, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (threads == 0) {
        if (const char* env = std::getenv("FLATNF_THREADS")) threads = std::atoi(env);
    }
    set_thread_count(threads);

    try {
        if (sub_self->parsed()) {
            SelftestResult res = run_selftest(have_seed ? seed_override : 1);
            for (auto& line : res.lines) std::cout << line << "\n";
            std::cout << res.passed << " passed, " << res.failed << " failed\n";
            return res.failed == 0 ? 0 : 1;
        }

        RunConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (have_seed) cfg.seed = seed_override;
        if (threads > 0) cfg.threads = threads;
        set_thread_count(cfg.threads);

        if (sub_adm->parsed()) {
            if (m_override > 0) cfg.M = m_override;
            return cmd_admissibility(cfg, !no_timestamp);
        }
        if (sub_res->parsed()) {
            if (q_override > 0) cfg.q = q_override;
            if (kappa_override > 0) cfg.kappa = kappa_override;
            return cmd_resonances(cfg, !no_timestamp);
        }
        if (sub_clu->parsed()) {
            if (m_clu > 0) cfg.M = m_clu;
            if (delta_override > 0) cfg.delta = delta_override;
            return cmd_clusters(cfg, !no_timestamp);
        }
        if (sub_nf->parsed()) return cmd_normal_form(cfg, alpha_max, steps, !no_timestamp);
        if (sub_sim->parsed()) return cmd_simulate(cfg, !no_timestamp);
        if (sub_mea->parsed()) {
            if (samples_override > 0) cfg.samples = samples_override;
            if (!gamma_str.empty()) {
                if (gamma_str == "auto") {
                    cfg.gamma_auto = true;
                } else {
                    cfg.gamma_auto = false;
                    cfg.gamma = std::stod(gamma_str);
                }
            }
            return cmd_measure(cfg, !no_timestamp);
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const enumeration_cap_error& e) {
        std::cerr << "numeric guard: " << e.what() << "\n";
        return 3;
    } catch (const numeric_guard_error& e) {
        std::cerr << "numeric guard: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
