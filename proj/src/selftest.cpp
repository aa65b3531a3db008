#include "flatnf/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flatnf/clusters.hpp"
#include "flatnf/measure.hpp"
#include "flatnf/normalform.hpp"
#include "flatnf/plainpoly.hpp"
#include "flatnf/simulator.hpp"

namespace flatnf {

PlainPoly expand_plain(const RecenteredPoly& p) {
    PlainPoly out;
    out.ball = p.ball;
    for (auto& [mi, c] : p.terms) {
        // peel y factors one site at a time: y^m = (u conj u - xi)^m
        std::vector<std::pair<std::pair<ExpList, ExpList>, cplx>> acc{
            {{mi.k, mi.l}, c.v}};
        for (auto& [site, mexp] : mi.m) {
            std::vector<std::pair<std::pair<ExpList, ExpList>, cplx>> next;
            for (auto& [kl, v] : acc) {
                for (int b = 0; b <= mexp; ++b) {
                    auto kl2 = kl;
                    if (b > 0) {
                        bump_exp(kl2.first, site, b);
                        bump_exp(kl2.second, site, b);
                    }
                    double sign = ((mexp - b) % 2 == 0) ? 1.0 : -1.0;
                    cplx v2 = v * double(binomial(mexp, b)) * sign *
                              std::pow(p.xi[std::size_t(site)], mexp - b);
                    next.push_back({kl2, v2});
                }
            }
            acc = std::move(next);
        }
        for (auto& [kl, v] : acc) {
            auto [it, fresh] = out.terms.try_emplace(kl, v);
            if (!fresh) it->second += v;
        }
    }
    return out;
}

PlainPoly plain_bracket(const PlainPoly& p, const PlainPoly& q) {
    PlainPoly out;
    out.ball = p.ball;
    auto add = [&](const ExpList& K, const ExpList& L, cplx v) {
        if (v == cplx{}) return;
        auto [it, fresh] = out.terms.try_emplace(std::pair{K, L}, v);
        if (!fresh) it->second += v;
    };
    for (auto& [kl1, c1] : p.terms) {
        for (auto& [kl2, c2] : q.terms) {
            std::vector<int> sites;
            for (auto& [s, x] : kl1.first) sites.push_back(s);
            for (auto& [s, x] : kl1.second) sites.push_back(s);
            for (auto& [s, x] : kl2.first) sites.push_back(s);
            for (auto& [s, x] : kl2.second) sites.push_back(s);
            std::sort(sites.begin(), sites.end());
            sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
            for (int s : sites) {
                int K1 = exp_of(kl1.first, s), L1 = exp_of(kl1.second, s);
                int K2 = exp_of(kl2.first, s), L2 = exp_of(kl2.second, s);
                // 2i (d/dconj p d/du q - d/du p d/dconj q)
                if (L1 > 0 && K2 > 0) {
                    ExpList K = kl1.first, L = kl1.second;
                    bump_exp(L, s, -1);
                    for (auto& [t, x] : kl2.first) bump_exp(K, t, x);
                    bump_exp(K, s, -1);
                    for (auto& [t, x] : kl2.second) bump_exp(L, t, x);
                    add(K, L, cplx(0, 2.0) * double(L1) * double(K2) * c1 * c2);
                }
                if (K1 > 0 && L2 > 0) {
                    ExpList K = kl1.first, L = kl1.second;
                    bump_exp(K, s, -1);
                    for (auto& [t, x] : kl2.first) bump_exp(K, t, x);
                    for (auto& [t, x] : kl2.second) bump_exp(L, t, x);
                    bump_exp(L, s, -1);
                    add(K, L, cplx(0, -2.0) * double(K1) * double(L2) * c1 * c2);
                }
            }
        }
    }
    return out;
}

RecenteredPoly recenter_plain(const PlainPoly& p, std::vector<double> xi) {
    RecenteredPoly out;
    out.ball = p.ball;
    out.xi = std::move(xi);
    for (auto& [kl, v] : p.terms) {
        // split off the paired part a_s = min(K_s, L_s)
        MultiIndex base;
        std::vector<std::pair<int, int>> paired;  // (site, a)
        std::vector<int> sites;
        for (auto& [s, x] : kl.first) sites.push_back(s);
        for (auto& [s, x] : kl.second) sites.push_back(s);
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
        for (int s : sites) {
            int K = exp_of(kl.first, s), L = exp_of(kl.second, s);
            int a = std::min(K, L);
            if (K - a > 0) base.k.emplace_back(s, K - a);
            if (L - a > 0) base.l.emplace_back(s, L - a);
            if (a > 0) paired.emplace_back(s, a);
        }
        // (u conj u)^a = (y + xi)^a
        std::vector<std::pair<MultiIndex, cplx>> acc{{base, v}};
        for (auto& [site, a] : paired) {
            std::vector<std::pair<MultiIndex, cplx>> next;
            for (auto& [mi, c] : acc) {
                for (int b = 0; b <= a; ++b) {
                    MultiIndex mi2 = mi;
                    if (b > 0) bump_exp(mi2.m, site, b);
                    cplx c2 = c * double(binomial(a, b)) *
                              std::pow(out.xi[std::size_t(site)], a - b);
                    next.push_back({mi2, c2});
                }
            }
            acc = std::move(next);
        }
        for (auto& [mi, c] : acc) {
            Coeff cc;
            cc.v = c;
            out.add_term(mi, cc);
        }
    }
    out.prune(0.0);
    return out;
}

cplx evaluate_plain(const PlainPoly& p, const FourierState& u) {
    cplx total{};
    for (auto& [kl, v] : p.terms) {
        cplx z = v;
        for (auto& [s, x] : kl.first)
            for (int i = 0; i < x; ++i) z *= u.amps[std::size_t(s)];
        for (auto& [s, x] : kl.second)
            for (int i = 0; i < x; ++i) z *= std::conj(u.amps[std::size_t(s)]);
        total += z;
    }
    return total;
}

RecenteredPoly random_poly(std::shared_ptr<const LatticeBall> ball, std::vector<double> xi,
                           int max_deg, int pattern_count, const CounterRng& rng,
                           std::uint64_t stream, bool want_grad, bool with_integrable) {
    auto patterns = enumerate_kl_patterns(*ball, max_deg);
    RecenteredPoly p;
    p.ball = ball;
    p.xi = std::move(xi);
    const int ns = ball->site_count();
    std::uint64_t ctr = 0;
    for (int t = 0; t < pattern_count && !patterns.empty(); ++t) {
        const KlPattern& pat =
            patterns[std::size_t(rng.word(stream, ctr++) % patterns.size())];
        MultiIndex mi;
        mi.k = pat.k;
        mi.l = pat.l;
        int room = (max_deg - pat.kl_degree) / 2;
        int extra = room > 0 ? int(rng.word(stream, ctr++) % std::uint64_t(room + 1)) : 0;
        for (int e = 0; e < extra; ++e)
            bump_exp(mi.m, int(rng.word(stream, ctr++) % std::uint64_t(ns)), 1);
        cplx c{rng.sym(stream, ctr++), rng.sym(stream, ctr++)};
        Coeff cc;
        cc.v = c;
        if (want_grad) cc.g.emplace(std::size_t(ns), cplx{});
        p.add_term(mi, cc);
        // reality partner
        MultiIndex mj;
        mj.k = mi.l;
        mj.l = mi.k;
        mj.m = mi.m;
        Coeff cj;
        cj.v = std::conj(c);
        if (want_grad) cj.g.emplace(std::size_t(ns), cplx{});
        p.add_term(mj, cj);
    }
    if (with_integrable) {
        for (int t = 0; t < 2; ++t) {
            MultiIndex mi;
            bump_exp(mi.m, int(rng.word(stream, ctr++) % std::uint64_t(ns)), 1);
            bump_exp(mi.m, int(rng.word(stream, ctr++) % std::uint64_t(ns)), 1);
            Coeff cc;
            cc.v = cplx{rng.sym(stream, ctr++), 0.0};
            if (want_grad) cc.g.emplace(std::size_t(ns), cplx{});
            p.add_term(mi, cc);
        }
    }
    return p;
}

FourierState random_state(std::shared_ptr<const LatticeBall> ball, double scale,
                          const CounterRng& rng, std::uint64_t stream) {
    FourierState u;
    u.ball = ball;
    u.amps.resize(std::size_t(ball->site_count()));
    for (std::size_t i = 0; i < u.amps.size(); ++i)
        u.amps[i] = scale * rng.gauss_c(stream, i);
    return u;
}

namespace {

double coeff_distance(const RecenteredPoly& a, const RecenteredPoly& b) {
    double worst = 0;
    auto scan = [&](const RecenteredPoly& x, const RecenteredPoly& y) {
        for (auto& [mi, c] : x.terms) {
            auto it = y.terms.find(mi);
            cplx other = it == y.terms.end() ? cplx{} : it->second.v;
            worst = std::max(worst, std::abs(c.v - other));
        }
    };
    scan(a, b);
    scan(b, a);
    return worst;
}

}  // namespace

SelftestResult run_selftest(std::uint64_t seed) {
    SelftestResult res;
    CounterRng rng(seed);
    auto check = [&](bool ok, const std::string& name, const std::string& detail) {
        std::ostringstream line;
        line << (ok ? "[PASS] " : "[FAIL] ") << name << (detail.empty() ? "" : "  (") << detail
             << (detail.empty() ? "" : ")");
        res.lines.push_back(line.str());
        (ok ? res.passed : res.failed)++;
    };

    auto ball = LatticeBall::make(1, 2.0);
    std::vector<double> xi(std::size_t(ball->site_count()));
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = 0.01 + 0.005 * rng.u01(1, i);

    // canonical bracket against the expand/bracket/re-center reference
    {
        double worst = 0;
        for (int rep = 0; rep < 20; ++rep) {
            auto p = random_poly(ball, xi, 6, 3, rng, 100 + std::uint64_t(rep), false, true);
            auto q = random_poly(ball, xi, 6, 3, rng, 200 + std::uint64_t(rep), false, true);
            auto canonical = poisson_bracket(p, q);
            auto reference = recenter_plain(plain_bracket(expand_plain(p), expand_plain(q)), xi);
            worst = std::max(worst, coeff_distance(canonical, reference));
        }
        check(worst <= 1e-12, "bracket oracle equivalence",
              "max coeff diff " + std::to_string(worst));
    }

    // antisymmetry
    {
        auto p = random_poly(ball, xi, 6, 4, rng, 300, false, true);
        auto q = random_poly(ball, xi, 6, 4, rng, 301, false, true);
        auto pq = poisson_bracket(p, q);
        auto qp = poisson_bracket(q, p);
        accumulate(pq, qp);
        double worst = 0;
        for (auto& [mi, c] : pq.terms) worst = std::max(worst, std::abs(c.v));
        check(worst <= 1e-12, "bracket antisymmetry", "residual " + std::to_string(worst));
    }

    // cohomological identity across cutoff regimes
    {
        ParamSchedule sched;
        sched.epsilon = 0.05;
        sched.s = 2.0;
        double worst = 0;
        for (int rep = 0; rep < 10; ++rep) {
            auto Q = random_poly(ball, xi, 6, 3, rng, 400 + std::uint64_t(rep), false, false);
            FrequencyVector om;
            om.omega.resize(xi.size());
            std::vector<double> lam = frequency_table(TorusMetric::square(1), *ball);
            for (std::size_t i = 0; i < xi.size(); ++i) om.omega[i] = lam[i] + xi[i];
            CutoffResult h = cutoff_eval(sched, om, 0, *ball, 6);
            RecenteredPoly chi = solve_cohomological(Q, om, sched, 0, h);
            RecenteredPoly Z2 = quadratic_part(om, ball, xi);
            RecenteredPoly resid = poisson_bracket(Z2, chi);
            accumulate(resid, Q);
            accumulate(resid, project_scale(Q, sched, 1, ScaleMode::OutsideLambda), -1.0);
            accumulate(resid, project_scale(Q, sched, 1, ScaleMode::InsideLambda),
                       -(1.0 - h.h));
            double scale = 0;
            for (auto& [mi, c] : Q.terms) scale = std::max(scale, std::abs(c.v));
            for (auto& [mi, c] : resid.terms) worst = std::max(worst, std::abs(c.v) / scale);
        }
        check(worst <= 1e-12, "cohomological identity", "residual " + std::to_string(worst));
    }

    // quartet identity on the admissible example
    {
        auto m2 = TorusMetric::admissible_example();
        auto b2 = LatticeBall::make(2, 3.0);
        QuartetScan scan = scan_quartets(m2, *b2, 0.0);
        check(scan.max_identity_residual <= 1e-12 * (1.0 + scan.min_nonzero_abs_omega),
              "four-wave identity",
              "max residual " + std::to_string(scan.max_identity_residual));
    }

    // disc area arbitration
    {
        CounterRng mc(seed ^ 0x9e37ULL);
        const int n = 200000;
        int inside = 0;
        for (int i = 0; i < n; ++i) {
            double x = mc.sym(1, std::uint64_t(2 * i));
            double y = mc.sym(1, std::uint64_t(2 * i + 1));
            if (x * x + y * y < 1.0) ++inside;
        }
        double est = 4.0 * double(inside) / n;
        double sigma = 4.0 * std::sqrt(0.25 / n);  // conservative
        const double pi = 3.14159265358979323846;
        bool ok = std::abs(est - pi) <= 4 * sigma && std::abs(est - pi / 2) > 4 * sigma;
        check(ok, "disc area arbitration", "estimate " + std::to_string(est));
    }

    // flow reversibility
    {
        auto chi = random_poly(ball, xi, 6, 2, rng, 500, false, false);
        for (auto& [mi, c] : chi.terms) const_cast<Coeff&>(c).v *= 1e-3;
        FourierState u = random_state(ball, 0.05, rng, 600);
        FourierState fwd = poly_flow(chi, u, 1.0, 1e-12);
        FourierState back = poly_flow(chi, fwd, -1.0, 1e-12);
        double dev = 0;
        for (std::size_t i = 0; i < u.amps.size(); ++i)
            dev = std::max(dev, std::abs(back.amps[i] - u.amps[i]));
        check(dev <= 1e-10, "flow reversibility", "deviation " + std::to_string(dev));
    }

    // integrator conservation, short run
    {
        auto m2 = TorusMetric::admissible_example();
        auto b2 = LatticeBall::make(2, 2.0);
        HloSystem sys = build_hlo(m2, b2, 1.0);
        CounterRng r2(seed + 5);
        FourierState u0 = random_state(b2, 0.02, r2, 1);
        IntegrateOptions opt;
        opt.dt = 0.01;
        opt.stride = 1000;
        ObservableSeries series = integrate(sys, u0, 20.0, opt);
        double m0 = series.rows.front().mass, e0 = series.rows.front().energy;
        double dm = 0, de = 0;
        for (auto& row : series.rows) {
            dm = std::max(dm, std::abs(row.mass - m0) / m0);
            de = std::max(de, std::abs(row.energy - e0) / std::abs(e0));
        }
        check(dm <= 1e-11 && de <= 1e-9, "integrator conservation",
              "mass drift " + std::to_string(dm) + ", energy drift " + std::to_string(de));
    }

    return res;
}

}  // namespace flatnf
