#include "flatnf/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "flatnf/rng.hpp"

namespace flatnf {

CompiledPoly CompiledPoly::from(const RecenteredPoly& p) {
    CompiledPoly cp;
    cp.xi = p.xi;
    for (auto& [mi, c] : p.terms) {
        Term t;
        t.c = c.v;
        t.begin = int(cp.factors.size());
        std::map<int, Factor> merged;
        for (auto& [s, x] : mi.k) merged[s].k += x, merged[s].site = s;
        for (auto& [s, x] : mi.l) merged[s].l += x, merged[s].site = s;
        for (auto& [s, x] : mi.m) merged[s].m += x, merged[s].site = s;
        for (auto& [s, f] : merged) cp.factors.push_back(f);
        t.end = int(cp.factors.size());
        cp.terms.push_back(t);
    }
    return cp;
}

namespace {
inline cplx ipow(cplx z, int n) {
    cplx r{1.0, 0.0};
    for (int i = 0; i < n; ++i) r *= z;
    return r;
}
inline double dpow(double z, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= z;
    return r;
}
}  // namespace

cplx CompiledPoly::value(std::span<const cplx> amps) const {
    cplx total{};
    for (const Term& t : terms) {
        cplx z = t.c;
        for (int fi = t.begin; fi < t.end; ++fi) {
            const Factor& f = factors[std::size_t(fi)];
            cplx u = amps[std::size_t(f.site)];
            if (f.k) z *= ipow(u, f.k);
            if (f.l) z *= ipow(std::conj(u), f.l);
            if (f.m) z *= dpow(std::norm(u) - xi[std::size_t(f.site)], f.m);
        }
        total += z;
    }
    return total;
}

void CompiledPoly::add_gradient(std::span<const cplx> amps, std::span<cplx> out) const {
    // prefix/suffix factor products give each single-factor derivative in
    // one pass per term
    thread_local std::vector<cplx> left, right, fv;
    for (const Term& t : terms) {
        const int nf = t.end - t.begin;
        fv.assign(std::size_t(nf), cplx{1.0, 0.0});
        for (int j = 0; j < nf; ++j) {
            const Factor& f = factors[std::size_t(t.begin + j)];
            cplx u = amps[std::size_t(f.site)];
            cplx z{1.0, 0.0};
            if (f.k) z *= ipow(u, f.k);
            if (f.l) z *= ipow(std::conj(u), f.l);
            if (f.m) z *= dpow(std::norm(u) - xi[std::size_t(f.site)], f.m);
            fv[std::size_t(j)] = z;
        }
        left.assign(std::size_t(nf + 1), cplx{1.0, 0.0});
        right.assign(std::size_t(nf + 1), cplx{1.0, 0.0});
        for (int j = 0; j < nf; ++j) left[std::size_t(j + 1)] = left[std::size_t(j)] * fv[std::size_t(j)];
        for (int j = nf; j-- > 0;) right[std::size_t(j)] = right[std::size_t(j + 1)] * fv[std::size_t(j)];
        for (int j = 0; j < nf; ++j) {
            const Factor& f = factors[std::size_t(t.begin + j)];
            if (!f.l && !f.m) continue;
            cplx u = amps[std::size_t(f.site)];
            cplx others = left[std::size_t(j)] * right[std::size_t(j + 1)];
            double y = std::norm(u) - xi[std::size_t(f.site)];
            if (f.l) {
                cplx inner = ipow(u, f.k) * ipow(std::conj(u), f.l - 1) * dpow(y, f.m);
                out[std::size_t(f.site)] += 2.0 * t.c * double(f.l) * others * inner;
            }
            if (f.m) {
                cplx inner = ipow(u, f.k) * ipow(std::conj(u), f.l) * dpow(y, f.m - 1);
                out[std::size_t(f.site)] += 2.0 * t.c * double(f.m) * u * others * inner;
            }
        }
    }
}

double HloSystem::energy(std::span<const cplx> amps) const {
    KahanSum acc;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        double a2 = std::norm(amps[i]);
        acc.add(0.5 * lambda2[i] * a2 - (fprime0 / 4.0) * a2 * a2);
    }
    double e = acc.value();
    if (has_tail) e += tail_fast.value(amps).real();
    return e;
}

void HloSystem::gradient(std::span<const cplx> amps, std::span<cplx> out) const {
    for (std::size_t i = 0; i < amps.size(); ++i)
        out[i] = (lambda2[i] - fprime0 * std::norm(amps[i])) * amps[i];
    if (has_tail) tail_fast.add_gradient(amps, out);
}

HloSystem assemble_system(const TorusMetric& m, std::shared_ptr<const LatticeBall> ball,
                          double fprime0, std::span<const HomogeneousPoly> tail_parts) {
    HloSystem sys;
    sys.ball = ball;
    sys.lambda2 = frequency_table(m, *ball);
    sys.fprime0 = fprime0;
    if (!tail_parts.empty()) {
        std::vector<double> xi0(std::size_t(ball->site_count()), 0.0);
        sys.tail = center(tail_parts, ball, xi0, false);
        sys.tail.prune(0.0);
        sys.tail_fast = CompiledPoly::from(sys.tail);
        sys.has_tail = !sys.tail.terms.empty();
    }
    return sys;
}

HloSystem build_hlo(const TorusMetric& m, std::shared_ptr<const LatticeBall> ball,
                    double fprime0, std::span<const HomogeneousPoly> extras, double kappa) {
    for (const HomogeneousPoly& e : extras) {
        if (e.q < 3) throw std::invalid_argument("build_hlo: extras must have degree >= 6");
        if (std::isfinite(kappa) && max_abs_resonance(e, m) > kappa)
            throw std::invalid_argument("build_hlo: extra tail is not kappa-resonant");
    }
    return assemble_system(m, std::move(ball), fprime0, extras);
}

ObservableRow observables(const FourierState& u_t, const FourierState& u_0,
                          std::span<const double> xi, const ClusterPartition* partition,
                          double s, const HloSystem* H) {
    if (!same_ball(*u_t.ball, *u_0.ball))
        throw std::invalid_argument("observables: ball mismatch");
    const LatticeBall& ball = *u_t.ball;
    ObservableRow row;
    row.t = u_t.t;
    row.mass = l2_norm_sq(u_t.amps);
    row.hs_norm = hs_norm(u_t.amps, ball, s);
    if (H) row.energy = H->energy(u_t.amps);

    KahanSum dev, rec;
    for (int i = 0; i < ball.site_count(); ++i) {
        double w = std::pow(sq(site_bracket(ball.site(i))), s);
        dev.add(w * std::abs(std::norm(u_t.amps[std::size_t(i)]) -
                             std::norm(u_0.amps[std::size_t(i)])));
        if (!xi.empty())
            rec.add(w * std::abs(std::norm(u_t.amps[std::size_t(i)]) - xi[std::size_t(i)]));
    }
    row.action_dev = dev.value();
    row.recentered_sum = rec.value();

    if (partition) {
        auto st = super_actions(u_t.amps, *partition);
        auto s0 = super_actions(u_0.amps, *partition);
        KahanSum sdev;
        for (std::size_t c = 0; c < st.size(); ++c)
            sdev.add(std::pow(sq(partition->m_of[c]), s) * std::abs(st[c] - s0[c]));
        row.superaction_dev = sdev.value();
    }
    return row;
}

std::vector<int> annulus_membership(double recentered_sum, const ParamSchedule& sched,
                                    int alpha_max) {
    std::vector<int> member;
    for (int a = 0; a <= alpha_max; ++a) {
        double budget = std::pow(sched.epsilon, 2.2) * std::pow(sched.N(a), -2.0 * sched.s);
        member.push_back(recentered_sum <= budget ? 1 : 0);
    }
    return member;
}

ObservableSeries integrate(const HloSystem& H, const FourierState& u0, double T,
                           const IntegrateOptions& opt) {
    if (!(opt.dt > 0)) throw std::invalid_argument("integrate: dt > 0");
    const std::size_t n = u0.amps.size();
    const double dt = opt.dt;

    std::vector<double> xi = opt.xi;
    if (xi.empty()) {
        xi.resize(n);
        for (std::size_t i = 0; i < n; ++i) xi[i] = std::norm(u0.amps[i]);
    }

    // Cayley factors for the diagonal linear part; the combined rotation is
    // renormalized to unit modulus so long runs carry no systematic drift
    std::vector<cplx> cay(n), cay_den_inv(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx half{0.0, 0.5 * dt * H.lambda2[i]};
        cay_den_inv[i] = cplx{1.0, 0.0} / (cplx{1.0, 0.0} + half);
        cay[i] = (cplx{1.0, 0.0} - half) * cay_den_inv[i];
        cay[i] /= std::abs(cay[i]);
    }

    ObservableSeries series;
    FourierState u = u0;
    series.rows.push_back(observables(u, u0, xi, opt.partition, opt.s, &H));

    const std::int64_t steps = std::int64_t(std::llround(T / dt));
    std::vector<cplx> unew(n), mid(n), nl(n);

    for (std::int64_t step = 0; step < steps; ++step) {
        unew = u.amps;  // initial guess
        double change = std::numeric_limits<double>::infinity();
        double prev_change = std::numeric_limits<double>::infinity();
        int it = 0;
        for (; it < opt.max_fp_iter; ++it) {
            for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (u.amps[i] + unew[i]);
            // nonlinear part of the gradient at the midpoint
            for (std::size_t i = 0; i < n; ++i)
                nl[i] = -H.fprime0 * std::norm(mid[i]) * mid[i];
            if (H.has_tail) H.tail_fast.add_gradient(mid, nl);
            change = 0;
            for (std::size_t i = 0; i < n; ++i) {
                cplx next = cay[i] * u.amps[i] + cplx{0.0, -dt} * nl[i] * cay_den_inv[i];
                change = std::max(change, std::abs(next - unew[i]));
                unew[i] = next;
            }
            double scale = std::sqrt(l2_norm_sq(unew)) + 1e-300;
            if (change <= 1e-16 * scale) break;
            if (it > 4 && change >= prev_change) break;  // stagnation at roundoff
            prev_change = change;
        }
        if (it == opt.max_fp_iter) {
            double scale = std::sqrt(l2_norm_sq(unew));
            if (change > opt.fp_tol * (scale + 1.0))
                throw numeric_guard_error(
                    "integrate: fixed point failed at t = " + std::to_string(u.t) +
                    ", residual " + std::to_string(change));
        }
        series.fp_iterations_max = std::max(series.fp_iterations_max, it + 1);
        u.amps = unew;
        u.t = u0.t + double(step + 1) * dt;
        if ((step + 1) % opt.stride == 0 || step + 1 == steps)
            series.rows.push_back(observables(u, u0, xi, opt.partition, opt.s, &H));
    }
    series.final_state = std::move(u);
    return series;
}

StabilityReport stability_experiment(const TorusMetric& metric_a,
                                     const TorusMetric& metric_b,
                                     std::shared_ptr<const LatticeBall> ball, double s,
                                     double epsilon, std::uint64_t seed, double T,
                                     double dt) {
    const int ns = ball->site_count();
    const int dim = ball->dim;

    // full quartic interaction on the ball (zero-momentum tuples)
    HomogeneousPoly quartic;
    quartic.q = 2;
    quartic.support_radius = ball->M;
    {
        const double f1 = 1.0;  // f'(0): only the scale epsilon^2 f1 matters
        for (auto& v : enumerate_multivectors(2, *ball))
            quartic.coeffs.emplace(v.flat, cplx(f1 / 4.0, 0.0));
    }
    HloSystem sys_a = assemble_system(metric_a, ball, 0.0, {&quartic, 1});
    HloSystem sys_b = assemble_system(metric_b, ball, 0.0, {&quartic, 1});

    // equal amplitudes on the unit-square quartet, faint seeded noise away
    std::vector<std::vector<int>> quartet;
    if (dim == 2) quartet = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    else
        throw std::invalid_argument("stability_experiment: dim 2 expected");
    double wsum = 0;
    for (auto& q : quartet) wsum += std::pow(sq(site_bracket(q)), s);
    const double amp = epsilon / std::sqrt(wsum);

    CounterRng rng(seed);
    FourierState u0;
    u0.ball = ball;
    u0.amps.assign(std::size_t(ns), cplx{});
    for (auto& q : quartet) {
        int idx = ball->index_of(q);
        double phase = 6.283185307179586 * rng.u01(7, std::uint64_t(idx));
        u0.amps[std::size_t(idx)] = amp * cplx(std::cos(phase), std::sin(phase));
    }
    for (int i = 0; i < ns; ++i) {
        if (u0.amps[std::size_t(i)] != cplx{}) continue;
        u0.amps[std::size_t(i)] = 1e-3 * amp * rng.gauss_c(11, std::uint64_t(i)) /
                                  std::pow(site_bracket(ball->site(i)), s);
    }

    IntegrateOptions opt;
    opt.dt = dt;
    opt.s = s;
    opt.stride = std::max(1, int(std::llround(T / dt)) / 200);
    ObservableSeries sa = integrate(sys_a, u0, T, opt);
    ObservableSeries sb = integrate(sys_b, u0, T, opt);

    StabilityReport rep;
    for (std::size_t i = 0; i < sa.rows.size() && i < sb.rows.size(); ++i) {
        rep.times.push_back(sa.rows[i].t);
        rep.action_dev_a.push_back(sa.rows[i].action_dev);
        rep.action_dev_b.push_back(sb.rows[i].action_dev);
        rep.hs_a.push_back(sa.rows[i].hs_norm);
        rep.hs_b.push_back(sb.rows[i].hs_norm);
    }
    double da = rep.action_dev_a.empty() ? 0 : rep.action_dev_a.back();
    double db = rep.action_dev_b.empty() ? 0 : rep.action_dev_b.back();
    rep.final_ratio = da > 0 ? db / da : std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace flatnf
