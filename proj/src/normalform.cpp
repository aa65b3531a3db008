#include "flatnf/normalform.hpp"

#include <algorithm>
#include <cmath>

namespace flatnf {

double bump(double x) {
    double a = std::abs(x);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    double t = 2.0 * a - 1.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

double bump_deriv(double x) {
    double a = std::abs(x);
    if (a <= 0.5 || a >= 1.0) return 0.0;
    double t = 2.0 * a - 1.0;
    double om = 1.0 - t * t;
    double dphidt = bump(x) * (-2.0 * t / (om * om));
    return dphidt * 2.0 * (x < 0 ? -1.0 : 1.0);
}

CutoffResult cutoff_eval(const ParamSchedule& sched, const FrequencyVector& omega, int alpha,
                         std::span<const KlPattern> family) {
    const double s = sched.s;
    const double pref = 1.0 / (sched.gamma_of(alpha) * sq(sched.epsilon));
    const std::size_t nf = family.size();

    std::vector<double> factor(nf), darg_scale(nf);
    CutoffResult res;
    res.family_size = nf;
    res.min_abs_arg = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nf; ++i) {
        double arg = pref * std::pow(sq(family[i].nm_bracket), s) *
                     pattern_resonance(family[i], omega.omega);
        res.min_abs_arg = std::min(res.min_abs_arg, std::abs(arg));
        factor[i] = 1.0 - bump(arg);
        darg_scale[i] = pref * std::pow(sq(family[i].nm_bracket), s);
        if (factor[i] == 0.0) ++res.zero_factors;
    }
    if (!std::isfinite(res.min_abs_arg)) res.min_abs_arg = 0;

    double h = 1.0;
    for (double f : factor) h *= f;
    res.h = h;

    if (omega.has_grad()) {
        const std::size_t ns = omega.omega.size();
        // prefix/suffix products so zero factors need no division
        std::vector<double> pre(nf + 1, 1.0), suf(nf + 1, 1.0);
        for (std::size_t i = 0; i < nf; ++i) pre[i + 1] = pre[i] * factor[i];
        for (std::size_t i = nf; i-- > 0;) suf[i] = suf[i + 1] * factor[i];
        res.grad.emplace(ns, 0.0);
        for (std::size_t i = 0; i < nf; ++i) {
            double arg = pref * std::pow(sq(family[i].nm_bracket), s) *
                         pattern_resonance(family[i], omega.omega);
            double dphi = bump_deriv(arg);
            if (dphi == 0.0) continue;
            double outer = -dphi * pre[i] * suf[i + 1];
            for (std::size_t kk = 0; kk < ns; ++kk) {
                double dres = 0;
                for (auto& [site, x] : family[i].k)
                    dres += x * (*omega.grad)[std::size_t(site)][kk];
                for (auto& [site, x] : family[i].l)
                    dres -= x * (*omega.grad)[std::size_t(site)][kk];
                (*res.grad)[kk] += outer * darg_scale[i] * dres;
            }
        }
    }
    return res;
}

CutoffResult cutoff_eval(const ParamSchedule& sched, const FrequencyVector& omega, int alpha,
                         const LatticeBall& ball, int degree_cap) {
    auto family = enumerate_kl_patterns(ball, degree_cap, sched.N(alpha + 1));
    return cutoff_eval(sched, omega, alpha, family);
}

RecenteredPoly quadratic_part(const FrequencyVector& omega,
                              std::shared_ptr<const LatticeBall> ball,
                              std::vector<double> xi) {
    RecenteredPoly z2;
    z2.ball = std::move(ball);
    z2.xi = std::move(xi);
    for (int n = 0; n < int(omega.omega.size()); ++n) {
        MultiIndex mi;
        mi.m.emplace_back(n, 1);
        Coeff c;
        c.v = omega.omega[std::size_t(n)];
        if (omega.grad) {
            c.g.emplace(omega.omega.size());
            for (std::size_t kk = 0; kk < omega.omega.size(); ++kk)
                (*c.g)[kk] = (*omega.grad)[std::size_t(n)][kk];
        }
        z2.terms.emplace(mi, c);
    }
    return z2;
}

RecenteredPoly solve_cohomological(const RecenteredPoly& Q, const FrequencyVector& omega,
                                   const ParamSchedule& sched, int alpha,
                                   const CutoffResult& h) {
    RecenteredPoly chi;
    chi.ball = Q.ball;
    chi.xi = Q.xi;
    const bool want_grad = Q.grads_present() && omega.has_grad() && h.grad.has_value();
    for (auto& [mi, c] : Q.terms) {
        if (!in_lambda(mi, *Q.ball, sched, alpha + 1)) continue;
        double om = 0;
        for (auto& [site, x] : mi.k) om += x * omega.omega[std::size_t(site)];
        for (auto& [site, x] : mi.l) om -= x * omega.omega[std::size_t(site)];
        if (om == 0.0) {
            if (h.h > 0.0)
                throw numeric_guard_error(
                    "solve_cohomological: exact resonance with nonzero cutoff");
            continue;
        }
        if (h.h == 0.0 && !want_grad) continue;
        const cplx half_i{0.0, 0.5};
        Coeff out;
        out.v = half_i * (h.h / om) * c.v;
        if (want_grad) {
            out.g.emplace(Q.xi.size());
            for (std::size_t kk = 0; kk < Q.xi.size(); ++kk) {
                double dom = 0;
                for (auto& [site, x] : mi.k) dom += x * (*omega.grad)[std::size_t(site)][kk];
                for (auto& [site, x] : mi.l) dom -= x * (*omega.grad)[std::size_t(site)][kk];
                cplx d = ((*h.grad)[kk] / om - h.h * dom / (om * om)) * c.v +
                         (h.h / om) * (*c.g)[kk];
                (*out.g)[kk] = half_i * d;
            }
        }
        if (out.v != cplx{} || want_grad) chi.add_term(mi, out);
    }
    return chi;
}

RecenteredPoly NormalFormState::total_hamiltonian() const {
    RecenteredPoly total = quadratic_part(omega, ball, xi);
    accumulate(total, Z4);
    accumulate(total, Q);
    return total;
}

NormalFormState init_normal_form(const TorusMetric& metric,
                                 std::shared_ptr<const LatticeBall> ball,
                                 const ParamSchedule& sched, std::vector<double> xi,
                                 double fprime0, std::span<const HomogeneousPoly> extras,
                                 bool want_grad) {
    sched.validate();
    NormalFormState st;
    st.schedule = sched;
    st.ball = ball;
    st.xi = xi;
    st.lambda2 = frequency_table(metric, *ball);
    const int ns = ball->site_count();
    const int dim = ball->dim;

    // 2*Hlo in the tuple representation
    std::vector<HomogeneousPoly> parts;
    HomogeneousPoly quad;
    quad.q = 1;
    quad.support_radius = ball->M;
    HomogeneousPoly quart;
    quart.q = 2;
    quart.support_radius = ball->M;
    for (int n = 0; n < ns; ++n) {
        auto s = ball->site(n);
        std::vector<int> t2(s.begin(), s.end());
        t2.insert(t2.end(), s.begin(), s.end());
        quad.coeffs.emplace(t2, cplx(st.lambda2[std::size_t(n)], 0.0));
        std::vector<int> t4 = t2;
        t4.insert(t4.end(), t2.begin(), t2.end());
        quart.coeffs.emplace(t4, cplx(-fprime0 / 2.0, 0.0));
    }
    parts.push_back(std::move(quad));
    parts.push_back(std::move(quart));
    for (const HomogeneousPoly& e : extras) {
        if (e.q < 3)
            throw std::invalid_argument("init_normal_form: extras must have degree >= 6");
        HomogeneousPoly doubled = e;
        for (auto& [key, c] : doubled.coeffs) c *= 2.0;
        parts.push_back(std::move(doubled));
    }

    RecenteredPoly full = center(parts, ball, xi, want_grad);

    st.omega.omega.assign(std::size_t(ns), 0.0);
    if (want_grad) st.omega.grad.emplace(std::size_t(ns), std::vector<double>(std::size_t(ns), 0.0));
    st.Z4.ball = ball;
    st.Z4.xi = xi;
    st.Q.ball = ball;
    st.Q.xi = xi;

    RecenteredPoly anomaly;
    anomaly.ball = ball;
    anomaly.xi = xi;
    RecenteredPoly constants;
    constants.ball = ball;
    constants.xi = xi;

    for (auto& [mi, c] : full.terms) {
        const int deg = mi.degree();
        if (deg == 0) {
            constants.add_term(mi, c);
        } else if (deg == 2) {
            if (!mi.integrable())
                throw numeric_guard_error("init_normal_form: non-integrable quadratic term");
            int site = mi.m.front().first;
            st.omega.omega[std::size_t(site)] = c.v.real();
            if (want_grad && c.g)
                for (std::size_t kk = 0; kk < c.g->size(); ++kk)
                    (*st.omega.grad)[std::size_t(site)][kk] = (*c.g)[kk].real();
        } else if (deg == 4) {
            if (mi.integrable())
                st.Z4.add_term(mi, c);
            else {
                st.quartic_anomaly = true;
                anomaly.add_term(mi, c);
            }
        } else {
            st.Q.add_term(mi, c);
        }
    }
    auto log_poly = [&](RecenteredPoly&& p, const char* kind) {
        if (p.terms.empty()) return;
        WeightSystem ws{sched};
        NormReport nr = norms(p, ws, st.alpha);
        st.remainder_log.push_back(
            {kind, p.max_degree(), nr.ysup, nr.zsup, true, std::move(p)});
    };
    log_poly(std::move(constants), "constant");
    log_poly(std::move(anomaly), "nonintegrable_quartic");

    st.resonance_budget = max_unmodulated_resonance(st.Q, st.lambda2);
    st.omega_initial = st.omega.omega;
    (void)dim;
    return st;
}

namespace {

void split_step_output(NormalFormState& st, const RecenteredPoly& P,
                       const RecenteredPoly& brZ4chi, int degree_cap, double h_val,
                       const RecenteredPoly& chi, LieStepReport* report) {
    const ParamSchedule& sched = st.schedule;
    WeightSystem ws{sched};

    RecenteredPoly constants, beyond, anomaly, z4chi_deg4;
    for (RecenteredPoly* p : {&constants, &beyond, &anomaly, &z4chi_deg4}) {
        p->ball = st.ball;
        p->xi = st.xi;
    }

    // deg-4 bookkeeping uses P~ = P - {Z4, chi}
    RecenteredPoly Ptilde = P;
    accumulate(Ptilde, brZ4chi, -1.0);

    double max_shift = 0;
    for (auto& [mi, c] : P.terms) {
        int deg = mi.degree();
        if (deg == 0) {
            constants.add_term(mi, c);
        } else if (deg == 2) {
            if (!mi.integrable())
                throw numeric_guard_error("lie_step: non-integrable quadratic term");
            int site = mi.m.front().first;
            st.omega.omega[std::size_t(site)] += c.v.real();
            max_shift = std::max(max_shift, std::abs(c.v.real()));
            if (st.omega.grad && c.g)
                for (std::size_t kk = 0; kk < c.g->size(); ++kk)
                    (*st.omega.grad)[std::size_t(site)][kk] += (*c.g)[kk].real();
        } else if (deg > degree_cap) {
            beyond.add_term(mi, c);
        } else if (deg >= 6) {
            st.Q.add_term(mi, c);
        }
    }
    for (auto& [mi, c] : Ptilde.terms) {
        if (mi.degree() != 4) continue;
        if (mi.integrable())
            st.Z4.add_term(mi, c);
        else {
            st.quartic_anomaly = true;
            anomaly.add_term(mi, c);
        }
    }
    // deg-4 part of {Z4, chi}: structurally empty (the bracket of an
    // integrable factor with a degree>=6 monomial creates no new pairing)
    for (auto& [mi, c] : brZ4chi.terms)
        if (mi.degree() == 4) z4chi_deg4.add_term(mi, c);

    int before = int(st.remainder_log.size());
    auto log_poly = [&](RecenteredPoly&& p, const char* kind) {
        p.prune(0.0);
        if (p.terms.empty()) return;
        NormReport nr = norms(p, ws, st.alpha);
        st.remainder_log.push_back(
            {kind, p.max_degree(), nr.ysup, nr.zsup, true, std::move(p)});
    };
    log_poly(std::move(constants), "constant");
    log_poly(std::move(beyond), "beyond_degree_cap");
    log_poly(std::move(anomaly), "nonintegrable_quartic");
    log_poly(std::move(z4chi_deg4), "z4_bracket_deg4");

    if (report) {
        report->max_freq_shift = max_shift;
        report->h_value = h_val;
        report->new_remainder_entries = int(st.remainder_log.size()) - before;
    }
    (void)chi;
}

}  // namespace

NormalFormState lie_step(const NormalFormState& state, int expansion_order, int degree_cap,
                         LieStepReport* report) {
    if (expansion_order < 2) throw std::invalid_argument("lie_step: expansion_order >= 2");
    NormalFormState st = state;
    const ParamSchedule& sched = st.schedule;
    WeightSystem ws{sched};

    CutoffResult h = cutoff_eval(sched, st.omega, st.alpha, *st.ball, degree_cap);
    RecenteredPoly chi = solve_cohomological(st.Q, st.omega, sched, st.alpha, h);

    if (report) {
        report->ysup_lambda_before =
            norms(project_scale(st.Q, sched, st.alpha + 1, ScaleMode::InsideLambda), ws,
                  st.alpha)
                .ysup;
    }

    if (chi.terms.empty()) {
        WeightSystem w2{sched};
        st.remainder_log.push_back({"empty_step", 0, 0.0, 0.0, false, {}});
        if (report) {
            report->h_value = h.h;
            report->ysup_lambda_after = report->ysup_lambda_before;
            report->ysup_Q_after = norms(st.Q, w2, st.alpha).ysup;
        }
        ++st.steps_done;
        return st;
    }

    RecenteredPoly Z2 = quadratic_part(st.omega, st.ball, st.xi);

    // ad chains of Z2, Z4, Q under chi
    RecenteredPoly adZ2 = poisson_bracket(Z2, chi);
    RecenteredPoly adZ4 = poisson_bracket(st.Z4, chi);
    RecenteredPoly adQ = poisson_bracket(st.Q, chi);

    RecenteredPoly P;
    P.ball = st.ball;
    P.xi = st.xi;
    accumulate(P, adZ4);
    accumulate(P, adQ);

    // chain floor: contributions this far below the working scale are
    // invisible at every tolerance the artifact asserts
    double scale0 = 1.0;
    for (double w : st.omega.omega) scale0 = std::max(scale0, std::abs(w));
    const double chain_floor = 1e-22 * scale0;

    // The formal tail order is replaced by degree_cap throughout: terms past
    // the cap still enter P (and the remainder ledger via the split below)
    // but are not carried further along the ad chains.
    auto strip_beyond = [&](RecenteredPoly& p) {
        RecenteredPoly stripped;
        stripped.ball = st.ball;
        stripped.xi = st.xi;
        for (auto it = p.terms.begin(); it != p.terms.end();) {
            if (it->first.degree() > degree_cap) {
                stripped.terms.emplace(it->first, it->second);
                it = p.terms.erase(it);
            } else {
                ++it;
            }
        }
        return stripped;
    };

    RecenteredPoly curZ2 = adZ2, curZ4 = adZ4, curQ = adQ;
    for (RecenteredPoly* c : {&curZ2, &curZ4, &curQ}) (void)strip_beyond(*c);
    double fact = 1.0;
    for (int l = 2; l <= expansion_order - 1; ++l) {
        fact *= l;
        for (RecenteredPoly* c : {&curZ2, &curZ4, &curQ}) {
            *c = poisson_bracket(*c, chi);
            c->prune(chain_floor);
            RecenteredPoly over = strip_beyond(*c);
            accumulate(P, *c, 1.0 / fact);
            accumulate(P, over, 1.0 / fact);
        }
    }
    // order-kappa Taylor tail, logged with its norms
    {
        fact *= expansion_order;
        RecenteredPoly tail;
        tail.ball = st.ball;
        tail.xi = st.xi;
        accumulate(tail, poisson_bracket(curZ2, chi), 1.0 / fact);
        accumulate(tail, poisson_bracket(curZ4, chi), 1.0 / fact);
        accumulate(tail, poisson_bracket(curQ, chi), 1.0 / fact);
        tail.prune(0.0);
        if (!tail.terms.empty()) {
            NormReport nr = norms(tail, ws, st.alpha);
            st.remainder_log.push_back(
                {"taylor_tail", tail.max_degree(), nr.ysup, nr.zsup, true, std::move(tail)});
        }
    }

    // new Q = (Id - h Pi_Lambda) Q + [deg 6..cap of P]; the projected part
    // of adZ2 equals -h Pi_Lambda Q exactly, so subtract via the bracket
    st.Q = state.Q;
    accumulate(st.Q, adZ2);  // adZ2 = -h Pi_Lambda Q
    st.Q.prune(0.0);

    split_step_output(st, P, adZ4, degree_cap, h.h, chi, report);
    st.Q.prune(0.0);
    st.Z4.prune(0.0);

    st.resonance_budget =
        std::max(st.resonance_budget, max_unmodulated_resonance(st.Q, st.lambda2));
    st.chi_history.push_back(chi);
    ++st.steps_done;

    NormReport nq = norms(st.Q, ws, st.alpha);
    if (report) {
        report->ysup_lambda_after =
            norms(project_scale(st.Q, sched, st.alpha + 1, ScaleMode::InsideLambda), ws,
                  st.alpha)
                .ysup;
        report->ysup_Q_after = nq.ysup;
    }
    double budget = 10.0 * std::pow(sched.epsilon, -1e-4);
    if (nq.ysup > budget) {
        std::string mi_desc = "deg " + std::to_string(nq.arg_ysup.degree());
        throw numeric_guard_error("lie_step: Ysup blowup " + std::to_string(nq.ysup) +
                                  " > " + std::to_string(budget) + " at multi-index " +
                                  mi_desc);
    }
    return st;
}

NormalFormState scale_advance(const NormalFormState& state, ScaleAdvanceReport* report) {
    NormalFormState st = state;
    const ParamSchedule& sched = st.schedule;
    WeightSystem ws{sched};

    RecenteredPoly residue =
        project_scale(st.Q, sched, st.alpha + 1, ScaleMode::InsideLambda);
    st.Q = project_scale(st.Q, sched, st.alpha + 1, ScaleMode::OutsideLambda);

    double moved = 0;
    if (!residue.terms.empty()) {
        NormReport nr = norms(residue, ws, st.alpha);
        moved = nr.ysup;
        st.remainder_log.push_back({"scale_residue", residue.max_degree(), nr.ysup, nr.zsup,
                                    true, std::move(residue)});
    }

    double drift = 0;
    for (std::size_t n = 0; n < st.omega.omega.size(); ++n)
        drift = std::max(drift, std::abs(st.omega.omega[n] - st.omega_initial[n]));

    if (report) {
        report->moved_ysup = moved;
        report->freq_drift = drift;
        report->freq_drift_budget =
            std::pow(sched.N(st.alpha), -4.0 * sched.s) * std::pow(sched.epsilon, 3.0);
    }
    st.omega_initial = st.omega.omega;
    st.alpha += 1;
    st.steps_done = 0;
    return st;
}

BirkhoffResult birkhoff_truncated(std::span<const HomogeneousPoly> parts,
                                  const TorusMetric& metric,
                                  std::shared_ptr<const LatticeBall> ball, double kappa,
                                  int degree_cap) {
    if (!(kappa > 0)) throw std::invalid_argument("birkhoff_truncated: kappa must be > 0");
    std::vector<double> lam = frequency_table(metric, *ball);
    std::vector<double> xi0(std::size_t(ball->site_count()), 0.0);

    // everything lives at xi = 0 where brackets preserve total degree
    RecenteredPoly rest = center(parts, ball, xi0, false);
    for (auto& [mi, c] : rest.terms)
        if (mi.degree() < 4)
            throw std::invalid_argument("birkhoff_truncated: input degrees must be >= 4");

    auto res_of = [&](const MultiIndex& mi) {
        double s = 0;
        for (auto& [site, x] : mi.k) s += x * lam[std::size_t(site)];
        for (auto& [site, x] : mi.l) s -= x * lam[std::size_t(site)];
        return s;
    };

    BirkhoffResult out;
    out.kappa = kappa;
    out.remainder.ball = ball;
    out.remainder.xi = xi0;

    for (int deg = 4; deg <= degree_cap; deg += 2) {
        RecenteredPoly K, Qd, chi;
        for (RecenteredPoly* p : {&K, &Qd, &chi}) {
            p->ball = ball;
            p->xi = xi0;
        }
        for (auto& [mi, c] : rest.terms)
            if (mi.degree() == deg) K.add_term(mi, c);
        K.prune(0.0);
        if (K.terms.empty()) continue;

        for (auto& [mi, c] : K.terms) {
            double om = res_of(mi);
            double ao = std::abs(om);
            if (std::isfinite(kappa) && std::abs(ao - kappa) <= 1e-12 * (1.0 + ao)) {
                throw numeric_guard_error(
                    "birkhoff_truncated: |Omega| within 1e-12 of kappa at a degree " +
                    std::to_string(deg) + " multi-index");
            }
            if (ao <= kappa) {
                Qd.add_term(mi, c);
            } else {
                Coeff cc = c;
                cc.v = cplx(0.0, 1.0) * c.v / om;  // i K / Omega
                chi.add_term(mi, cc);
            }
        }

        if (!chi.terms.empty()) {
            // transform the full Hamiltonian: the Z2 chain enters through
            // ad_chi(Z2) = -(nonresonant part of K)
            RecenteredPoly adZ2;
            adZ2.ball = ball;
            adZ2.xi = xi0;
            accumulate(adZ2, K, -1.0);
            accumulate(adZ2, Qd, 1.0);  // -(K - Qd)

            // terms past the cap only produce terms past the cap (brackets
            // preserve total degree at xi = 0), so carriers can be stripped
            auto strip_beyond = [&](RecenteredPoly& p) {
                for (auto it = p.terms.begin(); it != p.terms.end();) {
                    if (it->first.degree() > degree_cap)
                        it = p.terms.erase(it);
                    else
                        ++it;
                }
            };

            RecenteredPoly curZ2 = adZ2, cur = poisson_bracket(rest, chi);
            accumulate(rest, adZ2);
            accumulate(rest, cur);
            double fact = 1.0;
            for (int l = 2; l <= 60; ++l) {
                fact *= l;
                strip_beyond(curZ2);
                strip_beyond(cur);
                curZ2.prune(0.0);
                cur.prune(0.0);
                if (curZ2.terms.empty() && cur.terms.empty()) break;
                curZ2 = poisson_bracket(curZ2, chi);
                cur = poisson_bracket(cur, chi);
                accumulate(rest, curZ2, 1.0 / fact);
                accumulate(rest, cur, 1.0 / fact);
            }
            rest.prune(0.0);
            for (auto it = rest.terms.begin(); it != rest.terms.end();) {
                if (it->first.degree() > degree_cap) {
                    out.remainder.add_term(it->first, it->second);
                    it = rest.terms.erase(it);
                } else {
                    ++it;
                }
            }
        }
        out.chi.push_back(std::move(chi));
        out.Q.push_back(std::move(Qd));
    }
    return out;
}

namespace {

// Dormand-Prince 5(4) pair
struct Dp5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace

FourierState poly_flow(const RecenteredPoly& chi, const FourierState& u0, double t,
                       double tol) {
    if (std::abs(t) > 1.0 + 1e-12)
        throw std::invalid_argument("poly_flow: |t| must be <= 1");
    FourierState u = u0;
    if (t == 0.0 || chi.terms.empty()) {
        u.t += t;
        return u;
    }
    const std::size_t n = u.amps.size();
    const cplx mi{0.0, -1.0};

    auto f = [&](const std::vector<cplx>& y, std::vector<cplx>& dy) {
        FourierState tmp;
        tmp.ball = u.ball;
        tmp.amps = y;
        FourierState g = gradient_eval(chi, tmp);
        for (std::size_t i = 0; i < n; ++i) dy[i] = mi * g.amps[i];
    };

    double dir = t > 0 ? 1.0 : -1.0;
    double remaining = std::abs(t);
    double dt = std::min(0.1, remaining);
    std::vector<cplx> y = u.amps, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n),
                      y5(n);
    f(y, k1);
    int guard = 0;
    while (remaining > 0) {
        if (++guard > 2000000) throw numeric_guard_error("poly_flow: step limit reached");
        dt = std::min(dt, remaining);
        double h = dir * dt;
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * Dp5::a21 * k1[i];
        f(yt, k2);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (Dp5::a31 * k1[i] + Dp5::a32 * k2[i]);
        f(yt, k3);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (Dp5::a41 * k1[i] + Dp5::a42 * k2[i] + Dp5::a43 * k3[i]);
        f(yt, k4);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (Dp5::a51 * k1[i] + Dp5::a52 * k2[i] + Dp5::a53 * k3[i] +
                                Dp5::a54 * k4[i]);
        f(yt, k5);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (Dp5::a61 * k1[i] + Dp5::a62 * k2[i] + Dp5::a63 * k3[i] +
                                Dp5::a64 * k4[i] + Dp5::a65 * k5[i]);
        f(yt, k6);
        for (std::size_t i = 0; i < n; ++i)
            y5[i] = y[i] + h * (Dp5::b1 * k1[i] + Dp5::b3 * k3[i] + Dp5::b4 * k4[i] +
                                Dp5::b5 * k5[i] + Dp5::b6 * k6[i]);
        f(y5, k7);

        double err = 0;
        for (std::size_t i = 0; i < n; ++i) {
            cplx e = h * (Dp5::e1 * k1[i] + Dp5::e3 * k3[i] + Dp5::e4 * k4[i] +
                          Dp5::e5 * k5[i] + Dp5::e6 * k6[i] + Dp5::e7 * k7[i]);
            double sc = tol * (1.0 + std::abs(y[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        if (err <= 1.0) {
            y = y5;
            k1 = k7;  // FSAL
            remaining -= dt;
        }
        double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        dt *= std::clamp(fac, 0.2, 5.0);
        if (dt < 1e-14)
            throw numeric_guard_error("poly_flow: step size underflow at t offset " +
                                      std::to_string(std::abs(t) - remaining));
    }
    u.amps = std::move(y);
    u.t = u0.t + t;
    return u;
}

double flow_differential_check(const RecenteredPoly& chi, const FourierState& u, double t,
                               std::span<const FourierState> probes, double tol) {
    double worst = 0;
    const double delta = 1e-5;
    for (const FourierState& phi : probes) {
        double pn = std::sqrt(l2_norm_sq(phi.amps));
        if (pn == 0) continue;
        FourierState up = u, um = u;
        for (std::size_t i = 0; i < u.amps.size(); ++i) {
            up.amps[i] += delta * phi.amps[i];
            um.amps[i] -= delta * phi.amps[i];
        }
        FourierState fp = poly_flow(chi, up, t, tol);
        FourierState fm = poly_flow(chi, um, t, tol);
        double dev = 0;
        for (std::size_t i = 0; i < u.amps.size(); ++i) {
            cplx d = (fp.amps[i] - fm.amps[i]) / (2.0 * delta) - phi.amps[i];
            dev += std::norm(d);
        }
        worst = std::max(worst, std::sqrt(dev) / pn);
    }
    return worst;
}

}  // namespace flatnf
