#include "flatnf/polyalg.hpp"

#include <algorithm>
#include <cmath>

namespace flatnf {

int exp_of(const ExpList& e, int site) {
    for (auto& [s, x] : e)
        if (s == site) return x;
    return 0;
}

void bump_exp(ExpList& e, int site, int delta) {
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i].first == site) {
            e[i].second += delta;
            if (e[i].second == 0) e.erase(e.begin() + long(i));
            return;
        }
        if (e[i].first > site) {
            if (delta != 0) e.insert(e.begin() + long(i), {site, delta});
            return;
        }
    }
    if (delta != 0) e.emplace_back(site, delta);
}

int MultiIndex::degree() const {
    int d = 0;
    for (auto& [s, x] : m) d += 2 * x;
    for (auto& [s, x] : k) d += x;
    for (auto& [s, x] : l) d += x;
    return d;
}

bool MultiIndex::non_pairing() const {
    for (auto& [s, x] : k)
        if (exp_of(l, s) > 0) return false;
    return true;
}

double n_minus(const MultiIndex& mi, const LatticeBall& ball) {
    double best = std::numeric_limits<double>::infinity();
    for (auto& [s, x] : mi.k) best = std::min(best, site_norm(ball.site(s)));
    for (auto& [s, x] : mi.l) best = std::min(best, site_norm(ball.site(s)));
    return best;
}

double n_minus_bracket(const MultiIndex& mi, const LatticeBall& ball) {
    double nm = n_minus(mi, ball);
    if (!std::isfinite(nm)) return nm;
    return std::sqrt(1.0 + nm * nm);
}

double hs_norm(std::span<const cplx> amps, const LatticeBall& ball, double s) {
    KahanSum acc;
    for (int i = 0; i < ball.site_count(); ++i)
        acc.add(std::pow(sq(site_bracket(ball.site(i))), s) * std::norm(amps[std::size_t(i)]));
    return std::sqrt(acc.value());
}

double l2_norm_sq(std::span<const cplx> amps) {
    KahanSum acc;
    for (auto& a : amps) acc.add(std::norm(a));
    return acc.value();
}

void RecenteredPoly::add_term(const MultiIndex& mi, const Coeff& c) {
    auto [it, fresh] = terms.try_emplace(mi, c);
    if (fresh) return;
    it->second.v += c.v;
    if (it->second.g && c.g) {
        for (std::size_t i = 0; i < it->second.g->size(); ++i)
            (*it->second.g)[i] += (*c.g)[i];
    } else if (it->second.g || c.g) {
        it->second.g.reset();  // mixed presence: gradient unavailable
    }
}

void RecenteredPoly::prune(double floor) {
    for (auto it = terms.begin(); it != terms.end();) {
        double mag = std::abs(it->second.v);
        if (it->second.g)
            for (auto& gv : *it->second.g) mag = std::max(mag, std::abs(gv));
        if (mag <= floor)
            it = terms.erase(it);
        else
            ++it;
    }
}

int RecenteredPoly::max_degree() const {
    int d = 0;
    for (auto& [mi, c] : terms) d = std::max(d, mi.degree());
    return d;
}

bool RecenteredPoly::grads_present() const {
    if (terms.empty()) return true;
    for (auto& [mi, c] : terms)
        if (!c.has_grad()) return false;
    return true;
}

void ParamSchedule::validate() const {
    if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("ParamSchedule: epsilon in (0,1)");
    if (!(s > 0)) throw std::invalid_argument("ParamSchedule: s > 0");
    if (r < 1) throw std::invalid_argument("ParamSchedule: r >= 1");
    if (rbar_cap < 2) throw std::invalid_argument("ParamSchedule: rbar_cap >= 2");
}

namespace {

// multiply by a scalar, product rule on the gradient
Coeff coeff_scale(const Coeff& a, cplx f) {
    Coeff r;
    r.v = a.v * f;
    if (a.g) {
        r.g.emplace(a.g->size());
        for (std::size_t i = 0; i < a.g->size(); ++i) (*r.g)[i] = (*a.g)[i] * f;
    }
    return r;
}

Coeff coeff_mul(const Coeff& a, const Coeff& b) {
    Coeff r;
    r.v = a.v * b.v;
    if (a.g && b.g) {
        r.g.emplace(a.g->size());
        for (std::size_t i = 0; i < a.g->size(); ++i)
            (*r.g)[i] = (*a.g)[i] * b.v + a.v * (*b.g)[i];
    }
    return r;
}

// multiply by xi_j^p in place (chain rule adds to slot j)
void coeff_mul_xi_pow(Coeff& a, int j, int p, double xij) {
    if (p == 0) return;
    double xp = std::pow(xij, p);
    double dxp = p * std::pow(xij, p - 1);
    if (a.g) {
        for (auto& gv : *a.g) gv *= xp;
        (*a.g)[std::size_t(j)] += a.v * dxp;
    }
    a.v *= xp;
}

struct SiteExp {
    int site;
    int K, L, M;
};

// Re-center a product monomial: pairs |u_j|^{2a_j}, a_j = min(K_j,L_j), are
// expanded over (y_j + xi_j)^{a_j}; leaves land in the canonical map.
void add_expanded(std::map<MultiIndex, Coeff>& out, std::vector<SiteExp>& sites,
                  const Coeff& base, const std::vector<double>& xi) {
    std::vector<int> paired;  // positions in `sites` with a_j > 0
    for (std::size_t i = 0; i < sites.size(); ++i)
        if (std::min(sites[i].K, sites[i].L) > 0) paired.push_back(int(i));

    MultiIndex mi;
    for (auto& se : sites) {
        int a = std::min(se.K, se.L);
        if (se.K - a > 0) mi.k.emplace_back(se.site, se.K - a);
        if (se.L - a > 0) mi.l.emplace_back(se.site, se.L - a);
        if (se.M > 0) mi.m.emplace_back(se.site, se.M);
    }

    if (paired.empty()) {
        auto [it, fresh] = out.try_emplace(mi, base);
        if (!fresh) {
            it->second.v += base.v;
            if (it->second.g && base.g)
                for (std::size_t i = 0; i < it->second.g->size(); ++i)
                    (*it->second.g)[i] += (*base.g)[i];
            else if (it->second.g || base.g)
                it->second.g.reset();
        }
        return;
    }

    // recursive binomial expansion over the paired sites
    std::vector<int> b(paired.size(), 0);
    auto emit = [&](auto&& self, std::size_t depth, Coeff cur) -> void {
        if (depth == paired.size()) {
            MultiIndex leaf = mi;
            for (std::size_t i = 0; i < paired.size(); ++i) {
                if (b[i] > 0) bump_exp(leaf.m, sites[std::size_t(paired[i])].site, b[i]);
            }
            // keep m sorted after bumps
            std::sort(leaf.m.begin(), leaf.m.end());
            auto [it, fresh] = out.try_emplace(leaf, cur);
            if (!fresh) {
                it->second.v += cur.v;
                if (it->second.g && cur.g)
                    for (std::size_t i = 0; i < it->second.g->size(); ++i)
                        (*it->second.g)[i] += (*cur.g)[i];
                else if (it->second.g || cur.g)
                    it->second.g.reset();
            }
            return;
        }
        const SiteExp& se = sites[std::size_t(paired[depth])];
        const int a = std::min(se.K, se.L);
        for (int bb = 0; bb <= a; ++bb) {
            b[depth] = bb;
            Coeff next = coeff_scale(cur, double(binomial(a, bb)));
            coeff_mul_xi_pow(next, se.site, a - bb, xi[std::size_t(se.site)]);
            self(self, depth + 1, next);
        }
    };
    emit(emit, 0, base);
}

void merge_into(std::map<MultiIndex, Coeff>& dst, const std::map<MultiIndex, Coeff>& src) {
    for (auto& [mi, c] : src) {
        auto [it, fresh] = dst.try_emplace(mi, c);
        if (!fresh) {
            it->second.v += c.v;
            if (it->second.g && c.g)
                for (std::size_t i = 0; i < it->second.g->size(); ++i)
                    (*it->second.g)[i] += (*c.g)[i];
            else if (it->second.g || c.g)
                it->second.g.reset();
        }
    }
}

}  // namespace

RecenteredPoly center(std::span<const HomogeneousPoly> parts,
                      std::shared_ptr<const LatticeBall> ball, std::vector<double> xi,
                      bool want_grad) {
    if (int(xi.size()) != ball->site_count())
        throw std::invalid_argument("center: xi size differs from ball");
    RecenteredPoly out;
    out.ball = ball;
    out.xi = xi;
    const int dim = ball->dim;
    std::vector<SiteExp> sites;
    for (const HomogeneousPoly& p : parts) {
        for (auto& [key, c] : p.coeffs) {
            const int slots = int(key.size()) / dim;
            // tuple profile: 1-based odd slots carry u, even slots carry conj u
            std::map<int, std::pair<int, int>> prof;  // site -> (o, e)
            for (int j = 0; j < slots; ++j) {
                std::span<const int> site{key.data() + std::size_t(j) * dim,
                                          std::size_t(dim)};
                int idx = ball->index_of(site);
                if (idx < 0) throw std::invalid_argument("center: tuple site outside ball");
                if (j % 2 == 0)
                    ++prof[idx].first;
                else
                    ++prof[idx].second;
            }
            sites.clear();
            for (auto& [site, oe] : prof) sites.push_back({site, oe.first, oe.second, 0});
            Coeff base;
            base.v = c;
            if (want_grad) base.g.emplace(std::size_t(ball->site_count()), cplx{});
            add_expanded(out.terms, sites, base, out.xi);
        }
    }
    out.prune(0.0);
    return out;
}

RecenteredPoly center(const HomogeneousPoly& p, std::shared_ptr<const LatticeBall> ball,
                      std::vector<double> xi, bool want_grad) {
    return center(std::span<const HomogeneousPoly>{&p, 1}, std::move(ball), std::move(xi),
                  want_grad);
}

cplx evaluate(const RecenteredPoly& p, const FourierState& u) {
    if (!same_ball(*p.ball, *u.ball)) throw std::invalid_argument("evaluate: ball mismatch");
    cplx total{};
    for (auto& [mi, c] : p.terms) {
        cplx z = c.v;
        for (auto& [s, x] : mi.k)
            for (int i = 0; i < x; ++i) z *= u.amps[std::size_t(s)];
        for (auto& [s, x] : mi.l)
            for (int i = 0; i < x; ++i) z *= std::conj(u.amps[std::size_t(s)]);
        for (auto& [s, x] : mi.m) {
            double y = std::norm(u.amps[std::size_t(s)]) - p.xi[std::size_t(s)];
            for (int i = 0; i < x; ++i) z *= y;
        }
        total += z;
    }
    return total;
}

namespace {

// all bracket contributions of one term pair, re-centered
void bracket_pair(std::map<MultiIndex, Coeff>& out, const MultiIndex& a, const Coeff& ca,
                  const MultiIndex& b, const Coeff& cb, const std::vector<double>& xi) {
    // merged support
    std::vector<int> supp;
    auto collect = [&](const ExpList& e) {
        for (auto& [s, x] : e) supp.push_back(s);
    };
    collect(a.k);
    collect(a.l);
    collect(a.m);
    collect(b.k);
    collect(b.l);
    collect(b.m);
    std::sort(supp.begin(), supp.end());
    supp.erase(std::unique(supp.begin(), supp.end()), supp.end());

    Coeff prod = coeff_mul(ca, cb);
    std::vector<SiteExp> sites(supp.size());
    for (std::size_t i = 0; i < supp.size(); ++i) {
        int s = supp[i];
        sites[i] = {s, exp_of(a.k, s) + exp_of(b.k, s), exp_of(a.l, s) + exp_of(b.l, s),
                    exp_of(a.m, s) + exp_of(b.m, s)};
    }

    std::vector<SiteExp> work;
    for (std::size_t i = 0; i < supp.size(); ++i) {
        int s = supp[i];
        int kn = exp_of(a.k, s), ln = exp_of(a.l, s), mn = exp_of(a.m, s);
        int kn2 = exp_of(b.k, s), ln2 = exp_of(b.l, s), mn2 = exp_of(b.m, s);

        // a pair (u_n, conj u_n) goes away
        int f1 = kn2 * ln - kn * ln2;
        if (f1 != 0) {
            work = sites;
            work[i].K -= 1;
            work[i].L -= 1;
            add_expanded(out, work, coeff_scale(prod, cplx(0, 2.0 * f1)), xi);
        }
        // a factor y_n goes away
        int f2 = mn * (kn2 - ln2) + mn2 * (ln - kn);
        if (f2 != 0) {
            work = sites;
            work[i].M -= 1;
            add_expanded(out, work, coeff_scale(prod, cplx(0, 2.0 * f2)), xi);
        }
    }
}

RecenteredPoly bracket_impl(const RecenteredPoly& p, const RecenteredPoly& q, bool parallel) {
    if (!same_ball(*p.ball, *q.ball))
        throw std::invalid_argument("poisson_bracket: ball mismatch");
    if (p.xi != q.xi) throw std::invalid_argument("poisson_bracket: xi mismatch");

    std::vector<const std::pair<const MultiIndex, Coeff>*> pa, qa;
    pa.reserve(p.terms.size());
    qa.reserve(q.terms.size());
    for (auto& t : p.terms) pa.push_back(&t);
    for (auto& t : q.terms) qa.push_back(&t);

    const int np = int(pa.size());
    std::vector<std::map<MultiIndex, Coeff>> rows(std::size_t(std::max(np, 1)));

#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (int i = 0; i < np; ++i) {
        auto& row = rows[std::size_t(i)];
        for (auto* tq : qa) bracket_pair(row, pa[std::size_t(i)]->first,
                                         pa[std::size_t(i)]->second, tq->first, tq->second,
                                         p.xi);
    }

    RecenteredPoly out;
    out.ball = p.ball;
    out.xi = p.xi;
    for (auto& row : rows) merge_into(out.terms, row);
    out.prune(0.0);
    return out;
}

}  // namespace

RecenteredPoly poisson_bracket(const RecenteredPoly& p, const RecenteredPoly& q) {
    return bracket_impl(p, q, true);
}

RecenteredPoly poisson_bracket_serial(const RecenteredPoly& p, const RecenteredPoly& q) {
    return bracket_impl(p, q, false);
}

FourierState gradient_eval(const RecenteredPoly& p, const FourierState& u) {
    if (!same_ball(*p.ball, *u.ball))
        throw std::invalid_argument("gradient_eval: ball mismatch");
    FourierState g;
    g.ball = u.ball;
    g.t = u.t;
    g.amps.assign(u.amps.size(), cplx{});

    // product of the term's factors with one exponent lowered at `site`
    auto partial = [&](const MultiIndex& mi, int site, bool lower_l, bool lower_m) {
        cplx z = 1.0;
        for (auto& [s, x] : mi.k)
            for (int i = 0; i < x; ++i) z *= u.amps[std::size_t(s)];
        for (auto& [s, x] : mi.l) {
            int e = x - ((lower_l && s == site) ? 1 : 0);
            for (int i = 0; i < e; ++i) z *= std::conj(u.amps[std::size_t(s)]);
        }
        for (auto& [s, x] : mi.m) {
            int e = x - ((lower_m && s == site) ? 1 : 0);
            double y = std::norm(u.amps[std::size_t(s)]) - p.xi[std::size_t(s)];
            for (int i = 0; i < e; ++i) z *= y;
        }
        return z;
    };

    for (auto& [mi, c] : p.terms) {
        for (auto& [s, x] : mi.l)
            g.amps[std::size_t(s)] += 2.0 * c.v * double(x) * partial(mi, s, true, false);
        for (auto& [s, x] : mi.m)
            g.amps[std::size_t(s)] +=
                2.0 * c.v * double(x) * u.amps[std::size_t(s)] * partial(mi, s, false, true);
    }
    return g;
}

double WeightSystem::log_weight(const MultiIndex& mi, const LatticeBall& ball, int alpha,
                                int order) const {
    double lw = (order == 0 ? -6.0 : -4.0) * sched.s * sched.logN(alpha) +
                (order == 0 ? 6.0 : 4.0) * std::log(sched.eta());
    for (auto& [s, x] : mi.m) lw += x * logD(alpha);
    for (auto& [s, x] : mi.k) lw += x * logC(alpha, site_bracket(ball.site(s)));
    for (auto& [s, x] : mi.l) lw += x * logC(alpha, site_bracket(ball.site(s)));
    return lw;
}

double weight_of(const WeightSystem& ws, const MultiIndex& mi, const LatticeBall& ball,
                 int alpha, int order) {
    return ws.weight(mi, ball, alpha, order);
}

void accumulate(RecenteredPoly& dst, const RecenteredPoly& src, cplx factor) {
    for (auto& [mi, c] : src.terms) dst.add_term(mi, coeff_scale(c, factor));
}

NormReport norms(const RecenteredPoly& p, const WeightSystem& ws, int alpha) {
    NormReport rep;
    bool all_grads = true;
    double ly = -std::numeric_limits<double>::infinity();
    double lz = ly, lyl = ly, lzl = ly;
    for (auto& [mi, c] : p.terms) {
        double lv = std::log(std::abs(c.v));
        double lw0 = ws.log_weight(mi, *p.ball, alpha, 0);
        if (lv - lw0 > ly) {
            ly = lv - lw0;
            rep.arg_ysup = mi;
        }
        lz = std::max(lz, lv);
        if (c.g) {
            double lw1 = ws.log_weight(mi, *p.ball, alpha, 1);
            for (auto& gv : *c.g) {
                double lg = std::log(std::abs(gv));
                lyl = std::max(lyl, lg - lw1);
                lzl = std::max(lzl, lg);
            }
        } else {
            all_grads = false;
        }
    }
    rep.log_ysup = ly;
    rep.ysup = std::isfinite(ly) ? std::exp(ly) : 0.0;
    rep.zsup = std::isfinite(lz) ? std::exp(lz) : 0.0;
    if (all_grads && !p.terms.empty()) {
        rep.ylip = std::isfinite(lyl) ? std::exp(lyl) : 0.0;
        rep.zlip = std::isfinite(lzl) ? std::exp(lzl) : 0.0;
    }
    if (p.terms.empty()) {
        rep.ylip = 0.0;
        rep.zlip = 0.0;
    }
    return rep;
}

NormReport norms(std::span<const RecenteredPoly> xi_samples, const WeightSystem& ws,
                 int alpha) {
    NormReport rep;
    rep.ylip = 0.0;
    rep.zlip = 0.0;
    for (const auto& p : xi_samples) {
        NormReport r = norms(p, ws, alpha);
        if (r.log_ysup > rep.log_ysup) {
            rep.log_ysup = r.log_ysup;
            rep.ysup = r.ysup;
            rep.arg_ysup = r.arg_ysup;
        }
        rep.zsup = std::max(rep.zsup, r.zsup);
        if (r.ylip && rep.ylip)
            rep.ylip = std::max(*rep.ylip, *r.ylip);
        else
            rep.ylip.reset();
        if (r.zlip && rep.zlip)
            rep.zlip = std::max(*rep.zlip, *r.zlip);
        else
            rep.zlip.reset();
    }
    return rep;
}

bool in_lambda(const MultiIndex& mi, const LatticeBall& ball, const ParamSchedule& sched,
               int alpha) {
    if (mi.integrable()) return false;
    return n_minus(mi, ball) < sched.N(alpha);
}

RecenteredPoly project_scale(const RecenteredPoly& p, const ParamSchedule& sched, int alpha,
                             ScaleMode mode, int degree_2q) {
    RecenteredPoly out;
    out.ball = p.ball;
    out.xi = p.xi;
    for (auto& [mi, c] : p.terms) {
        bool keep = false;
        switch (mode) {
            case ScaleMode::InsideLambda: keep = in_lambda(mi, *p.ball, sched, alpha); break;
            case ScaleMode::OutsideLambda: keep = !in_lambda(mi, *p.ball, sched, alpha); break;
            case ScaleMode::DegreeEq: keep = mi.degree() == degree_2q; break;
            case ScaleMode::DegreeLe: keep = mi.degree() <= degree_2q; break;
        }
        if (keep) out.terms.emplace(mi, c);
    }
    return out;
}

bool in_annulus(const FourierState& u, std::span<const double> xi, double s, double eps,
                double n_alpha) {
    const LatticeBall& ball = *u.ball;
    KahanSum acc;
    for (int i = 0; i < ball.site_count(); ++i) {
        double w = std::pow(sq(site_bracket(ball.site(i))), s);
        acc.add(w * std::abs(std::norm(u.amps[std::size_t(i)]) - xi[std::size_t(i)]));
    }
    double budget = std::pow(eps, 2.2) * std::pow(n_alpha, -2.0 * s);
    return acc.value() <= budget && hs_norm(u.amps, ball, s) <= 20.0 * eps;
}

VfDiagnostic vector_field_diagnostic(const RecenteredPoly& p, const WeightSystem& ws,
                                     int alpha, std::span<const FourierState> u_samples) {
    VfDiagnostic diag;
    NormReport nr = norms(p, ws, alpha);
    if (p.terms.empty()) {
        diag.max_ratio = 0.0;
        diag.accepted = int(u_samples.size());
        return diag;
    }
    const double s = ws.sched.s;
    const double eps = ws.sched.epsilon;
    const double denom_scale = nr.ysup * std::pow(ws.sched.N(alpha), -4.0 * s) *
                               std::pow(eps, 4.0 - 0.25);
    double best = -1;
    for (const FourierState& u : u_samples) {
        if (!in_annulus(u, p.xi, s, eps, ws.sched.N(alpha))) {
            ++diag.rejected;
            continue;
        }
        ++diag.accepted;
        FourierState g = gradient_eval(p, u);
        double num = hs_norm(g.amps, *p.ball, s);
        double den = denom_scale * hs_norm(u.amps, *p.ball, s);
        if (den > 0) best = std::max(best, num / den);
    }
    if (diag.accepted > 0) diag.max_ratio = std::max(best, 0.0);
    return diag;
}

std::vector<KlPattern> enumerate_kl_patterns(const LatticeBall& ball, int max_kl_degree,
                                             double nminus_below, double cap) {
    const int ns = ball.site_count();
    const int dim = ball.dim;

    // suffix maxima of |n_i| for momentum pruning
    std::vector<int> sufmax(std::size_t((ns + 1) * dim), 0);
    for (int i = ns - 1; i >= 0; --i) {
        auto site = ball.site(i);
        for (int c = 0; c < dim; ++c) {
            int below = sufmax[std::size_t((i + 1) * dim + c)];
            sufmax[std::size_t(i * dim + c)] =
                std::max(below, std::abs(site[std::size_t(c)]));
        }
    }

    std::vector<KlPattern> out;
    std::vector<int> cvec(std::size_t(ns), 0);
    double visited = 0;

    auto rec = [&](auto&& self, int i, int budget, int csum,
                   std::vector<long long>& mom) -> void {
        if (++visited > cap)
            throw enumeration_cap_error("enumerate_kl_patterns: cap exceeded", visited);
        if (i == ns) {
            if (csum != 0) return;
            bool zero_mom = true, nonzero = false;
            for (int c = 0; c < dim; ++c) zero_mom &= (mom[std::size_t(c)] == 0);
            for (int v : cvec) nonzero |= (v != 0);
            if (!zero_mom || !nonzero) return;
            KlPattern pat;
            double nm = std::numeric_limits<double>::infinity();
            for (int sidx = 0; sidx < ns; ++sidx) {
                int v = cvec[std::size_t(sidx)];
                if (v > 0) pat.k.emplace_back(sidx, v);
                if (v < 0) pat.l.emplace_back(sidx, -v);
                if (v != 0) {
                    pat.kl_degree += std::abs(v);
                    nm = std::min(nm, site_norm(ball.site(sidx)));
                }
            }
            pat.nm_norm = nm;
            pat.nm_bracket = std::sqrt(1.0 + nm * nm);
            if (pat.nm_norm < nminus_below) out.push_back(std::move(pat));
            return;
        }
        // prune: remaining assignments can shift csum by at most `budget`
        if (std::abs(csum) > budget) return;
        for (int c = 0; c < dim; ++c) {
            long long reach = (long long)budget * sufmax[std::size_t(i * dim + c)];
            if (std::llabs(mom[std::size_t(c)]) > reach) return;
        }
        auto site = ball.site(i);
        for (int v = -budget; v <= budget; ++v) {
            cvec[std::size_t(i)] = v;
            for (int c = 0; c < dim; ++c)
                mom[std::size_t(c)] += (long long)v * site[std::size_t(c)];
            self(self, i + 1, budget - std::abs(v), csum + v, mom);
            for (int c = 0; c < dim; ++c)
                mom[std::size_t(c)] -= (long long)v * site[std::size_t(c)];
        }
        cvec[std::size_t(i)] = 0;
    };

    std::vector<long long> mom(std::size_t(dim), 0);
    rec(rec, 0, max_kl_degree, 0, mom);
    return out;
}

double pattern_resonance(const KlPattern& pat, std::span<const double> omega) {
    double s = 0;
    for (auto& [site, x] : pat.k) s += x * omega[std::size_t(site)];
    for (auto& [site, x] : pat.l) s -= x * omega[std::size_t(site)];
    return s;
}

double max_unmodulated_resonance(const RecenteredPoly& p, std::span<const double> lambda2) {
    double mx = 0;
    for (auto& [mi, c] : p.terms) {
        if (c.v == cplx{}) continue;
        double s = 0;
        for (auto& [site, x] : mi.k) s += x * lambda2[std::size_t(site)];
        for (auto& [site, x] : mi.l) s -= x * lambda2[std::size_t(site)];
        mx = std::max(mx, std::abs(s));
    }
    return mx;
}

}  // namespace flatnf
