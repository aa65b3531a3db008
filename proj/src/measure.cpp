#include "flatnf/measure.hpp"

#include <algorithm>
#include <cmath>

#include "flatnf/rng.hpp"

namespace flatnf {

BallVolume ball_volume(const LatticeBall& ball, double s, double rho) {
    if (!(rho > 0)) throw std::invalid_argument("ball_volume: rho > 0");
    const int N = ball.site_count();
    double lw = 0;
    for (int i = 0; i < N; ++i) lw += -2.0 * s * std::log(site_bracket(ball.site(i)));
    const double pi = 3.14159265358979323846;
    double base = N * std::log(pi) + 2.0 * N * std::log(rho) + lw;
    BallVolume v;
    v.log_nfact = base - std::lgamma(double(N) + 1.0);
    v.log_n1fact = base - std::lgamma(double(N) + 2.0);
    v.value_nfact = std::exp(v.log_nfact);
    v.value_n1fact = std::exp(v.log_n1fact);
    return v;
}

std::vector<FourierState> sample_ball(std::shared_ptr<const LatticeBall> ball, double s,
                                      double rho, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_ball: count >= 1");
    const int N = ball->site_count();
    CounterRng rng(seed);
    std::vector<FourierState> out{std::size_t(count)};
#pragma omp parallel for schedule(static)
    for (int k = 0; k < count; ++k) {
        FourierState& u = out[std::size_t(k)];
        u.ball = ball;
        u.amps.assign(std::size_t(N), cplx{});
        // isotropic Gaussian in R^{2N}, projected to the sphere, then a
        // radius with density of the uniform ball law
        double r2 = 0;
        for (int i = 0; i < N; ++i) {
            cplx z = rng.gauss_c(std::uint64_t(k) + 1, std::uint64_t(i));
            u.amps[std::size_t(i)] = z;
            r2 += std::norm(z);
        }
        double r = std::sqrt(r2);
        double radius = std::pow(rng.u01(0, std::uint64_t(k)), 1.0 / (2.0 * N));
        for (int i = 0; i < N; ++i) {
            double w = std::pow(site_bracket(ball->site(i)), -s);
            u.amps[std::size_t(i)] *= rho * w * radius / r;
        }
    }
    return out;
}

NonResTest nonresonance_test(std::span<const double> xi, const FrequencyVector& omega,
                             const NonResonanceSpec& spec,
                             std::span<const KlPattern> patterns) {
    (void)xi;
    spec.validate();
    NonResTest t;
    double worst = std::numeric_limits<double>::infinity();
    const double thresh = spec.gamma * sq(spec.epsilon);
    for (const KlPattern& pat : patterns) {
        double margin = std::abs(pattern_resonance(pat, omega.omega)) *
                        std::pow(sq(pat.nm_bracket), spec.s);
        if (margin < worst) {
            worst = margin;
            t.worst = pat;
        }
    }
    t.worst_margin = std::isfinite(worst) ? worst : 0.0;
    t.pass = patterns.empty() ? true : (t.worst_margin > thresh);
    return t;
}

FrequencyMap default_modulation(const TorusMetric& m, const LatticeBall& ball) {
    std::vector<double> lam = frequency_table(m, ball);
    return [lam](std::span<const double> xi) {
        std::vector<double> w(lam.size());
        for (std::size_t i = 0; i < lam.size(); ++i) w[i] = lam[i] + xi[i];
        return w;
    };
}

std::pair<double, double> wilson_interval(int passes, int n) {
    if (n <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;  // 97.5% quantile
    double phat = double(passes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * sq(double(n)))) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

FractionReport fraction_impl(const TorusMetric& m, std::shared_ptr<const LatticeBall> ball,
                             double s, double epsilon, const NonResonanceSpec& spec,
                             int count, std::uint64_t seed, const FrequencyMap& freq,
                             bool parallel) {
    spec.validate();
    auto patterns = enumerate_kl_patterns(*ball, spec.degree_cap, spec.nminus_below);
    auto samples = sample_ball(ball, s, epsilon, count, seed);
    const int N = ball->site_count();

    int passes = 0;
#pragma omp parallel for schedule(static) reduction(+ : passes) if (parallel)
    for (int k = 0; k < count; ++k) {
        std::vector<double> xi(std::size_t(N), 0.0);
        for (int i = 0; i < N; ++i)
            xi[std::size_t(i)] = std::norm(samples[std::size_t(k)].amps[std::size_t(i)]);
        FrequencyVector om;
        om.omega = freq(xi);
        if (nonresonance_test(xi, om, spec, patterns).pass) ++passes;
    }

    FractionReport rep;
    rep.samples = count;
    rep.passes = passes;
    rep.seed = seed;
    rep.fraction = double(passes) / count;
    auto [lo, hi] = wilson_interval(passes, count);
    rep.wilson_lo = lo;
    rep.wilson_hi = hi;
    rep.paper_bound = 1.0 - spec.gamma * std::pow(epsilon, -1e-4);
    rep.bound_vacuous = rep.paper_bound <= 0.0;
    (void)m;
    return rep;
}

}  // namespace

FractionReport nonresonant_fraction(const TorusMetric& m,
                                    std::shared_ptr<const LatticeBall> ball, double s,
                                    double epsilon, const NonResonanceSpec& spec, int count,
                                    std::uint64_t seed, const FrequencyMap& freq) {
    return fraction_impl(m, std::move(ball), s, epsilon, spec, count, seed, freq, true);
}

FractionReport nonresonant_fraction_serial(const TorusMetric& m,
                                           std::shared_ptr<const LatticeBall> ball, double s,
                                           double epsilon, const NonResonanceSpec& spec,
                                           int count, std::uint64_t seed,
                                           const FrequencyMap& freq) {
    return fraction_impl(m, std::move(ball), s, epsilon, spec, count, seed, freq, false);
}

}  // namespace flatnf
