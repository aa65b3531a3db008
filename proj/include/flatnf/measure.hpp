#pragma once

#include <functional>

#include "flatnf/normalform.hpp"

namespace flatnf {

struct NonResonanceSpec {
    double gamma = 0.1;
    double epsilon = 0.1;
    double s = 2.0;
    int degree_cap = 6;
    // restrict the pattern family to n_minus < nminus_below (Lambda-style)
    double nminus_below = std::numeric_limits<double>::infinity();

    void validate() const {
        if (!(gamma > 0 && gamma < 1))
            throw std::invalid_argument("NonResonanceSpec: gamma in (0,1)");
        if (!(epsilon > 0)) throw std::invalid_argument("NonResonanceSpec: epsilon > 0");
    }
};

struct BallVolume {
    double value_nfact = 0;   // pi^N rho^2N / N! * prod <n>^-2s
    double value_n1fact = 0;  // same with (N+1)! in the denominator
    double log_nfact = 0;
    double log_n1fact = 0;
};

// Closed-form Lebesgue volume of {sum <n>^2s |u_n|^2 < rho^2} in C^N,
// evaluated in log space. Both factorial normalizations are emitted; the
// Monte Carlo oracle arbitrates between them.
BallVolume ball_volume(const LatticeBall& ball, double s, double rho);

// i.i.d. uniform samples on the open ellipsoid, reproducible under seed.
std::vector<FourierState> sample_ball(std::shared_ptr<const LatticeBall> ball, double s,
                                      double rho, int count, std::uint64_t seed);

struct NonResTest {
    bool pass = false;
    KlPattern worst;
    double worst_margin = 0;  // min |Omega| <n_->^2s over the family
};

NonResTest nonresonance_test(std::span<const double> xi, const FrequencyVector& omega,
                             const NonResonanceSpec& spec,
                             std::span<const KlPattern> patterns);

using FrequencyMap =
    std::function<std::vector<double>(std::span<const double> /*xi*/)>;

// default modulation omega_n(xi) = lambda_n^2 + xi_n
FrequencyMap default_modulation(const TorusMetric& m, const LatticeBall& ball);

struct FractionReport {
    double fraction = 0;
    double wilson_lo = 0, wilson_hi = 0;
    double paper_bound = 0;  // 1 - gamma * eps^{-1e-4}
    bool bound_vacuous = false;
    std::uint64_t seed = 0;
    int samples = 0;
    int passes = 0;
};

FractionReport nonresonant_fraction(const TorusMetric& m,
                                    std::shared_ptr<const LatticeBall> ball, double s,
                                    double epsilon, const NonResonanceSpec& spec, int count,
                                    std::uint64_t seed, const FrequencyMap& freq);
FractionReport nonresonant_fraction_serial(const TorusMetric& m,
                                           std::shared_ptr<const LatticeBall> ball, double s,
                                           double epsilon, const NonResonanceSpec& spec,
                                           int count, std::uint64_t seed,
                                           const FrequencyMap& freq);

std::pair<double, double> wilson_interval(int passes, int n);  // 95%

}  // namespace flatnf
