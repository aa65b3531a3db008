#pragma once

#include <doctest.h>

#include "flatnf/selftest.hpp"

namespace testutil {

using namespace flatnf;

inline double max_coeff(const RecenteredPoly& p) {
    double m = 0;
    for (auto& [mi, c] : p.terms) m = std::max(m, std::abs(c.v));
    return m;
}

// largest coefficient difference over the union of supports
inline double coeff_distance(const RecenteredPoly& a, const RecenteredPoly& b) {
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

// supports compared after thresholding both sides by the same floor
inline bool same_support(const RecenteredPoly& a, const RecenteredPoly& b, double floor) {
    auto keys = [&](const RecenteredPoly& p) {
        std::vector<MultiIndex> k;
        for (auto& [mi, c] : p.terms)
            if (std::abs(c.v) > floor) k.push_back(mi);
        return k;
    };
    return keys(a) == keys(b);
}

inline std::vector<double> random_xi(const LatticeBall& ball, double scale,
                                     const CounterRng& rng, std::uint64_t stream) {
    std::vector<double> xi(std::size_t(ball.site_count()));
    for (std::size_t i = 0; i < xi.size(); ++i)
        xi[i] = scale * (0.2 + 0.8 * rng.u01(stream, i)) /
                std::pow(sq(site_bracket(ball.site(int(i)))), 1.0);
    return xi;
}

// state with actions near xi, inside the scale-alpha annulus
inline FourierState annulus_state(std::shared_ptr<const LatticeBall> ball,
                                  std::span<const double> xi, double s, double eps,
                                  double n_alpha, const CounterRng& rng,
                                  std::uint64_t stream) {
    FourierState u;
    u.ball = ball;
    const int ns = ball->site_count();
    u.amps.resize(std::size_t(ns));
    double budget = std::pow(eps, 2.2) * std::pow(n_alpha, -2.0 * s);
    for (int i = 0; i < ns; ++i) {
        double w = std::pow(sq(site_bracket(ball->site(i))), s);
        double jit = budget / (2.0 * ns * w);
        double a2 = std::max(0.0, xi[std::size_t(i)] + jit * rng.sym(stream, std::uint64_t(i)));
        double ph = 6.283185307179586 * rng.u01(stream + 1, std::uint64_t(i));
        u.amps[std::size_t(i)] = std::sqrt(a2) * cplx(std::cos(ph), std::sin(ph));
    }
    return u;
}

}  // namespace testutil
