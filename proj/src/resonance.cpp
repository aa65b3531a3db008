#include "flatnf/resonance.hpp"

#include <algorithm>
#include <cmath>

namespace flatnf {

bool zero_momentum(const MultiVector& v, int dim) {
    for (int i = 0; i < dim; ++i) {
        long long s = 0;
        for (int j = 0; j < v.slots(); ++j) {
            int sign = (j % 2 == 0) ? 1 : -1;  // slot 1,3,... positive (1-based odd)
            s += sign * v.entry(j, dim)[std::size_t(i)];
        }
        if (s != 0) return false;
    }
    return true;
}

std::vector<MultiVector> enumerate_multivectors(int q, const LatticeBall& ball, double cap) {
    if (q < 1) throw std::invalid_argument("enumerate_multivectors: q must be >= 1");
    const int dim = ball.dim;
    const int ns = ball.site_count();
    const int free_slots = 2 * q - 1;
    double projected = std::pow(double(ns), free_slots);
    if (projected > cap)
        throw enumeration_cap_error("enumerate_multivectors: projected count " +
                                        std::to_string(projected) + " exceeds cap",
                                    projected);

    std::vector<MultiVector> out;
    std::vector<int> idx(std::size_t(free_slots), 0);
    std::vector<int> last(std::size_t(dim), 0);
    while (true) {
        // solve the last slot from zero momentum: alternating sum vanishes
        for (int i = 0; i < dim; ++i) {
            long long s = 0;
            for (int j = 0; j < free_slots; ++j) {
                int sign = (j % 2 == 0) ? 1 : -1;
                s += sign * ball.site(idx[std::size_t(j)])[std::size_t(i)];
            }
            // last slot index 2q-1 (0-based) is an even-sign slot: sign -1 when
            // slots()-1 is odd, i.e. coefficient -(-1) = +; solve s - last = 0
            last[std::size_t(i)] = int(s);
        }
        int li = ball.index_of(last);
        if (li >= 0) {
            MultiVector v;
            v.q = q;
            v.flat.reserve(std::size_t(2 * q) * dim);
            for (int j = 0; j < free_slots; ++j) {
                auto s = ball.site(idx[std::size_t(j)]);
                v.flat.insert(v.flat.end(), s.begin(), s.end());
            }
            auto s = ball.site(li);
            v.flat.insert(v.flat.end(), s.begin(), s.end());
            out.push_back(std::move(v));
        }
        int j = free_slots - 1;
        while (j >= 0 && idx[std::size_t(j)] == ns - 1) idx[std::size_t(j--)] = 0;
        if (j < 0) break;
        ++idx[std::size_t(j)];
    }
    return out;
}

double resonance_value(const TorusMetric& m, const MultiVector& v) {
    double s = 0;
    for (int j = 0; j < v.slots(); ++j) {
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        s += sign * frequency(m, v.entry(j, m.dim));
    }
    return s;
}

FourWave four_wave_check(const TorusMetric& m, const MultiVector& v) {
    if (v.q != 2) throw std::invalid_argument("four_wave_check: q must be 2");
    const int d = m.dim;
    if (!zero_momentum(v, d)) throw std::invalid_argument("four_wave_check: momentum != 0");
    FourWave r;
    r.omega = resonance_value(m, v);
    std::vector<int> d12(std::size_t(d), 0), d14(std::size_t(d), 0);
    auto n1 = v.entry(0, d), n2 = v.entry(1, d), n3 = v.entry(2, d), n4 = v.entry(3, d);
    for (int i = 0; i < d; ++i) {
        d12[std::size_t(i)] = n1[std::size_t(i)] - n2[std::size_t(i)];
        d14[std::size_t(i)] = n1[std::size_t(i)] - n4[std::size_t(i)];
    }
    r.identity_residual = std::abs(r.omega - 2.0 * g_form(m, d12, d14));
    auto eq = [&](std::span<const int> a, std::span<const int> b) {
        return std::equal(a.begin(), a.end(), b.begin());
    };
    r.trivial = (eq(n1, n2) && eq(n3, n4)) || (eq(n1, n4) && eq(n3, n2));
    return r;
}

HomogeneousPoly HomogeneousPoly::constant_on(int q, const LatticeBall& ball, cplx value,
                                             double cap) {
    HomogeneousPoly p;
    p.q = q;
    p.support_radius = ball.M;
    for (auto& v : enumerate_multivectors(q, ball, cap)) p.coeffs.emplace(v.flat, value);
    return p;
}

HomogeneousPoly kappa_filter(const HomogeneousPoly& p, const TorusMetric& m, double kappa) {
    if (!(kappa > 0)) throw std::invalid_argument("kappa_filter: kappa must be > 0");
    HomogeneousPoly out;
    out.q = p.q;
    out.support_radius = p.support_radius;
    for (auto& [key, c] : p.coeffs) {
        MultiVector v;
        v.q = p.q;
        v.flat = key;
        if (std::abs(resonance_value(m, v)) <= kappa) out.coeffs.emplace(key, c);
    }
    return out;
}

double max_abs_resonance(const HomogeneousPoly& p, const TorusMetric& m) {
    double mx = 0;
    for (auto& [key, c] : p.coeffs) {
        if (c == cplx{}) continue;
        MultiVector v;
        v.q = p.q;
        v.flat = key;
        mx = std::max(mx, std::abs(resonance_value(m, v)));
    }
    return mx;
}

namespace {

struct QuartetAcc {
    std::uint64_t total = 0, nontrivial = 0, below = 0;
    double min_nonzero = std::numeric_limits<double>::infinity();
    double max_residual = 0;
};

QuartetScan quartets_impl(const TorusMetric& m, const LatticeBall& ball, double threshold,
                          bool parallel) {
    const int d = ball.dim;
    const int ns = ball.site_count();
    std::vector<double> lam = frequency_table(m, ball);
    std::vector<QuartetAcc> acc{std::size_t(ns)};

#pragma omp parallel for schedule(dynamic, 4) if (parallel)
    for (int i1 = 0; i1 < ns; ++i1) {
        QuartetAcc& a = acc[std::size_t(i1)];
        std::vector<int> n4(std::size_t(d), 0);
        auto s1 = ball.site(i1);
        for (int i2 = 0; i2 < ns; ++i2) {
            auto s2 = ball.site(i2);
            for (int i3 = 0; i3 < ns; ++i3) {
                auto s3 = ball.site(i3);
                for (int c = 0; c < d; ++c)
                    n4[std::size_t(c)] =
                        s1[std::size_t(c)] - s2[std::size_t(c)] + s3[std::size_t(c)];
                int i4 = ball.index_of(n4);
                if (i4 < 0) continue;
                ++a.total;
                double omega = lam[std::size_t(i1)] - lam[std::size_t(i2)] +
                               lam[std::size_t(i3)] - lam[std::size_t(i4)];
                bool trivial = (i1 == i2 && i3 == i4) || (i1 == i4 && i3 == i2);
                // identity residual against 2 g(n1-n2, n1-n4)
                std::vector<int> d12(std::size_t(d), 0), d14(std::size_t(d), 0);
                for (int c = 0; c < d; ++c) {
                    d12[std::size_t(c)] = s1[std::size_t(c)] - s2[std::size_t(c)];
                    d14[std::size_t(c)] = s1[std::size_t(c)] - n4[std::size_t(c)];
                }
                double res = std::abs(omega - 2.0 * g_form(m, d12, d14));
                a.max_residual = std::max(a.max_residual, res);
                if (!trivial) {
                    ++a.nontrivial;
                    double ao = std::abs(omega);
                    if (ao <= threshold) ++a.below;
                    if (ao > 0) a.min_nonzero = std::min(a.min_nonzero, ao);
                }
            }
        }
    }

    QuartetScan out;
    out.threshold = threshold;
    double mn = std::numeric_limits<double>::infinity();
    for (auto& a : acc) {
        out.total += a.total;
        out.nontrivial += a.nontrivial;
        out.nontrivial_below_threshold += a.below;
        mn = std::min(mn, a.min_nonzero);
        out.max_identity_residual = std::max(out.max_identity_residual, a.max_residual);
    }
    out.min_nonzero_abs_omega = std::isfinite(mn) ? mn : 0.0;
    return out;
}

}  // namespace

QuartetScan scan_quartets(const TorusMetric& m, const LatticeBall& ball, double threshold) {
    return quartets_impl(m, ball, threshold, true);
}

QuartetScan scan_quartets_serial(const TorusMetric& m, const LatticeBall& ball,
                                 double threshold) {
    return quartets_impl(m, ball, threshold, false);
}

std::uint64_t count_rectangles(const LatticeBall& ball) {
    const int d = ball.dim;
    const int ns = ball.site_count();
    std::uint64_t count = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : count)
    for (int i1 = 0; i1 < ns; ++i1) {
        std::vector<int> n4(std::size_t(d), 0);
        auto s1 = ball.site(i1);
        for (int i2 = 0; i2 < ns; ++i2) {
            auto s2 = ball.site(i2);
            for (int i3 = 0; i3 < ns; ++i3) {
                auto s3 = ball.site(i3);
                long long dot = 0;
                for (int c = 0; c < d; ++c) {
                    n4[std::size_t(c)] =
                        s1[std::size_t(c)] - s2[std::size_t(c)] + s3[std::size_t(c)];
                }
                int i4 = ball.index_of(n4);
                if (i4 < 0) continue;
                bool trivial = (i1 == i2 && i3 == i4) || (i1 == i4 && i3 == i2);
                if (trivial) continue;
                for (int c = 0; c < d; ++c) {
                    long long a = s1[std::size_t(c)] - s2[std::size_t(c)];
                    long long b = s1[std::size_t(c)] - n4[std::size_t(c)];
                    dot += a * b;
                }
                if (dot == 0) ++count;
            }
        }
    }
    return count;
}

}  // namespace flatnf
