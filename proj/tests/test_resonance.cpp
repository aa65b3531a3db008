#include <doctest.h>

#include "flatnf/resonance.hpp"
#include "flatnf/rng.hpp"

using namespace flatnf;

namespace {

MultiVector quartet(std::initializer_list<std::vector<int>> entries) {
    MultiVector v;
    v.q = int(entries.size()) / 2;
    for (auto& e : entries) v.flat.insert(v.flat.end(), e.begin(), e.end());
    return v;
}

}  // namespace

TEST_CASE("enumeration counts") {
    auto b1 = LatticeBall::make(1, 1.0);
    auto pairs = enumerate_multivectors(1, *b1);
    CHECK(pairs.size() == 3);  // (n,n) for n in {-1,0,1}
    for (auto& v : pairs) CHECK(v.flat[0] == v.flat[1]);

    auto quads = enumerate_multivectors(2, *b1);
    // brute force over 3^4 with n1-n2+n3-n4 = 0
    int count = 0;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c)
                for (int d = -1; d <= 1; ++d)
                    if (a - b + c - d == 0) ++count;
    CHECK(count == 19);
    CHECK(int(quads.size()) == count);

    auto b2 = LatticeBall::make(2, 1.0);
    auto quads2 = enumerate_multivectors(2, *b2);
    int count2 = 0;
    const int ns = b2->site_count();
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j)
            for (int k = 0; k < ns; ++k)
                for (int l = 0; l < ns; ++l) {
                    bool zero = true;
                    for (int c = 0; c < 2; ++c)
                        if (b2->site(i)[c] - b2->site(j)[c] + b2->site(k)[c] -
                                b2->site(l)[c] !=
                            0)
                            zero = false;
                    if (zero) ++count2;
                }
    CHECK(int(quads2.size()) == count2);

    for (auto& v : quads2) CHECK(zero_momentum(v, 2));
}

TEST_CASE("enumeration cap guard") {
    auto big = LatticeBall::make(2, 8.0);
    CHECK_THROWS_AS((void)enumerate_multivectors(3, *big, 1e6), enumeration_cap_error);
}

TEST_CASE("resonance values") {
    auto v = quartet({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    CHECK(resonance_value(TorusMetric::square(2), v) == doctest::Approx(0.0));
    CHECK(resonance_value(TorusMetric::admissible_example(), v) ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    auto paired = quartet({{2, 1}, {2, 1}, {-1, 3}, {-1, 3}});
    CHECK(resonance_value(TorusMetric::admissible_example(), paired) == doctest::Approx(0.0));
}

TEST_CASE("slot swap negates the resonance") {
    auto ball = LatticeBall::make(2, 2.0);
    auto m = TorusMetric::admissible_example();
    for (auto& v : enumerate_multivectors(2, *ball)) {
        MultiVector w = v;
        // swap odd and even slots pairwise
        for (int j = 0; j + 1 < v.slots(); j += 2)
            for (int c = 0; c < 2; ++c)
                std::swap(w.flat[std::size_t(2 * j + c)], w.flat[std::size_t(2 * (j + 1) + c)]);
        CHECK(resonance_value(m, w) == doctest::Approx(-resonance_value(m, v)).epsilon(1e-12));
    }
}

TEST_CASE("four wave identity and triviality") {
    auto m = TorusMetric::admissible_example();
    auto triv = quartet({{1, 2}, {1, 2}, {0, -1}, {0, -1}});
    auto fw = four_wave_check(m, triv);
    CHECK(fw.trivial);
    CHECK(fw.omega == doctest::Approx(0.0));

    auto rect = quartet({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    auto fw2 = four_wave_check(TorusMetric::square(2), rect);
    CHECK(!fw2.trivial);
    CHECK(fw2.omega == doctest::Approx(0.0));
    CHECK(fw2.identity_residual <= 1e-12);

    // 1e4 random zero-momentum quartets, |n| <= 20
    CounterRng rng(2);
    for (int t = 0; t < 10000; ++t) {
        MultiVector v;
        v.q = 2;
        std::vector<int> n4(2, 0);
        for (int slot = 0; slot < 3; ++slot) {
            for (int c = 0; c < 2; ++c) {
                int x = int(rng.word(std::uint64_t(slot + 1), std::uint64_t(2 * t + c)) % 41) - 20;
                v.flat.push_back(x);
                n4[std::size_t(c)] += (slot % 2 == 0 ? x : -x);
            }
        }
        v.flat.push_back(n4[0]);
        v.flat.push_back(n4[1]);
        auto r = four_wave_check(m, v);
        CHECK(r.identity_residual <= 1e-12 * (1.0 + std::abs(r.omega)));
    }
}

TEST_CASE("quartet scan matches rectangle oracle on the square torus") {
    auto ball = LatticeBall::make(2, 3.0);
    auto m = TorusMetric::square(2);
    QuartetScan sc = scan_quartets(m, *ball, 1.0);  // min nonzero |Omega| is 2
    CHECK(sc.min_nonzero_abs_omega == doctest::Approx(2.0));
    CHECK(sc.nontrivial_below_threshold == count_rectangles(*ball));
    CHECK(sc.nontrivial_below_threshold > 0);
}

TEST_CASE("nontrivial quartets on the admissible torus stay away from resonance") {
    auto ball = LatticeBall::make(2, 6.0);
    auto m = TorusMetric::admissible_example();
    QuartetScan sc = scan_quartets(m, *ball, 0.0);
    CHECK(sc.min_nonzero_abs_omega > 0.0);
    QuartetScan sc2 = scan_quartets(m, *ball, sc.min_nonzero_abs_omega / 2.0);
    CHECK(sc2.nontrivial_below_threshold == 0);
}

TEST_CASE("kappa filter") {
    auto ball = LatticeBall::make(2, 2.0);
    auto m = TorusMetric::square(2);
    HomogeneousPoly p = HomogeneousPoly::constant_on(2, *ball, 1.0);

    SUBCASE("kappa above the range keeps everything") {
        double mx = max_abs_resonance(p, m);
        auto q = kappa_filter(p, m, mx + 1.0);
        CHECK(q.coeffs.size() == p.coeffs.size());
    }
    SUBCASE("small kappa on the square torus keeps exactly Omega = 0") {
        auto q = kappa_filter(p, m, 1e-9);
        // survivors are rectangles plus trivial pairings
        std::size_t expected = 0;
        for (auto& [key, c] : p.coeffs) {
            MultiVector v;
            v.q = 2;
            v.flat = key;
            if (std::abs(resonance_value(m, v)) < 1e-15) ++expected;
        }
        CHECK(q.coeffs.size() == expected);
        CHECK(max_abs_resonance(q, m) <= 1e-9);
    }
    SUBCASE("idempotent and monotone in kappa") {
        auto q1 = kappa_filter(p, m, 1.0);
        auto q1b = kappa_filter(q1, m, 1.0);
        CHECK(q1.coeffs == q1b.coeffs);
        auto q2 = kappa_filter(p, m, 3.0);
        CHECK(q1.coeffs.size() <= q2.coeffs.size());
        for (auto& [key, c] : q1.coeffs) CHECK(q2.coeffs.count(key) == 1);
    }
    SUBCASE("admissible torus below the quartic gap keeps only trivial pairings") {
        auto ma = TorusMetric::admissible_example();
        QuartetScan sc = scan_quartets(ma, *ball, 0.0);
        auto q = kappa_filter(p, ma, sc.min_nonzero_abs_omega / 2.0);
        for (auto& [key, c] : q.coeffs) {
            MultiVector v;
            v.q = 2;
            v.flat = key;
            CHECK(four_wave_check(ma, v).trivial);
        }
    }
}
