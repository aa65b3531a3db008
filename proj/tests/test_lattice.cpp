#include <doctest.h>

#include "flatnf/lattice.hpp"
#include "flatnf/rng.hpp"

using namespace flatnf;

TEST_CASE("metric form and frequencies") {
    auto m = TorusMetric::admissible_example();
    std::vector<int> a{1, 0}, b{0, 1}, n11{1, 1}, zero{0, 0};

    CHECK(g_form(m, a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(g_form(m, zero, b) == 0.0);
    CHECK(frequency(m, n11) == doctest::Approx(4.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(frequency(m, zero) == 0.0);

    auto sq2 = TorusMetric::square(2);
    CHECK(g_form(sq2, a, b) == 0.0);
    std::vector<int> n34{3, 4};
    CHECK(frequency(sq2, n34) == doctest::Approx(25.0));

    std::vector<int> bad{1};
    CHECK_THROWS_AS((void)g_form(m, bad, b), std::invalid_argument);
}

TEST_CASE("g symmetry and positivity over the ball") {
    auto m = TorusMetric::admissible_example();
    auto ball = LatticeBall::make(2, 5.0);
    CounterRng rng(1);
    for (int t = 0; t < 200; ++t) {
        int i = int(rng.word(1, std::uint64_t(t)) % std::uint64_t(ball->site_count()));
        int j = int(rng.word(2, std::uint64_t(t)) % std::uint64_t(ball->site_count()));
        CHECK(g_form(m, ball->site(i), ball->site(j)) ==
              doctest::Approx(g_form(m, ball->site(j), ball->site(i))).epsilon(1e-13));
    }
    for (int i = 0; i < ball->site_count(); ++i) {
        bool origin = site_norm(ball->site(i)) == 0.0;
        if (!origin) CHECK(frequency(m, ball->site(i)) > 0.0);
    }
}

TEST_CASE("metric validation") {
    TorusMetric bad;
    bad.dim = 2;
    bad.G = {1.0, 2.0, 0.5, 3.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    TorusMetric indef;
    indef.dim = 2;
    indef.G = {1.0, 2.0, 2.0, 1.0};  // det < 0
    CHECK_THROWS_AS(indef.validate(), std::invalid_argument);
    CHECK_NOTHROW(TorusMetric::admissible_example().validate());
}

TEST_CASE("lattice ball enumeration") {
    auto b1 = LatticeBall::make(1, 2.0);
    CHECK(b1->site_count() == 5);
    auto b2 = LatticeBall::make(2, 2.0);
    CHECK(b2->site_count() == 13);  // |n| <= 2 in Z^2
    CHECK(b1->site(0)[0] == -2);
    CHECK(b1->site(4)[0] == 2);
    std::vector<int> probe{1, -1};
    CHECK(b2->index_of(probe) >= 0);
    std::vector<int> outside{3, 0};
    CHECK(b2->index_of(outside) == -1);
}

TEST_CASE("square torus scan reports exact zeros") {
    auto rep = admissibility_scan(TorusMetric::square(2), 2.0);
    CHECK(rep.min_value == 0.0);
    CHECK(!rep.zero_hits.empty());
    bool found = false;
    for (auto& [a, b] : rep.zero_hits)
        if (a == std::vector<int>{1, 0} && b == std::vector<int>{0, 1}) found = true;
    CHECK(found);
}

TEST_CASE("admissible example has no zeros up to 8") {
    auto rep = admissibility_scan(TorusMetric::admissible_example(), 8.0);
    CHECK(rep.zero_hits.empty());
    CHECK(rep.min_value > 0.0);
}

TEST_CASE("rational degeneracy at every M >= 2") {
    for (double M : {2.0, 3.0, 4.0}) {
        auto rep = admissibility_scan(TorusMetric::square(2), M);
        CHECK(rep.zero_hit_count > 0);
    }
}

TEST_CASE("one dimensional scan at M=1 returns the metric entry") {
    TorusMetric m;
    m.dim = 1;
    m.G = {0.73};
    m.tau_star = 4.0;
    auto rep = admissibility_scan(m, 1.0);
    // only a,b = +-1 occur and |a| = |b| = 1
    CHECK(rep.min_value == doctest::Approx(0.73).epsilon(1e-15));
}

TEST_CASE("admissible example nonzero through M=12") {
    auto rep = admissibility_scan(TorusMetric::admissible_example(), 12.0);
    CHECK(rep.zero_hit_count == 0);
    CHECK(rep.min_value > 0.0);
}
