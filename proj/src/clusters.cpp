#include "flatnf/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flatnf {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(std::size_t(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[std::size_t(a)] != a) {
            parent[std::size_t(a)] = parent[std::size_t(parent[std::size_t(a)])];
            a = parent[std::size_t(a)];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::size_t(std::max(a, b))] = std::min(a, b);
    }
};

double pair_lhs(const LatticeBall& ball, std::span<const double> lam, int i, int j) {
    auto a = ball.site(i), b = ball.site(j);
    double d2 = 0;
    for (int c = 0; c < ball.dim; ++c) d2 += sq(double(a[std::size_t(c)] - b[std::size_t(c)]));
    return std::sqrt(d2) + std::abs(lam[std::size_t(i)] - lam[std::size_t(j)]);
}

double pair_rhs(const LatticeBall& ball, double delta, int i, int j) {
    return std::pow(site_norm(ball.site(i)) + site_norm(ball.site(j)), delta);
}

}  // namespace

ClusterPartition build_partition(const TorusMetric& m,
                                 std::shared_ptr<const LatticeBall> ball, double delta) {
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("build_partition: delta in (0,1)");
    const int ns = ball->site_count();
    std::vector<double> lam = frequency_table(m, *ball);

    // closeness edges, gathered in parallel and merged sequentially
    std::vector<std::vector<std::pair<int, int>>> edges{std::size_t(ns)};
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < ns; ++i) {
        for (int j = i + 1; j < ns; ++j) {
            if (pair_lhs(*ball, lam, i, j) <= pair_rhs(*ball, delta, i, j))
                edges[std::size_t(i)].emplace_back(i, j);
        }
    }
    UnionFind uf(ns);
    for (auto& es : edges)
        for (auto& [i, j] : es) uf.unite(i, j);

    // merge every component holding a site with |n| < 2 into the bounded class
    int seed = -1;
    for (int i = 0; i < ns; ++i) {
        if (site_norm(ball->site(i)) < 2.0) {
            if (seed < 0) seed = i;
            uf.unite(seed, i);
        }
    }

    ClusterPartition p;
    p.ball = ball;
    p.delta = delta;
    p.class_of.assign(std::size_t(ns), -1);
    std::vector<int> root_class(std::size_t(ns), -1);
    for (int i = 0; i < ns; ++i) {
        int r = uf.find(i);
        if (root_class[std::size_t(r)] < 0) {
            root_class[std::size_t(r)] = int(p.classes.size());
            p.classes.emplace_back();
        }
        int cid = root_class[std::size_t(r)];
        p.class_of[std::size_t(i)] = cid;
        p.classes[std::size_t(cid)].push_back(i);
    }
    if (seed >= 0) p.bounded_class = p.class_of[std::size_t(seed)];

    p.m_of.assign(p.classes.size(), 0.0);
    p.dyadic_ok = true;
    for (std::size_t c = 0; c < p.classes.size(); ++c) {
        double mn = std::numeric_limits<double>::infinity(), mx = 0;
        for (int i : p.classes[c]) {
            double r = site_norm(ball->site(i));
            mn = std::min(mn, r);
            mx = std::max(mx, r);
        }
        p.m_of[c] = mn;
        if (int(c) != p.bounded_class && mx > 2.0 * mn) p.dyadic_ok = false;
    }
    return p;
}

PartitionReport verify_partition(const ClusterPartition& p, const TorusMetric& m) {
    const LatticeBall& ball = *p.ball;
    const int ns = ball.site_count();
    std::vector<double> lam = frequency_table(m, ball);

    PartitionReport rep;
    rep.dyadic_ok = true;
    for (std::size_t c = 0; c < p.classes.size(); ++c) {
        if (int(c) == p.bounded_class) continue;
        double mn = std::numeric_limits<double>::infinity(), mx = 0;
        for (int i : p.classes[c]) {
            double r = site_norm(ball.site(i));
            mn = std::min(mn, r);
            mx = std::max(mx, r);
        }
        if (mx > 2.0 * mn) rep.dyadic_ok = false;
    }

    rep.separation_ok = true;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ns; ++i) {
        for (int j = i + 1; j < ns; ++j) {
            if (p.class_of[std::size_t(i)] == p.class_of[std::size_t(j)]) continue;
            double margin = pair_lhs(ball, lam, i, j) - pair_rhs(ball, p.delta, i, j);
            if (margin <= 0) rep.separation_ok = false;
            if (margin < worst) {
                worst = margin;
                rep.worst_a = i;
                rep.worst_b = j;
            }
        }
    }
    rep.worst_margin = std::isfinite(worst) ? worst : 0.0;
    return rep;
}

std::vector<double> super_actions(std::span<const cplx> amps, const ClusterPartition& p) {
    if (int(amps.size()) != p.ball->site_count())
        throw std::invalid_argument("super_actions: state/partition ball mismatch");
    std::vector<double> s(p.classes.size(), 0.0);
    for (std::size_t c = 0; c < p.classes.size(); ++c) {
        KahanSum acc;
        for (int i : p.classes[c]) acc.add(std::norm(amps[std::size_t(i)]));
        s[c] = acc.value();
    }
    return s;
}

}  // namespace flatnf
