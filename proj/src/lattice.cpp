#include "flatnf/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace flatnf {

void TorusMetric::validate() const {
    if (dim <= 0 || G.size() != std::size_t(dim) * dim)
        throw std::invalid_argument("TorusMetric: bad dimension");
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            if (at(i, j) != at(j, i))
                throw std::invalid_argument("TorusMetric: G not symmetric");
    // leading principal minors, Gaussian elimination without pivoting
    std::vector<double> A = G;
    for (int k = 0; k < dim; ++k) {
        double piv = A[std::size_t(k) * dim + k];
        if (!(piv > 0)) throw std::invalid_argument("TorusMetric: G not positive definite");
        for (int i = k + 1; i < dim; ++i) {
            double f = A[std::size_t(i) * dim + k] / piv;
            for (int j = k; j < dim; ++j)
                A[std::size_t(i) * dim + j] -= f * A[std::size_t(k) * dim + j];
        }
    }
}

TorusMetric TorusMetric::square(int d) {
    TorusMetric m;
    m.dim = d;
    m.G.assign(std::size_t(d) * d, 0.0);
    for (int i = 0; i < d; ++i) m.G[std::size_t(i) * d + i] = 1.0;
    m.tau_star = 4.0;
    return m;
}

TorusMetric TorusMetric::admissible_example() {
    const double r2 = std::sqrt(2.0);
    TorusMetric m;
    m.dim = 2;
    m.G = {1.0, r2, r2, 3.0};
    m.tau_star = 4.0;
    return m;
}

double g_form(const TorusMetric& m, std::span<const int> a, std::span<const int> b) {
    if (int(a.size()) != m.dim || int(b.size()) != m.dim)
        throw std::invalid_argument("g_form: dimension mismatch");
    double s = 0;
    for (int i = 0; i < m.dim; ++i) {
        double row = 0;
        for (int j = 0; j < m.dim; ++j) row += m.at(i, j) * b[j];
        s += a[i] * row;
    }
    return s;
}

double frequency(const TorusMetric& m, std::span<const int> n) { return g_form(m, n, n); }

int LatticeBall::index_of(std::span<const int> n) const {
    long long key = 0;
    const int K = box_radius_;
    const long long w = 2LL * K + 1;
    for (int i = 0; i < dim; ++i) {
        if (n[i] < -K || n[i] > K) return -1;
        key = key * w + (n[i] + K);
    }
    return index_[std::size_t(key)];
}

std::shared_ptr<const LatticeBall> LatticeBall::make(int dim, double M) {
    if (dim <= 0) throw std::invalid_argument("LatticeBall: dim must be positive");
    if (!(M >= 0)) throw std::invalid_argument("LatticeBall: M must be nonnegative");
    auto ball = std::make_shared<LatticeBall>();
    ball->dim = dim;
    ball->M = M;
    const int K = int(std::floor(M));
    ball->box_radius_ = K;
    double boxsize = std::pow(2.0 * K + 1, dim);
    if (boxsize > double(1 << 26))
        throw enumeration_cap_error("LatticeBall: lookup table too large", boxsize);
    ball->index_.assign(std::size_t(boxsize), -1);

    // lexicographic odometer over the bounding box
    std::vector<int> n(std::size_t(dim), -K);
    const double M2 = M * M;
    while (true) {
        double r2 = 0;
        for (int c : n) r2 += double(c) * c;
        if (r2 <= M2) {
            long long key = 0;
            const long long w = 2LL * K + 1;
            for (int i = 0; i < dim; ++i) key = key * w + (n[i] + K);
            ball->index_[std::size_t(key)] = ball->site_count();
            ball->coords.insert(ball->coords.end(), n.begin(), n.end());
        }
        int i = dim - 1;
        while (i >= 0 && n[std::size_t(i)] == K) n[std::size_t(i--)] = -K;
        if (i < 0) break;
        ++n[std::size_t(i)];
    }
    return ball;
}

bool same_ball(const LatticeBall& a, const LatticeBall& b) {
    return &a == &b || (a.dim == b.dim && a.M == b.M && a.coords == b.coords);
}

std::vector<double> frequency_table(const TorusMetric& m, const LatticeBall& ball) {
    if (m.dim != ball.dim) throw std::invalid_argument("frequency_table: dimension mismatch");
    std::vector<double> t(std::size_t(ball.site_count()));
    for (int i = 0; i < ball.site_count(); ++i) t[std::size_t(i)] = frequency(m, ball.site(i));
    return t;
}

namespace {

struct ScanAcc {
    double min_value = std::numeric_limits<double>::infinity();
    int arg_a = -1, arg_b = -1;
    std::vector<std::pair<int, int>> zeros;
    std::uint64_t zero_count = 0;

    void consider(double v, int ia, int ib) {
        if (v < min_value || (v == min_value && std::pair(ia, ib) < std::pair(arg_a, arg_b))) {
            min_value = v;
            arg_a = ia;
            arg_b = ib;
        }
    }
};

AdmissibilityReport scan_impl(const TorusMetric& m, double M, std::size_t zero_cap,
                              bool parallel) {
    m.validate();
    auto ball = LatticeBall::make(m.dim, M);
    const int ns = ball->site_count();
    std::vector<int> nonzero;
    nonzero.reserve(std::size_t(ns));
    for (int i = 0; i < ns; ++i) {
        bool z = true;
        for (int c : ball->site(i))
            if (c != 0) z = false;
        if (!z) nonzero.push_back(i);
    }
    double ginf = 0;
    for (double g : m.G) ginf = std::max(ginf, std::abs(g));
    const double tau = m.tau_star;

    const int na = int(nonzero.size());
    std::vector<ScanAcc> acc(parallel ? std::size_t(std::max(1, na)) : 1);

#pragma omp parallel for schedule(static) if (parallel)
    for (int ii = 0; ii < na; ++ii) {
        ScanAcc& a = acc[parallel ? std::size_t(ii) : 0];
        const int ia = nonzero[std::size_t(ii)];
        auto sa = ball->site(ia);
        const double norm_a = site_norm(sa);
        for (int jj = 0; jj < na; ++jj) {
            const int ib = nonzero[std::size_t(jj)];
            auto sb = ball->site(ib);
            const double norm_b = site_norm(sb);
            const double g = g_form(m, sa, sb);
            const double ag = std::abs(g);
            if (ag <= 1e-14 * ginf * norm_a * norm_b) {
                ++a.zero_count;
                if (a.zeros.size() < zero_cap) a.zeros.emplace_back(ia, ib);
                a.consider(0.0, ia, ib);
            } else {
                a.consider(ag * std::pow(norm_a, tau) * std::pow(norm_b, tau), ia, ib);
            }
        }
    }

    ScanAcc total;
    for (const ScanAcc& a : acc) {
        if (a.arg_a >= 0) total.consider(a.min_value, a.arg_a, a.arg_b);
        total.zero_count += a.zero_count;
        for (auto& z : a.zeros) {
            if (total.zeros.size() < zero_cap) total.zeros.push_back(z);
        }
    }

    AdmissibilityReport rep;
    rep.M = M;
    rep.tau_star = tau;
    rep.min_value = total.arg_a < 0 ? 0.0 : total.min_value;
    if (total.arg_a >= 0) {
        auto sa = ball->site(total.arg_a);
        auto sb = ball->site(total.arg_b);
        rep.argmin_a.assign(sa.begin(), sa.end());
        rep.argmin_b.assign(sb.begin(), sb.end());
    }
    rep.zero_hit_count = total.zero_count;
    rep.zero_hits_truncated = total.zero_count > total.zeros.size();
    for (auto& [ia, ib] : total.zeros) {
        auto sa = ball->site(ia);
        auto sb = ball->site(ib);
        rep.zero_hits.emplace_back(std::vector<int>(sa.begin(), sa.end()),
                                   std::vector<int>(sb.begin(), sb.end()));
    }
    return rep;
}

}  // namespace

AdmissibilityReport admissibility_scan(const TorusMetric& m, double M, std::size_t zero_cap) {
    return scan_impl(m, M, zero_cap, true);
}

AdmissibilityReport admissibility_scan_serial(const TorusMetric& m, double M,
                                              std::size_t zero_cap) {
    return scan_impl(m, M, zero_cap, false);
}

}  // namespace flatnf
