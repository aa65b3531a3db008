#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "flatnf/common.hpp"

namespace flatnf {

// Symmetric positive-definite metric on the lattice; the source of the
// linear frequencies lambda_n^2 = g(n,n).
struct TorusMetric {
    int dim = 0;
    std::vector<double> G;  // row-major dim x dim
    double tau_star = 0;    // Diophantine exponent used by the scans
    double c_lower = 0;     // empirical lower constant, 0 = unknown

    double at(int i, int j) const { return G[std::size_t(i) * dim + j]; }
    void validate() const;  // symmetry + positive definiteness

    static TorusMetric square(int d);
    static TorusMetric admissible_example();  // [[1,r2],[r2,3]], r2 = sqrt(2)
};

double g_form(const TorusMetric& m, std::span<const int> a, std::span<const int> b);
double frequency(const TorusMetric& m, std::span<const int> n);  // lambda_n^2

// All integer sites with |n| <= M (Euclidean), in lexicographic order so
// indices are stable across runs. Membership lookups are O(1).
struct LatticeBall {
    int dim = 0;
    double M = 0;
    std::vector<int> coords;  // site_count * dim

    int site_count() const { return int(coords.size() / std::size_t(dim)); }
    std::span<const int> site(int i) const {
        return {coords.data() + std::size_t(i) * dim, std::size_t(dim)};
    }
    // -1 when the vector lies outside the ball
    int index_of(std::span<const int> n) const;

    static std::shared_ptr<const LatticeBall> make(int dim, double M);

  private:
    int box_radius_ = 0;
    std::vector<int> index_;  // dense (2K+1)^dim lookup table
    friend std::shared_ptr<const LatticeBall> make_ball_impl(int, double);
};

bool same_ball(const LatticeBall& a, const LatticeBall& b);

std::vector<double> frequency_table(const TorusMetric& m, const LatticeBall& ball);

struct AdmissibilityReport {
    double min_value = 0;  // min |g(a,b)| * |a|^tau * |b|^tau over the range
    std::vector<int> argmin_a, argmin_b;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> zero_hits;
    bool zero_hits_truncated = false;
    std::uint64_t zero_hit_count = 0;
    double M = 0;
    double tau_star = 0;
};

// Finite-range empirical check of |g(a,b)| >= C |a|^-tau |b|^-tau; never a
// proof. Exact zeros are flagged with tolerance 1e-14 * |G|_inf * |a||b|.
AdmissibilityReport admissibility_scan(const TorusMetric& m, double M,
                                       std::size_t zero_cap = 100000);
AdmissibilityReport admissibility_scan_serial(const TorusMetric& m, double M,
                                              std::size_t zero_cap = 100000);

}  // namespace flatnf
