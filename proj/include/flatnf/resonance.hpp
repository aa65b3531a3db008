#pragma once

#include <map>

#include "flatnf/lattice.hpp"

namespace flatnf {

// Ordered tuple (n_1,...,n_2q) with vanishing alternating sum.
struct MultiVector {
    int q = 0;
    std::vector<int> flat;  // 2q sites, dim ints each

    int slots() const { return 2 * q; }
    std::span<const int> entry(int i, int dim) const {
        return {flat.data() + std::size_t(i) * dim, std::size_t(dim)};
    }
};

bool zero_momentum(const MultiVector& v, int dim);

// All tuples in ball^2q with zero momentum, lexicographic order. Refuses
// when the projected enumeration size exceeds `cap`.
std::vector<MultiVector> enumerate_multivectors(int q, const LatticeBall& ball,
                                                double cap = 5e7);

double resonance_value(const TorusMetric& m, const MultiVector& v);

struct FourWave {
    double omega = 0;
    double identity_residual = 0;  // |omega - 2 g(n1-n2, n1-n4)|
    bool trivial = false;          // {n1,n3} == {n2,n4} as multisets
};
FourWave four_wave_check(const TorusMetric& m, const MultiVector& v);

// Degree-2q real polynomial in the tuple representation; coefficients keyed
// by the ordered tuple. Symmetry/reality are invariants of the stored data,
// checked by the tests rather than enforced structurally.
struct HomogeneousPoly {
    int q = 0;
    double support_radius = 0;
    std::map<std::vector<int>, cplx> coeffs;  // key = flattened tuple

    static HomogeneousPoly constant_on(int q, const LatticeBall& ball, cplx value,
                                       double cap = 5e7);
};

// Keeps exactly the coefficients with |Omega| <= kappa.
HomogeneousPoly kappa_filter(const HomogeneousPoly& p, const TorusMetric& m, double kappa);

double max_abs_resonance(const HomogeneousPoly& p, const TorusMetric& m);

// Streaming exhaustive scan over zero-momentum quartets in the ball.
struct QuartetScan {
    std::uint64_t total = 0;
    std::uint64_t nontrivial = 0;
    std::uint64_t nontrivial_below_threshold = 0;  // |Omega| <= threshold
    double min_nonzero_abs_omega = 0;              // over nontrivial quartets
    double max_identity_residual = 0;
    double threshold = 0;
};
QuartetScan scan_quartets(const TorusMetric& m, const LatticeBall& ball, double threshold);
QuartetScan scan_quartets_serial(const TorusMetric& m, const LatticeBall& ball,
                                 double threshold);

// Geometric oracle for the square torus: nontrivial quartets with
// (n1-n2).(n1-n4) == 0 in exact integer arithmetic.
std::uint64_t count_rectangles(const LatticeBall& ball);

}  // namespace flatnf
