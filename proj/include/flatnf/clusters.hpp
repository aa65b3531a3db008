#pragma once

#include <memory>

#include "flatnf/lattice.hpp"

namespace flatnf {

// Partition of the ball into frequency clusters: connected components of
// the closeness graph |n1-n2| + |l1^2-l2^2| <= (|n1|+|n2|)^delta, with every
// component touching {|n| < 2} merged into a distinguished bounded class.
struct ClusterPartition {
    std::shared_ptr<const LatticeBall> ball;
    double delta = 0;
    std::vector<std::vector<int>> classes;  // site indices per class
    std::vector<int> class_of;              // site index -> class id
    std::vector<double> m_of;               // class id -> min |n|
    int bounded_class = -1;
    bool dyadic_ok = false;  // max |n| <= 2 min |n| for every non-bounded class
};

ClusterPartition build_partition(const TorusMetric& m,
                                 std::shared_ptr<const LatticeBall> ball, double delta);

struct PartitionReport {
    bool dyadic_ok = false;
    bool separation_ok = false;
    // cross-class pair minimizing lhs - rhs of the separation inequality
    int worst_a = -1, worst_b = -1;
    double worst_margin = 0;
};

PartitionReport verify_partition(const ClusterPartition& p, const TorusMetric& m);

// S_c = sum_{n in c} |u_n|^2, indexed by class id.
std::vector<double> super_actions(std::span<const cplx> amps, const ClusterPartition& p);

}  // namespace flatnf
