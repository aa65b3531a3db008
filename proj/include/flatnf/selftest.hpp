#pragma once

#include "flatnf/polyalg.hpp"
#include "flatnf/rng.hpp"

namespace flatnf {

// Random reality-respecting polynomial on momentum-balanced multi-indices.
RecenteredPoly random_poly(std::shared_ptr<const LatticeBall> ball, std::vector<double> xi,
                           int max_deg, int pattern_count, const CounterRng& rng,
                           std::uint64_t stream, bool want_grad, bool with_integrable);

FourierState random_state(std::shared_ptr<const LatticeBall> ball, double scale,
                          const CounterRng& rng, std::uint64_t stream);

struct SelftestResult {
    int passed = 0;
    int failed = 0;
    std::vector<std::string> lines;
};

// Compact oracle-equivalence suite behind `flatnf selftest`.
SelftestResult run_selftest(std::uint64_t seed);

}  // namespace flatnf
