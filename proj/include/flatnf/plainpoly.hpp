#pragma once

#include "flatnf/polyalg.hpp"

namespace flatnf {

// Reference engine: everything expanded into plain monomials u^K conj(u)^L
// with pairing allowed. Deliberately naive and kept independent of the
// canonical calculus so the two can cross-check each other.
struct PlainPoly {
    std::shared_ptr<const LatticeBall> ball;
    std::map<std::pair<ExpList, ExpList>, cplx> terms;  // (K, L) -> coeff
};

PlainPoly expand_plain(const RecenteredPoly& p);
PlainPoly plain_bracket(const PlainPoly& p, const PlainPoly& q);
RecenteredPoly recenter_plain(const PlainPoly& p, std::vector<double> xi);
cplx evaluate_plain(const PlainPoly& p, const FourierState& u);

}  // namespace flatnf
