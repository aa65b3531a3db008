#pragma once

#include <map>
#include <memory>
#include <optional>

#include "flatnf/lattice.hpp"
#include "flatnf/resonance.hpp"

namespace flatnf {

// sparse exponent list over ball site indices; sorted, exponents > 0
using ExpList = std::vector<std::pair<int, int>>;

int exp_of(const ExpList& e, int site);
void bump_exp(ExpList& e, int site, int delta);

// Monomial u^k ubar^l y^m with the non-pairing condition k_n l_n = 0.
struct MultiIndex {
    ExpList k, l, m;

    int degree() const;
    bool integrable() const { return k.empty() && l.empty(); }
    bool non_pairing() const;
    auto operator<=>(const MultiIndex&) const = default;
};

// Euclidean size of the smallest unpaired site; +inf when integrable.
double n_minus(const MultiIndex& mi, const LatticeBall& ball);
// Sobolev weight <n> of that site (>= 1); +inf when integrable.
double n_minus_bracket(const MultiIndex& mi, const LatticeBall& ball);

// Coefficient value with an optional dense gradient in the modulation
// parameters xi (one entry per ball site).
struct Coeff {
    cplx v{};
    std::optional<std::vector<cplx>> g;

    bool has_grad() const { return g.has_value(); }
};

struct FourierState {
    std::shared_ptr<const LatticeBall> ball;
    std::vector<cplx> amps;
    double t = 0;
};

double hs_norm(std::span<const cplx> amps, const LatticeBall& ball, double s);
double l2_norm_sq(std::span<const cplx> amps);

// Sparse polynomial in the variables (u_n, conj u_n, y_n = |u_n|^2 - xi_n)
// evaluated at a fixed numeric xi.
struct RecenteredPoly {
    std::shared_ptr<const LatticeBall> ball;
    std::vector<double> xi;
    std::map<MultiIndex, Coeff> terms;

    void add_term(const MultiIndex& mi, const Coeff& c);
    void prune(double floor = 0.0);
    int max_degree() const;
    bool grads_present() const;
};

// epsilon-indexed parameter book: scales, small constants, caps.
struct ParamSchedule {
    double epsilon = 0.1;
    double s = 2.0;
    int r = 1;
    double c_const = 40.0;  // drift constant in eps_alpha
    int rbar_cap = 8;       // degree cap standing in for the formal tail order
    double gamma_override = 0;  // 0 = the default epsilon^{1/30}

    double eta() const { return std::pow(epsilon, 1.0 - 0.01); }
    int beta() const { return 100 * r; }
    double tau() const { return s / (1000.0 * r); }
    double logN(int alpha) const { return -double(alpha) * std::log(epsilon) / (200.0 * s); }
    double N(int alpha) const { return std::exp(logN(alpha)); }
    double gamma() const {
        return gamma_override > 0 ? gamma_override : std::pow(epsilon, 1.0 / 30.0);
    }
    double gamma_of(int alpha) const { return std::ldexp(gamma(), 2 * alpha); }
    double eps_alpha(int alpha) const {
        return 10.0 * epsilon - c_const * alpha * r * std::pow(epsilon, 1.5);
    }
    void validate() const;
};

// Scale-dependent coefficient weights. C uses min(<n>, N_alpha) with the
// Sobolev weight <n> >= 1 so the origin site carries a nonzero weight.
struct WeightSystem {
    ParamSchedule sched;

    double logD(int alpha) const {
        return -(2.0 + 0.2) * std::log(sched.eta()) + 2.0 * sched.s * sched.logN(alpha);
    }
    double logC(int alpha, double bracket_n) const {
        double mn = std::min(bracket_n, sched.N(alpha));
        return -std::log(sched.eta()) + sched.s * std::log(mn) + sched.tau() * sched.logN(alpha);
    }
    double log_weight(const MultiIndex& mi, const LatticeBall& ball, int alpha,
                      int order) const;
    double weight(const MultiIndex& mi, const LatticeBall& ball, int alpha, int order) const {
        return std::exp(log_weight(mi, ball, alpha, order));
    }
};

// T_{-xi} expansion of homogeneous tuple polynomials: every paired factor
// |u_n|^{2a} becomes sum_b binom(a,b) xi_n^{a-b} y_n^b.
RecenteredPoly center(std::span<const HomogeneousPoly> parts,
                      std::shared_ptr<const LatticeBall> ball, std::vector<double> xi,
                      bool want_grad = true);
RecenteredPoly center(const HomogeneousPoly& p, std::shared_ptr<const LatticeBall> ball,
                      std::vector<double> xi, bool want_grad = true);

cplx evaluate(const RecenteredPoly& p, const FourierState& u);

// Canonical bracket: pair-kill and action-kill terms per shared site, with
// re-pairings re-centered through binomials in xi. Gradients propagate by
// the product rule when both inputs carry them.
RecenteredPoly poisson_bracket(const RecenteredPoly& p, const RecenteredPoly& q);
RecenteredPoly poisson_bracket_serial(const RecenteredPoly& p, const RecenteredPoly& q);

// (grad p)_n = 2 d/d(conj u_n) p, assembled by direct products (no division).
FourierState gradient_eval(const RecenteredPoly& p, const FourierState& u);

double weight_of(const WeightSystem& ws, const MultiIndex& mi, const LatticeBall& ball,
                 int alpha, int order);

// dst += factor * src (gradients included when both sides carry them)
void accumulate(RecenteredPoly& dst, const RecenteredPoly& src, cplx factor = 1.0);

struct NormReport {
    double ysup = 0, zsup = 0;
    std::optional<double> ylip, zlip;
    double log_ysup = -std::numeric_limits<double>::infinity();
    MultiIndex arg_ysup;  // dominant multi-index for diagnostics
};
NormReport norms(const RecenteredPoly& p, const WeightSystem& ws, int alpha);
// max over a family of polynomials built at different xi samples
NormReport norms(std::span<const RecenteredPoly> xi_samples, const WeightSystem& ws,
                 int alpha);

enum class ScaleMode { InsideLambda, OutsideLambda, DegreeEq, DegreeLe };

bool in_lambda(const MultiIndex& mi, const LatticeBall& ball, const ParamSchedule& sched,
               int alpha);
RecenteredPoly project_scale(const RecenteredPoly& p, const ParamSchedule& sched, int alpha,
                             ScaleMode mode, int degree_2q = 0);

bool in_annulus(const FourierState& u, std::span<const double> xi, double s, double eps,
                double n_alpha);

struct VfDiagnostic {
    std::optional<double> max_ratio;
    int accepted = 0, rejected = 0;
};
VfDiagnostic vector_field_diagnostic(const RecenteredPoly& p, const WeightSystem& ws,
                                     int alpha, std::span<const FourierState> u_samples);

// Distinct non-integrable (k,l) patterns with zero momentum and equal
// u / conj-u counts; m = 0 representatives (m only raises the degree and
// leaves the resonance and n_minus unchanged).
struct KlPattern {
    ExpList k, l;
    int kl_degree = 0;
    double nm_norm = 0;     // |n| of smallest unpaired site
    double nm_bracket = 1;  // <n> of that site
};
std::vector<KlPattern> enumerate_kl_patterns(
    const LatticeBall& ball, int max_kl_degree,
    double nminus_below = std::numeric_limits<double>::infinity(), double cap = 2e7);

double pattern_resonance(const KlPattern& pat, std::span<const double> omega);

// Largest |sum (k-l)_n lambda_n^2| over the stored multi-indices; the
// additivity budget tracked across brackets.
double max_unmodulated_resonance(const RecenteredPoly& p, std::span<const double> lambda2);

}  // namespace flatnf
