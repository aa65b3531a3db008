#pragma once

#include <functional>

#include "flatnf/polyalg.hpp"

namespace flatnf {

// Modulated frequencies omega_n(xi) at a fixed xi, with optional Jacobian
// d omega_n / d xi_k.
struct FrequencyVector {
    std::vector<double> omega;
    std::optional<std::vector<std::vector<double>>> grad;  // [n][k]

    bool has_grad() const { return grad.has_value(); }
};

// smooth bump: 1 on |x|<=1/2, 0 on |x|>=1, strictly between elsewhere
double bump(double x);
double bump_deriv(double x);

struct CutoffResult {
    double h = 1.0;
    std::optional<std::vector<double>> grad;
    int zero_factors = 0;       // factors that vanish exactly
    double min_abs_arg = 0;     // smallest |argument| seen over the family
    std::size_t family_size = 0;
};

// h = prod over the Lambda_{alpha+1} pattern family, degree <= cap, of
// (1 - bump(gamma(alpha)^-1 <n_->^{2s} eps^-2 Omega_n(omega))). Factors are
// taken once per distinct (k,l) pattern.
CutoffResult cutoff_eval(const ParamSchedule& sched, const FrequencyVector& omega,
                         int alpha, const LatticeBall& ball, int degree_cap);
CutoffResult cutoff_eval(const ParamSchedule& sched, const FrequencyVector& omega,
                         int alpha, std::span<const KlPattern> family);

// chi with coefficients (i/2) h Q_n / Omega_n on Lambda_{alpha+1}, zero
// elsewhere; solves Q + {Z2(omega), chi} = (Id - h Pi_Lambda) Q exactly.
RecenteredPoly solve_cohomological(const RecenteredPoly& Q, const FrequencyVector& omega,
                                   const ParamSchedule& sched, int alpha,
                                   const CutoffResult& h);

// Z2 = sum_n omega_n y_n as a polynomial (for residual checks and flows).
RecenteredPoly quadratic_part(const FrequencyVector& omega,
                              std::shared_ptr<const LatticeBall> ball,
                              std::vector<double> xi);

struct RemainderEntry {
    std::string kind;
    int degree = 0;
    double ysup = 0, zsup = 0;
    bool evaluable = false;
    RecenteredPoly poly;  // kept when evaluable
};

struct NormalFormState {
    int alpha = 0;
    int steps_done = 0;  // j within the current scale
    FrequencyVector omega;
    RecenteredPoly Z4;  // integrable quartic
    RecenteredPoly Q;   // degree >= 6 tail
    std::vector<RemainderEntry> remainder_log;
    ParamSchedule schedule;
    std::vector<double> xi;
    std::shared_ptr<const LatticeBall> ball;
    std::vector<double> lambda2;
    double resonance_budget = 0;  // additive kappa bookkeeping
    bool quartic_anomaly = false; // non-integrable quartic routed to remainder
    std::vector<RecenteredPoly> chi_history;
    std::vector<double> omega_initial;  // for drift reports

    RecenteredPoly total_hamiltonian() const;  // Z2 + Z4 + Q
};

// Re-centers 2*Hlo around xi: quadratic part = sum lambda^2 |u|^2, diagonal
// quartic -(f'(0)/2) sum |u|^4, plus the supplied tails (tuples, degree>=6).
NormalFormState init_normal_form(const TorusMetric& metric,
                                 std::shared_ptr<const LatticeBall> ball,
                                 const ParamSchedule& sched, std::vector<double> xi,
                                 double fprime0,
                                 std::span<const HomogeneousPoly> extras = {},
                                 bool want_grad = true);

struct LieStepReport {
    double ysup_lambda_before = 0, ysup_lambda_after = 0;
    double ysup_Q_after = 0;
    double h_value = 1.0;
    double max_freq_shift = 0;
    int new_remainder_entries = 0;
};

// One homogeneity step: chi = L(Q), Taylor/ad expansion to expansion_order,
// reassembly of Z2/Z4/Q, degree-0 and degree>cap terms logged.
NormalFormState lie_step(const NormalFormState& state, int expansion_order, int degree_cap,
                         LieStepReport* report = nullptr);

struct ScaleAdvanceReport {
    double moved_ysup = 0;          // Lambda residue moved to the remainder
    double freq_drift = 0;          // max |omega - omega at scale entry|
    double freq_drift_budget = 0;   // N_alpha^{-4s} eps^3
};

NormalFormState scale_advance(const NormalFormState& state,
                              ScaleAdvanceReport* report = nullptr);

// Quasi-resonant normal form of Z2 + sum P^(2j) in the tuple representation,
// processed degree by degree through the re-centered engine at xi = 0.
struct BirkhoffResult {
    std::vector<RecenteredPoly> chi;      // per processed degree
    std::vector<RecenteredPoly> Q;        // kappa-resonant output per degree
    RecenteredPoly remainder;             // degrees beyond the cap
    double kappa = 0;
};
BirkhoffResult birkhoff_truncated(std::span<const HomogeneousPoly> parts,
                                  const TorusMetric& metric,
                                  std::shared_ptr<const LatticeBall> ball, double kappa,
                                  int degree_cap);

// Adaptive embedded RK flow of i du/dt = grad chi(u).
FourierState poly_flow(const RecenteredPoly& chi, const FourierState& u0, double t,
                       double tol);

// Finite-difference estimate of |dPhi^t - Id| over the probe directions.
double flow_differential_check(const RecenteredPoly& chi, const FourierState& u, double t,
                               std::span<const FourierState> probes, double tol = 1e-10);

}  // namespace flatnf
