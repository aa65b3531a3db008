#pragma once

#include "flatnf/clusters.hpp"
#include "flatnf/polyalg.hpp"

namespace flatnf {

// Flattened term list for the integrator's inner loop; checked against
// gradient_eval / evaluate in the tests.
struct CompiledPoly {
    struct Factor {
        int site;
        int k, l, m;
    };
    struct Term {
        cplx c;
        int begin, end;  // factor range
    };
    std::vector<Term> terms;
    std::vector<Factor> factors;
    std::vector<double> xi;

    static CompiledPoly from(const RecenteredPoly& p);
    cplx value(std::span<const cplx> amps) const;
    // out_n += 2 d/d(conj u_n); safe to call with out prefilled
    void add_gradient(std::span<const cplx> amps, std::span<cplx> out) const;
    bool empty() const { return terms.empty(); }
};

// Truncated Hamiltonian: 1/2 sum (lambda^2 - f'(0)/2 |u_n|^2) |u_n|^2 plus a
// polynomial tail.
struct HloSystem {
    std::shared_ptr<const LatticeBall> ball;
    std::vector<double> lambda2;
    double fprime0 = 0;
    RecenteredPoly tail;       // reference representation at xi = 0
    CompiledPoly tail_fast;    // streaming kernel
    bool has_tail = false;

    double energy(std::span<const cplx> amps) const;
    void gradient(std::span<const cplx> amps, std::span<cplx> out) const;
};

// Validating constructor: extras must be kappa-resonant of degree >= 6.
HloSystem build_hlo(const TorusMetric& m, std::shared_ptr<const LatticeBall> ball,
                    double fprime0, std::span<const HomogeneousPoly> extras = {},
                    double kappa = std::numeric_limits<double>::infinity());

// Internal assembly without the degree/resonance validation (used for the
// comparative experiment, whose quartic part is not diagonal).
HloSystem assemble_system(const TorusMetric& m, std::shared_ptr<const LatticeBall> ball,
                          double fprime0, std::span<const HomogeneousPoly> tail_parts);

struct ObservableRow {
    double t = 0;
    double mass = 0;
    double energy = 0;
    double hs_norm = 0;
    double action_dev = 0;       // sum <n>^2s | |u_n(t)|^2 - |u_n(0)|^2 |
    double superaction_dev = 0;  // sum m_c^2s |S_c(t) - S_c(0)|
    double recentered_sum = 0;   // sum <n>^2s | |u_n|^2 - xi_n |
};

struct ObservableSeries {
    std::vector<ObservableRow> rows;
    FourierState final_state;
    int fp_iterations_max = 0;
};

struct IntegrateOptions {
    double dt = 0.01;
    int stride = 100;     // steps between observable rows
    double fp_tol = 1e-13;
    int max_fp_iter = 500;
    double s = 2.0;
    const ClusterPartition* partition = nullptr;
    std::vector<double> xi;  // defaults to the initial actions
};

ObservableRow observables(const FourierState& u_t, const FourierState& u_0,
                          std::span<const double> xi, const ClusterPartition* partition,
                          double s, const HloSystem* H = nullptr);

// alpha-indexed membership of the re-centered action sum in the annulus
std::vector<int> annulus_membership(double recentered_sum, const ParamSchedule& sched,
                                    int alpha_max);

// Implicit midpoint with the diagonal linear part solved exactly inside the
// fixed point; mass is conserved to stagnation of the iteration.
ObservableSeries integrate(const HloSystem& H, const FourierState& u0, double T,
                           const IntegrateOptions& opt);

struct StabilityReport {
    std::vector<double> times;
    std::vector<double> action_dev_a, action_dev_b;  // admissible, square
    std::vector<double> hs_a, hs_b;
    double final_ratio = 0;  // square / admissible action deviation
};

// Same initial data integrated under both metrics with the full quartic
// interaction; reports the action-deviation curves and their ratio.
StabilityReport stability_experiment(const TorusMetric& metric_a,
                                     const TorusMetric& metric_b,
                                     std::shared_ptr<const LatticeBall> ball, double s,
                                     double epsilon, std::uint64_t seed, double T,
                                     double dt = 0.02);

}  // namespace flatnf
