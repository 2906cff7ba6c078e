#pragma once

// Topological pressure with certified two-sided bounds, the singularity
// dimension bracket (zero of the pressure), perturbation intervals, and
// finite-level Gibbs/Lyapunov diagnostics.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kakeya/conditions.hpp"
#include "kakeya/ifs.hpp"

namespace kakeya {

struct PressureBound {
    double t = 0.0;
    int level = 0;
    double upper = 0.0;       // (1/n) log sum_{|w|=n} phi^t(A_w)
    double lower = 0.0;       // upper - log(d_constant)/n
    double d_constant = 1.0;  // supermultiplicativity constant, >= 1 (inf disables lower)
};

// Level sums run as streaming log-sum-exp with compensated accumulation,
// parallelized over a fixed first-symbols partition tree so results are
// identical for every thread count.
PressureBound pressure_bounds(const IfsSystem& sys, double t, int level, double d_constant,
                              int threads = 1, std::uint64_t budget = kDefaultCylinderBudget);

struct PressureInterval {
    double lo = 0.0;
    double hi = 0.0;
};

// Certified enclosure of P(t) from ratio bounds of the positive transfer
// operator (L f)(u) = sum_i |det A_i|^p |A_i u|^e f(A_i u / |A_i u|) with the
// test function f = L^depth 1, evaluated on a direction grid over the cone
// with a rigorous Lipschitz slack. Requires an invariant cone. For t > 2 the
// pressure is exactly log sum |det A_i|^(t/2).
PressureInterval pressure_ratio_bounds(const IfsSystem& sys, double t, const Cone& cone, int depth,
                                       int grid, int threads = 1);

struct DimensionBracket {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double tol = 0.0;
    bool tolerance_met = false;
    bool lower_certified = true;  // false: no usable lower bound, t_lo stays at 0
    std::string method;           // "exact-multiplicative" | "perron-ratio" | "level-sum"
    int level = 0;                // level-sum level n, or transfer-operator depth
    int grid = 0;                 // ratio method direction-grid size
    double d_constant = 1.0;      // constant used by the level-sum certificate
};

struct BracketOptions {
    double tol = 1e-2;
    std::uint64_t max_cylinders = kDefaultCylinderBudget;
    int max_level = 24;   // cap for level-sum escalation
    int max_depth = 14;   // cap for transfer-operator test-function depth
    int max_grid = 1 << 15;
    int threads = 1;
    std::optional<double> d_constant;  // force the level-sum method with this constant
};

// Bisection on t with certified bounds: t_hi is a tested t with a
// nonpositive upper bound, t_lo one with a nonnegative lower bound
// (monotone pressure makes these a bracket of the zero). Method selection:
// a forced d_constant or an exactly-multiplicative family uses level sums;
// systems with an invariant cone use the transfer-operator ratio bounds;
// otherwise the bracket is upper-bound-only and flagged.
DimensionBracket dimension_bracket(const IfsSystem& sys, const BracketOptions& opts = {});

struct PerturbationBounds {
    double eps = 0.0;
    double eps1 = 0.0;     // eps / min coefficient
    double eps2 = 0.0;     // 8 eps / min |det|
    double t_cap = 0.0;    // max(2 log kappa / |log d_prime|, 2)
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double shift_lo = 0.0;  // -log lambda2
    double shift_hi = 0.0;  // -log lambda1
};

// Certified pressure-shift interval for any eps-perturbation of a strictly
// one-signed system: P_A(s) lands in [shift_lo, shift_hi] whenever s is the
// pressure zero of a system within eps of A entrywise.
PerturbationBounds perturbation_bounds(const IfsSystem& sys, double eps, double d_prime);

struct GibbsReport {
    double t = 0.0;
    int level = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    bool table_mode = false;            // full level-n weight table vs sequential sampling
    std::vector<double> weights;        // populated only when kappa^n <= 4096
    double lyapunov1 = 0.0;             // exp(mean of (1/n) log alpha1)
    double lyapunov2 = 0.0;
    double stderr1 = 0.0;               // standard error of the per-step log
    double stderr2 = 0.0;
    double gamma1 = 0.0;                // log lambda_k / log(lambda1 lambda2^(t-1))
    double gamma2 = 0.0;
    double quasi_mult_worst = 1.0;      // min phi(A_uv) / (phi(A_u) phi(A_v)) over sampled splits
};

GibbsReport gibbs_report(const IfsSystem& sys, double t, int level, std::uint64_t samples,
                         std::uint64_t seed, std::uint64_t budget = kDefaultCylinderBudget);

// D = 1 for families whose singular value function is exactly
// multiplicative: all maps conformal, or all maps diagonal with a consistent
// dominant entry. nullopt otherwise.
std::optional<double> exact_multiplicative_d(const IfsSystem& sys);

}  // namespace kakeya
