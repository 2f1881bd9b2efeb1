#pragma once

// Rayleigh quotients over symmetric product-Gaussian trials and the resulting bounds on the
// critical couplings.
//
//   I^N[f] = [½∫|∇f|²] / [Σ_{i<i'} ∫|f|² R(x(i') - x(i))]
//   J^N[f] = [½∫|∇_{x(1)} f|² + ½∫|∇_{x(2)} f|²] / [∫|f|² R(x(2) - x(1))]
//
// Trial f_σ(x) = Π_i G_σ(x(i))^{1/2}, unit L² norm.

#include "bosecrit/birman_schwinger.hpp"
#include "bosecrit/mollifier.hpp"

#include <vector>

namespace bosecrit::var {

struct TrialFunction {
    double sigma = 1.0;
    int N = 2;
    int dim = 3;
};

// Validates σ > 0, N ≥ 2, d ≥ 3.
void validate(const TrialFunction& f);

// ½∫|∇_{x(i)} f|² for one particle coordinate, by quadrature of the one-dimensional factor.
double single_coordinate_energy(const TrialFunction& f);
// ½∫|∇f|² over all N coordinates.
double gradient_energy(const TrialFunction& f);
// Two-coordinate numerator of J^N.
double two_coordinate_energy(const TrialFunction& f);

// ∫|f|² R(x(2) - x(1)) = ∫ G_{2σ}(w) R(w) dw.
double pair_energy(const TrialFunction& f, const moll::RadialProfile& R);
// Σ_{i<i'} ∫|f|² R(x(i') - x(i)).
double pair_sum(const TrialFunction& f, const moll::RadialProfile& R);

// Throws NumericError (degenerate trial) when the interaction term vanishes.
double rayleigh_I(const TrialFunction& f, const moll::RadialProfile& R);
double rayleigh_J(const TrialFunction& f, const moll::RadialProfile& R);

struct WidthMinimum {
    double sigma = 0.0;
    double value = 0.0;   // min_σ J^N[f_σ]
    int evaluations = 0;
};

// Brent minimization of J^N over log σ ∈ [lo, hi].
WidthMinimum minimize_J(const moll::RadialProfile& R, int N = 2, int dim = 3, double log_lo = -4.0, double log_hi = 4.0);

struct AlphaBounds {
    std::vector<int> N;
    std::vector<double> alpha_upper;   // √(min J^N) per N
    double alpha_inf_upper = 0.0;      // √(min J²), valid for all N
    double sigma_star = 0.0;
};

AlphaBounds alpha_bounds(const moll::RadialProfile& R, int N_max = 6, int dim = 3);

struct Interval {
    double lower = 0.0, upper = 0.0;
    bool contains(double x) const { return lower <= x && x <= upper; }
    double width() const { return upper - lower; }
};

struct CriticalConstantsReport {
    double beta_L2_hat = 0.0;
    bs::BetaL2Report beta_L2;          // grid metadata
    AlphaBounds alpha;
    std::vector<int> N;
    std::vector<double> beta_Np_upper;  // upper bound of β_{N,+}
    std::vector<Interval> beta_LN;      // per N
    std::vector<double> gamma_betas;
    std::vector<Interval> gamma_star;   // per β in gamma_betas
    const char* trial_family = "product-gaussian-symmetric";
};

// Uses the Birman-Schwinger grid ladder for β̂_{L²}; γ* intervals at the given β (each < β̂).
CriticalConstantsReport critical_constants(const moll::RadialProfile& R, int N_max = 6,
                                           const std::vector<int>& ladder = {24, 32, 48},
                                           const std::vector<double>& gamma_beta_fractions = {0.25, 0.5, 0.75, 0.9});

// Assembles the report from an already computed β̂ ladder.
CriticalConstantsReport critical_constants(const bs::BetaL2Report& beta_L2, const AlphaBounds& alpha,
                                           const std::vector<double>& gamma_betas);

// [β̂/√(N-1), α̂_∞/√(N-1)] for N ≥ 3; the point {β̂} for N = 2.
Interval beta_LN_interval(int N, double beta_L2_hat, double alpha_inf_upper);

// [1 + (β̂/β)², 1 + (α̂_∞/β)²] for 0 < β < β̂.
Interval gamma_star_interval(double beta, double beta_L2_hat, double alpha_inf_upper);

// [β̂/√(γ-1), α̂_∞/√(γ-1)] for γ > 2.
Interval scaled_mollifier_bound(double gamma, double beta_L2_hat, double alpha_inf_upper);

struct ScaledAlphaCheck {
    double gamma = 0.0;
    int N = 0;                // γ ∈ (N, N+1]
    double scale = 0.0;       // ((γ-1)/N)^{1/2}
    double alpha_tilde = 0.0; // minimum on the profile built from the scaled bump
    double predicted = 0.0;   // (N/(γ-1))^{1/2} α̂_∞
};

// Recomputes α̃ on R̃ = φ̃ * φ̃ with φ̃ = ((γ-1)/N)^{1/2} φ.
ScaledAlphaCheck scaled_alpha_check(double gamma, const moll::RadialProfile& R, int dim = 3);

struct SemigroupCheck {
    int grid_n = 0;
    double t = 0.0;
    double sup_rayleigh = 0.0;     // largest eigenvalue of H
    double exp_norm = 0.0;         // ‖exp(tH)‖₂
    double max_ratio = 0.0;        // max over test vectors of ‖exp(tH)u‖ / (e^{t sup H} ‖u‖)
};

// H = Δ_h + β² R(w) for the relative coordinate w = x(2) - x(1) of two particles on an
// n³ Dirichlet grid on [-L, L]³; exp(tH) by dense matrix exponential.
SemigroupCheck semigroup_bound_check(const moll::RadialProfile& R, double beta, int grid_n = 8, double half_width = 3.0,
                                     double t = 1.0, int n_vectors = 16, unsigned long long seed = 7);

}  // namespace bosecrit::var
