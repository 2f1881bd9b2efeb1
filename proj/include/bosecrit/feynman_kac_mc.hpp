#pragma once

// Monte Carlo for N-particle Brownian exponential functionals in d = 3:
//
//   moment:      E_x[ exp(β_ε² ∫_0^t Σ_{i<i'} R_ε(B(i') - B(i)) ds) U_0^{⊗N}(B(t)) ]
//   semigroup:   Q_T(x, z) = G_T^{(N)}(x - z) E[ exp(β² ∫_0^T Σ R(b(i') - b(i))) ] over the bridge x → z
//
// The moment is simulated in rescaled units T = t/ε², where the exponent becomes β² ∫ Σ R.
// Paths come in blocks of 256 with one random stream per block, so estimates do not depend on
// the thread count. Every estimator stores the path integral ∫ Σ R once and reuses it for all
// couplings (common random numbers).

#include "bosecrit/mollifier.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace bosecrit::fk {

struct McConfig {
    std::size_t n_paths = 200000;
    double dt = 0.01;             // time step in the units of the horizon argument
    std::uint64_t seed = 20240601;
    bool antithetic = true;
    int refine = 0;               // midpoint refinements of each step: effective dt = dt / 2^refine
    int threads = 0;              // 0: BOSECRIT_THREADS or hardware concurrency
};

// Throws ConfigError unless n_paths ≥ 100 and dt ≤ horizon / 50.
void validate(const McConfig& cfg, double horizon);

struct MomentEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_effective = 0;    // independent samples (antithetic pairs count once)
    double ess = 0.0;               // (Σw)² / Σw² over samples
    bool reliable = true;           // ess ≥ 100
    double horizon = 0.0;           // t for moments, T for semigroup quantities
    int N = 0;
    double beta = 0.0;
    double eps = 0.0;               // 0 for rescaled quantities
};

struct InitialDatum {
    enum class Kind { flat, gaussian } kind = Kind::flat;
    double nu = 1.0;    // U_0 = G_ν for the Gaussian datum
    double operator()(const double* x) const;
    // E[U_0(x + B(t))] for one coordinate block.
    double heat(const double* x, double t) const;
};

using Config = std::vector<std::array<double, 3>>;

// Moments for several couplings on one set of paths.
std::vector<MomentEstimate> simulate_moment(int N, const std::vector<double>& betas, double eps, double t, const Config& x0,
                                            const InitialDatum& U0, const McConfig& cfg,
                                            const moll::RadialProfile& R = moll::default_R());
MomentEstimate simulate_moment(int N, double beta, double eps, double t, const Config& x0, const InitialDatum& U0,
                               const McConfig& cfg, const moll::RadialProfile& R = moll::default_R());

// β = 0 value: Π_i E[U_0(x0(i) + B(t))].
double free_moment(const Config& x0, double t, const InitialDatum& U0);

std::vector<MomentEstimate> simulate_rescaled_semigroup(int N, const std::vector<double>& betas, double T, const Config& x,
                                                        const Config& z, const McConfig& cfg,
                                                        const moll::RadialProfile& R = moll::default_R());
MomentEstimate simulate_rescaled_semigroup(int N, double beta, double T, const Config& x, const Config& z,
                                           const McConfig& cfg, const moll::RadialProfile& R = moll::default_R());

// G_T^{(N)}(x - z).
double free_kernel(const Config& x, const Config& z, double T);

// ∫ dz Q_{t/ε²}(x/ε, z) U_0(ε z) for U_0 = G_ν, with z drawn from the Gaussian proportional to
// G_T(z - x/ε) G_ν(εz), variance inflated by width_factor. Equals the moment by Brownian scaling.
MomentEstimate rescaled_moment(int N, double beta, double eps, double t, const Config& x0, double nu, const McConfig& cfg,
                               double width_factor = 1.5, const moll::RadialProfile& R = moll::default_R());

// ⟨θ, Q_T θ⟩ with θ the indicator of B(0, ℓ)^N. x and z uniform in the balls, bridged.
std::vector<MomentEstimate> quadratic_form_theta(int N, const std::vector<double>& betas, double T, double ell,
                                                 const McConfig& cfg, const moll::RadialProfile& R = moll::default_R());

// β = 0 value: (∫_B ∫_B G_T(x - z) dx dz)^N via the lens volume of two balls.
double free_quadratic_form_theta(int N, double T, double ell);

struct GrowthProbe {
    std::vector<double> betas, T_grid;
    std::vector<std::vector<MomentEstimate>> values;   // [beta][T]
    std::vector<double> slopes, slope_errors;          // weighted least squares of log value on T
    std::vector<bool> reliable;
};

// Each T uses the same seed, so all β share paths.
GrowthProbe growth_probe(int N, const std::vector<double>& betas, const std::vector<double>& T_grid, double ell,
                         const McConfig& cfg, const moll::RadialProfile& R = moll::default_R());

// k-th term of E_0[exp(β² ∫_0^T R(B(2) - B(1))) G_b(B(1)(T)) G_b(B(2)(T))], both particles
// started at the origin, reduced to relative and center-of-mass coordinates. k ∈ {0, 1, 2}.
double series_term_quadrature(double beta, double T, double b, int k, const moll::RadialProfile& R = moll::default_R());

struct SeriesComparison {
    std::vector<double> terms;     // k = 0, 1, 2
    double partial_sum = 0.0;
    double remainder = 0.0;        // geometric tail at ratio terms[2] / terms[1]
};
SeriesComparison series_partial_sum(double beta, double T, double b, const moll::RadialProfile& R = moll::default_R());

// β²/2^{3/2} · E[exp(∫_0^T β² R(√2 B(s)) ds)] with B(0) = (X + Y)/√2, X, Y iid with density φ:
// the horizon-T truncation of ∫ dz β² R(√2 z) E_z[exp(β² ∫_0^∞ R(√2 B))].
MomentEstimate truncated_two_body_functional(double beta, double T, const McConfig& cfg,
                                             const moll::RadialProfile& phi = moll::default_phi(),
                                             const moll::RadialProfile& R = moll::default_R());

}  // namespace bosecrit::fk
