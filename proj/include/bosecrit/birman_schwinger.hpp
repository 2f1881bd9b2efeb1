#pragma once

// Birman-Schwinger operators T_β^λ u = 𝔙_β (𝒢^λ * (𝔙_β u)) in d = 3, where
//   V_β(x) = β² R(√2 x),  𝔙_β = V_β^{1/2},  𝒢^λ(x) = exp(-√(2λ)|x|) / (2π|x|).
// Discretized on a cell-centered cubic grid covering supp V_β = B(0, √2 r_φ).

#include "bosecrit/mollifier.hpp"

#include <array>
#include <memory>
#include <vector>

namespace bosecrit::bs {

using Vec3 = std::array<double, 3>;

double yukawa(double lambda, double r);

// Exact mean of 𝒢^λ and of (𝒢^λ)² over the cube [-h/2, h/2]³.
double yukawa_cell_average(double lambda, double h);
double yukawa_sq_cell_average(double lambda, double h);

struct PotentialField {
    double beta = 1.0;
    int n = 0;                 // cells per axis
    double half_width = 0.0;   // grid covers [-half_width, half_width]³
    std::vector<double> V;     // V_β at cell centers
    std::vector<double> sqrtV; // 𝔙_β at cell centers
    std::shared_ptr<const moll::RadialProfile> profile;

    double h() const { return 2.0 * half_width / n; }
    double cell_volume() const { double s = h(); return s * s * s; }
    std::size_t size() const { return V.size(); }
    Vec3 center(std::size_t idx) const;
    double sup_sqrtV() const;
    // V_β(x) = β² R(√2|x|) at an arbitrary point.
    double V_at(const Vec3& x) const;
};

// Grid n³ on [-√2 r_φ, √2 r_φ]³ where r_φ = R.support_radius() / 2.
PotentialField potential_field(const moll::RadialProfile& R, double beta, int grid_n);

// Same grid, coupling rescaled: V ↦ (beta/pot.beta)² V.
PotentialField with_beta(const PotentialField& pot, double beta);

// L² inner product on the grid (weights h³).
double inner(const PotentialField& pot, const std::vector<double>& a, const std::vector<double>& b);
double norm(const PotentialField& pot, const std::vector<double>& a);

class KernelOperator {
public:
    // Throws ResourceError when the padded FFT workspace would exceed the memory guard.
    KernelOperator(PotentialField pot, double lambda);
    ~KernelOperator();
    KernelOperator(const KernelOperator&) = delete;
    KernelOperator& operator=(const KernelOperator&) = delete;
    KernelOperator(KernelOperator&&) noexcept;

    const PotentialField& potential() const { return pot_; }
    double lambda() const { return lambda_; }
    std::size_t size() const { return pot_.size(); }

    // T u.
    std::vector<double> apply(const std::vector<double>& u) const;
    // Discrete (𝒢^λ * f)(x_i) = Σ_j K_ij f_j h³ at grid nodes.
    std::vector<double> convolve(const std::vector<double>& f) const;
    // Squared-kernel convolution Σ_j K²_ij f_j h³ (diagonal uses the mean of (𝒢^λ)²).
    std::vector<double> convolve_squared(const std::vector<double>& f) const;

    // (∫∫ |t(x,y)|² dx dy)^{1/2}.
    double hilbert_schmidt_norm() const;

    // Dense kernel matrix K_ij (h³ not included); for oracles on small grids only.
    std::vector<double> dense_kernel() const;

    // Discrete (𝒢^λ * f)(x) at an arbitrary point by direct summation.
    double potential_at(const std::vector<double>& f, const Vec3& x) const;

private:
    struct Fft;
    PotentialField pot_;
    double lambda_;
    std::unique_ptr<Fft> fft_;
    std::vector<double> conv_impl(const std::vector<double>& f, bool squared) const;
};

// Memory the FFT workspace would need for grid_n, in bytes.
std::size_t workspace_bytes(int grid_n);

struct SpectralResult {
    double lambda1 = 0.0, lambda2 = 0.0;
    std::vector<double> v1, v2;
    int iterations = 0;
    double residual = 0.0;   // ‖T v₁ - λ₁ v₁‖
    double residual2 = 0.0;  // same for the deflated pair
    double gap() const { return lambda1 - lambda2; }
};

// Power iteration for (λ₁, v₁) and one Hotelling deflation for λ₂.
// v₁ is normalized in L² and signed so that ⟨v₁, 𝔙⟩ ≥ 0.
SpectralResult top_eigen(const KernelOperator& T, double tol = 1e-10, int max_iter = 20000);

// ℰ_β(λ) = λ₁(T_β^λ).
double energy(const PotentialField& pot, double lambda, double tol = 1e-10);

struct EnergyPoint {
    double lambda = 0.0, energy = 0.0;
};
std::vector<EnergyPoint> energy_curve(const PotentialField& pot, const std::vector<double>& lambdas);

struct BetaL2Report {
    std::vector<int> grids;
    std::vector<double> h, energy0, beta_hat, gap_ratio;  // gap_ratio = λ₂/λ₁ at β = β̂
    double extrapolated = 0.0;   // Richardson in h² on the two finest grids
    double relative_change = 0.0;
    bool monotone = true;
    bool converged = false;      // monotone and relative_change ≤ 2%
};

BetaL2Report estimate_beta_L2(const moll::RadialProfile& R, const std::vector<int>& ladder = {24, 32, 48});

struct NeumannSeries {
    std::vector<double> terms;         // ⟨𝔙, T^k 𝔙⟩, k = 0..kmax
    std::vector<double> partial_sums;
    double energy = 0.0;               // ℰ_β(0)
    double limit = 0.0;                // partial sum plus geometric tail at ratio ℰ_β(0)
};

// Throws PreconditionError when ℰ_β(0) ≥ 1.
NeumannSeries neumann_series_moment(const PotentialField& pot, int kmax);

struct BsPrinciple {
    double lambda_star = 0.0;
    double energy = 0.0;                 // ℰ_β(λ*)
    std::vector<double> u;               // top eigenvector of T_β^{λ*}
    std::vector<double> h;               // 𝒢^{λ*} * (𝔙 u)
    double fixed_point_residual = 0.0;   // ‖T u - u‖ / ‖u‖
    double integral_residual = 0.0;      // ‖𝒢^{λ*} * (V h) - h‖ / ‖h‖
    double pde_residual = 0.0;           // ‖(λ* - Δ_h/2) h - V h‖ / ‖V h‖ on interior nodes
    int bisection_steps = 0;
};

// Solves ℰ_β(λ*) = 1 by bisection; throws PreconditionError if ℰ_β(0) ≤ 1.
BsPrinciple bs_principle_eigenvalue(const PotentialField& pot, double tol = 1e-6);

struct ZeroResonance {
    PotentialField pot;                  // at β = β̂ of this grid
    SpectralResult spectrum;
    std::vector<double> h;               // h_{v₁} at grid nodes
    double overlap = 0.0;                // ⟨v₁, 𝔙⟩
    double residual = 0.0;               // ‖𝒢⁰ * (V h) - h‖ / ‖h‖
    std::vector<double> far_radii, far_products;  // |x| h(x) along the axes
    double far_limit = 0.0;              // ⟨v₁, 𝔙⟩ / (2π)
    double decay_constant = 0.0;         // max over samples of h(x)(|x| - 2 r_φ)
};

// Builds T at β̂ on the grid (so λ₁ = 1 up to the eigen tolerance) and the resonance h_{v₁}.
ZeroResonance zero_resonance(const moll::RadialProfile& R, int grid_n);

// Throws PreconditionError when |λ₁ - 1| > 1e-4.
ZeroResonance zero_resonance(const PotentialField& pot, const SpectralResult& spec);

// h_{v₁}(x) by direct summation.
double resonance_at(const ZeroResonance& zr, const Vec3& x);

// 𝒞(z, z') = β⁴ h_{v₁}(z) h_{v₁}(z') / ⟨v₁, 𝔙⟩².
double constant_C(const ZeroResonance& zr, const Vec3& z, const Vec3& zp);

struct IdentityOne {
    double on_grid = 0.0;     // ∫∫ R(√2z) 𝒞 R(√2z') with h_{v₁} at the grid nodes, equal to λ₁²
    double staggered = 0.0;   // same with h_{v₁} evaluated on the cell-vertex lattice
};
IdentityOne identity_one_check(const ZeroResonance& zr);

enum class ResolventSolver { conjugate_gradient, neumann };

struct LaplaceLadder {
    std::vector<double> eps, values, first_terms, energies;
    std::vector<int> iterations;
    std::vector<bool> skipped;
    double target = 0.0;       // (2π / √(2Λ)) 𝒞(z, z')
    double richardson = 0.0;
    double relative_error = 0.0;
};

// ε ⟨a_{ε;z}, (I - T^{ε²Λ})^{-1} b_{ε;z'}⟩ for each ε, with Richardson extrapolation in ε.
LaplaceLadder laplace_asymptotic_check(const ZeroResonance& zr, const Vec3& z, const Vec3& zp, double Lambda,
                                       const std::vector<double>& eps_list,
                                       ResolventSolver solver = ResolventSolver::conjugate_gradient);

// Solves (I - T) x = b; stops at relative residual tol.
std::vector<double> solve_resolvent(const KernelOperator& T, const std::vector<double>& b, ResolventSolver solver,
                                    double tol, int* iterations = nullptr);

}  // namespace bosecrit::bs
