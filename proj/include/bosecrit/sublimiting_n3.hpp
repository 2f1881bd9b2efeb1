#pragma once

// Sub-limiting path integrals for three particles in d = 3 with contact pair interactions and
// Gaussian initial datum U_0 = G_ν. A label sequence ((ℓ_1,ℓ'_1,𝔦_1), ..., (ℓ_m,ℓ'_m,𝔦_m)) picks
// the interacting pair on each of m consecutive time windows; consecutive pairs must differ.
//
// For m ≥ 3 the spatial integrals have the closed form
//
//   G_{v_0}(x_rel) G_{u_1}(x_comp) G_{u_2}(x_star - u_3 x_comp) Π_j √(2π/r_j) 2^{3(m-1)}
//     × G_{v_m+ν}(0) Π_{j=2}^{m-1} G_{v_{j-1} + 𝐭_{j+1} + 3(v_{j-1}+r_j)}(0) G_{v_{m-1} + 3(v_{m-1}+r̄_m)}(0)
//
// with (x_rel, x_star, x_comp) the relative coordinates of x_0 for the first pair, the chain
// 𝐭_m = 4[v_{m-1} ⊕ 3(v_{m-1}+r̄_m)], 𝐭_j = 4[v_{j-1} ⊕ (𝐭_{j+1} + 3(v_{j-1}+r_j))], a ⊕ b = ab/(a+b),
// and u_1..u_4 built from 𝐭_2. Time integrals are done by importance-sampled Monte Carlo.

#include <array>
#include <cstdint>
#include <vector>

namespace bosecrit::sub {

using Vec3 = std::array<double, 3>;
using Config3 = std::array<Vec3, 3>;

struct Label {
    int l = 1, lp = 2;   // 1 ≤ l < lp ≤ 3
    int i = 1;           // 𝔦 ∈ {0, 1}
};
using LabelSequence = std::vector<Label>;

struct LabelCheck {
    bool valid = false;          // consecutive pairs differ
    bool zero_shortcut = false;  // some 𝔦_j = 0: the path integral vanishes
};

// Throws StructuralError on malformed pair indices or 𝔦 ∉ {0, 1}.
LabelCheck validate_labels(const LabelSequence& seq);

// All valid sequences of length m with every 𝔦_j = 1, in lexicographic order.
std::vector<LabelSequence> enumerate_sequences(int m);

struct RelativeCoords {
    Vec3 x_rel{}, x_star{}, x_comp{};
};

// x_rel = (x(ℓ') - x(ℓ))/√2, x_star = (x(ℓ') + x(ℓ))/√2, x_comp = x(ℓ^c).
RelativeCoords relative_coords(const Config3& x, int l, int lp);

// Some pair of particles coincides.
bool on_diagonal(const Config3& x, double tol = 0.0);

struct TimeSimplexPoint {
    std::vector<double> v;   // v_0 .. v_m, with v_m = t - Σ(others)
    std::vector<double> r;   // r_1 .. r_m (r[j-1] = r_j)
    double t = 1.0;
    double nu = 1.0;
    int m() const { return int(r.size()); }
    double r_bar() const { return r.back() + v.back() + nu; }
};

// From (v_0, r_1, v_1, ..., v_{m-1}, r_m); throws DomainError unless all are positive with sum < t.
TimeSimplexPoint make_time_point(const std::vector<double>& interleaved, double t, double nu);

struct TjChain {
    std::vector<double> t;   // t[j] = 𝐭_j for j = 1..m; t[0] unused
    double S = 0.0;          // v_1 + r_2 + ... + v_{m-1} + r̄_m
    double u1 = 0.0, u2 = 0.0, u3 = 0.0, u4 = 0.0;
};

TjChain tj_chain(const TimeSimplexPoint& times);

// Spatial closed form at fixed times (m ≥ 3, all 𝔦 = 1, x_0 off the diagonal).
double integrand_pointwise(const Config3& x0, const TimeSimplexPoint& times, const LabelSequence& seq);

// Spatial integral of the delta-reduced path integral at fixed times, by exact Gaussian
// elimination over all intermediate positions (any m ≥ 1).
double spatial_integral_direct(const Config3& x0, const TimeSimplexPoint& times, const LabelSequence& seq);

// Spatial integral of the relative-motion representation at fixed times (m ≥ 3), by exact
// Gaussian elimination over the intermediate (z*, z^c) variables.
double relative_motion_integral(const Config3& x0, const TimeSimplexPoint& times, const LabelSequence& seq);

struct RelativeMotionCheck {
    double closed_form = 0.0;
    double relative_motion = 0.0;
    double direct = 0.0;
    double residual = 0.0;          // |closed - relative_motion| / closed
    double direct_residual = 0.0;   // |closed - direct| / closed
};
RelativeMotionCheck relative_motion_check(const Config3& x0, const TimeSimplexPoint& times, const LabelSequence& seq);

// Fourier-side product 𝒢_{v_0}(k) 𝒢_{v_0+r_1}(k*) 𝒢_{v_0+r_1}(k^c) 𝒢_{𝐭_2}(k*/3 - 2k^c/(3√2))
// 𝒢_{2S/3}(k* + k^c/√2), 𝒢_s(k) = exp(-2π² s |k|²).
double fourier_product(const TimeSimplexPoint& times, const Vec3& k, const Vec3& ks, const Vec3& kc);

// Fourier transform of G_{v_0}(z) G_{u_1}(z^c) G_{u_2}(z* - u_3 z^c) by tensor Gauss-Legendre.
double space_side_transform(const TimeSimplexPoint& times, const Vec3& k, const Vec3& ks, const Vec3& kc);

// Max relative residual between the two sides over n random frequencies.
double duality_residual(const TimeSimplexPoint& times, int n_freq = 20, std::uint64_t seed = 11);

// m = 3: ℬ by nested Gauss-Legendre over (h_2, h_3), then numeric inversion over (k*, k^c),
// multiplied by the remaining factors. Compares with integrand_pointwise.
double b_quadrature_value(const Config3& x0, const TimeSimplexPoint& times, const LabelSequence& seq, int order = 64);

struct SubMcConfig {
    std::size_t n_samples = 200000;
    std::uint64_t seed = 20240601;
    int strata = 64;     // strata on the v_0 law
    int threads = 0;
};

struct PathIntegralEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    double ess = 0.0;
    bool reliable = true;   // ess ≥ 100
};

// 𝓘_{0;t} by importance sampling on the time simplex: v_0 from a stratified mixture of
// truncated Lévy laws matched to G_{v_0}(x_rel) for each pair, the pairs (v_{j-1}, r_j) drawn
// backward along the 𝐭_j chain, v_m the remainder. Zero for sequences with some 𝔦 = 0.
PathIntegralEstimate path_integral_value(const Config3& x0, const LabelSequence& seq, double t, double nu,
                                         const SubMcConfig& cfg);

struct PartialSums {
    double S0 = 0.0;                          // Π_i G_{t+ν}(x_0(i))
    std::vector<int> m;                       // 1..M
    std::vector<std::size_t> n_sequences;
    std::vector<double> term, term_error;     // Σ over sequences of length m
    std::vector<double> cumulative;           // S_m
    std::vector<double> ratio_vs_1008;        // term·(m-1)(m-2)/1.008^{m-1}; 0 for m < 3
    std::vector<bool> reliable;
};

// Throws ConfigError for M > 8.
PartialSums partial_sum_QN(const Config3& x0, double t, double nu, int M, const SubMcConfig& cfg);

struct UEnvelope {
    std::size_t n = 0;
    double u1_ratio_min = 0.0, u1_ratio_max = 0.0;   // u_1 / (t + ν)
    double u2_ratio_min = 0.0;                       // u_2 / v_0
    double u2_ratio_max = 0.0;                       // u_2 / (t + ν)
    double u3_abs_max = 0.0;
    bool positive_finite = true;                     // 𝐭_j, u_1, u_2 > 0 and all finite
};

// Envelopes of u_1, u_2, u_3 over uniform points of the time simplex.
UEnvelope u_envelope(int m, double t, double nu, std::size_t n, std::uint64_t seed = 5);

}  // namespace bosecrit::sub
