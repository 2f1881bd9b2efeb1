#pragma once

// η_0 = ζ_0 = 1,
// η_m(v) = ∫_0^1 η_{m-1}(s) / (v + s) ds,   ζ_m(v) = ∫_v^1 ζ_{m-1}(s) / (v + s) ds,
// L_{m+1} = ∫_0^1 η_m(v) dv.
//
// Computed in the variable y = -ln v, where both recursions become convolutions with the
// logistic kernel σ(u) = 1 / (1 + e^{-u}) on a composite Gauss-Legendre grid in y.

#include <cstdint>
#include <vector>

namespace bosecrit::iter {

struct EtaTable {
    int m = 0;
    std::vector<double> v;     // node abscissae in (0, 1], decreasing toward 0
    std::vector<double> eta;   // η_m at the nodes
    std::vector<double> zeta;  // ζ_m at the nodes
    double error_estimate = 0.0;
};

class IteratedIntegrals {
public:
    // panels: unit-length panels covering y ∈ [0, panels]; order: Gauss-Legendre nodes per panel.
    explicit IteratedIntegrals(int m_max = 20, int panels = 200, int order = 16);

    int m_max() const { return m_max_; }
    const EtaTable& table(int m) const;
    double eta(int m, double v) const;
    double zeta(int m, double v) const;
    double L(int m) const;             // m >= 1
    double zeta_integral(int k) const;  // ∫_0^1 ζ_k
    double L_error(int m) const;        // difference to a lower-order rebuild

private:
    int m_max_, panels_, order_;
    std::vector<double> y_, w_;
    std::vector<double> ref_x_, bary_;
    std::vector<EtaTable> tables_;
    std::vector<double> L_, Lerr_, zint_;

    double interp(const std::vector<double>& vals, double y) const;
};

std::vector<EtaTable> eta_zeta_tables(int m_max, int grid_n = 200);

// Shared instance with m_max = 20.
const IteratedIntegrals& default_tables();

double L(int m);
double zeta_integral(int k);

// min over v of η_m(v) - Σ_k C(m,k) ζ_k(v) (ln 2)^{m-k}.
double eta_binomial_check(int m, const std::vector<double>& v_samples);

// ∫_0^u r^{-1/2} (a + r)^{-3/2} dr = (2/a) (u / (a + u))^{1/2}.
double r_integral(double a, double u);

double ratio_constant(bool include_099 = true);

// Homogeneous simplex integral
//   π^{-m} ∫_{Σ v + Σ r < t} Π_{j=2}^m r_j^{-1/2} (v_{j-1} + v_j + 3 r_j / 4)^{-3/2}
// equals t * c_m; c_m is computed via its Laplace transform as a one-dimensional transfer chain.
double simplex_constant(int m);

struct SimplexMcConfig {
    std::size_t n_samples = 400000;
    std::uint64_t seed = 20240611;
    int threads = 0;
    int strata = 64;
};

struct SimplexCheck {
    int m = 0;
    double t = 1.0;
    double lhs_estimate = 0.0;
    double lhs_stderr = 0.0;
    double lhs_quadrature = 0.0;
    double rhs = 0.0;  // C_t 1.008^m / (m (m - 1)) with C_t fixed by lhs(3) = rhs(3)
    bool holds = false;
};

// Monte Carlo estimate of the simplex integral alone.
struct SimplexMc {
    double mean = 0.0, std_error = 0.0;
};
SimplexMc simplex_integral_mc(int m, double t, const SimplexMcConfig& cfg);

SimplexCheck simplex_lower_bound_check(int m, double t, const SimplexMcConfig& cfg = {});

}  // namespace bosecrit::iter
