#include "bosecrit/variational.hpp"

#include "bosecrit/errors.hpp"
#include "bosecrit/quadrature.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace bosecrit::var {

void validate(const TrialFunction& f) {
    require_positive(f.sigma, "trial width");
    if (f.N < 2) throw DomainError("trial: N must be at least 2");
    if (f.dim < 3) throw DomainError("trial: d must be at least 3");
}

double single_coordinate_energy(const TrialFunction& f) {
    validate(f);
    const double s = f.sigma;
    // ½∫(d/dx g^{1/2})² for the one-dimensional factor g = G_σ, times d directions.
    const double half = 12.0 * std::sqrt(s);
    double one = quad::integrate([s](double x) {
        double g = std::exp(-x * x / (2 * s)) / std::sqrt(2 * std::numbers::pi * s);
        return 0.5 * x * x / (4 * s * s) * g;
    }, -half, half, 1e-14);
    return f.dim * one;
}

double gradient_energy(const TrialFunction& f) { return f.N * single_coordinate_energy(f); }
double two_coordinate_energy(const TrialFunction& f) { return 2.0 * single_coordinate_energy(f); }

double pair_energy(const TrialFunction& f, const moll::RadialProfile& R) {
    validate(f);
    if (R.dim() != f.dim) throw DomainError("pair_energy: profile dimension differs from the trial");
    const double v = 2.0 * f.sigma;
    const double norm = std::pow(2 * std::numbers::pi * v, -0.5 * f.dim);
    return R.radial_integral([v, norm](double r) { return norm * std::exp(-r * r / (2 * v)); });
}

double pair_sum(const TrialFunction& f, const moll::RadialProfile& R) {
    return 0.5 * f.N * (f.N - 1) * pair_energy(f, R);
}

namespace {
double checked_ratio(double num, double den, const TrialFunction& f) {
    if (!(den > 0.0))
        throw NumericError("degenerate trial: interaction term vanishes at sigma = " + std::to_string(f.sigma));
    return num / den;
}
}  // namespace

double rayleigh_I(const TrialFunction& f, const moll::RadialProfile& R) {
    return checked_ratio(gradient_energy(f), pair_sum(f, R), f);
}

double rayleigh_J(const TrialFunction& f, const moll::RadialProfile& R) {
    return checked_ratio(two_coordinate_energy(f), pair_energy(f, R), f);
}

WidthMinimum minimize_J(const moll::RadialProfile& R, int N, int dim, double log_lo, double log_hi) {
    if (!(log_lo < log_hi)) throw ConfigError("minimize_J: empty search interval");
    WidthMinimum out;
    auto obj = [&](double ls) {
        ++out.evaluations;
        return rayleigh_J({std::exp(ls), N, dim}, R);
    };
    std::uintmax_t iters = 200;
    auto [ls, val] = boost::math::tools::brent_find_minima(obj, log_lo, log_hi, 40, iters);
    out.sigma = std::exp(ls);
    out.value = val;
    return out;
}

AlphaBounds alpha_bounds(const moll::RadialProfile& R, int N_max, int dim) {
    if (N_max < 2) throw ConfigError("alpha_bounds: N_max must be at least 2");
    AlphaBounds out;
    auto m2 = minimize_J(R, 2, dim);
    out.alpha_inf_upper = std::sqrt(m2.value);
    out.sigma_star = m2.sigma;
    for (int N = 2; N <= N_max; ++N) {
        out.N.push_back(N);
        out.alpha_upper.push_back(std::sqrt(minimize_J(R, N, dim).value));
    }
    return out;
}

Interval beta_LN_interval(int N, double beta_L2_hat, double alpha_inf_upper) {
    require_positive(beta_L2_hat, "beta_L2_hat");
    require_positive(alpha_inf_upper, "alpha_inf_upper");
    if (N < 2) throw DomainError("beta_LN_interval: N must be at least 2");
    if (N == 2) return {beta_L2_hat, beta_L2_hat};
    double s = std::sqrt(N - 1.0);
    return {beta_L2_hat / s, alpha_inf_upper / s};
}

Interval gamma_star_interval(double beta, double beta_L2_hat, double alpha_inf_upper) {
    require_positive(beta, "beta");
    if (beta >= beta_L2_hat) throw DomainError("gamma_star_interval: beta must lie below beta_L2");
    return {1.0 + std::pow(beta_L2_hat / beta, 2), 1.0 + std::pow(alpha_inf_upper / beta, 2)};
}

Interval scaled_mollifier_bound(double gamma, double beta_L2_hat, double alpha_inf_upper) {
    if (!(gamma > 2.0)) throw DomainError("scaled_mollifier_bound: gamma must exceed 2");
    double s = std::sqrt(gamma - 1.0);
    return {beta_L2_hat / s, alpha_inf_upper / s};
}

ScaledAlphaCheck scaled_alpha_check(double gamma, const moll::RadialProfile& R, int dim) {
    if (!(gamma > 2.0)) throw DomainError("scaled_alpha_check: gamma must exceed 2");
    ScaledAlphaCheck out;
    out.gamma = gamma;
    out.N = int(std::ceil(gamma)) - 1;
    out.scale = std::sqrt((gamma - 1.0) / out.N);
    const double r_phi = 0.5 * R.support_radius();
    auto phi = moll::build_bump(r_phi, 2048, dim).scaled(out.scale);
    auto Rt = moll::self_convolve(phi, 2048);
    out.alpha_tilde = std::sqrt(minimize_J(Rt, 2, dim).value);
    out.predicted = std::sqrt(out.N / (gamma - 1.0)) * std::sqrt(minimize_J(R, 2, dim).value);
    return out;
}

CriticalConstantsReport critical_constants(const bs::BetaL2Report& beta_L2, const AlphaBounds& alpha,
                                           const std::vector<double>& gamma_betas) {
    CriticalConstantsReport rep;
    rep.beta_L2 = beta_L2;
    rep.beta_L2_hat = beta_L2.beta_hat.back();
    rep.alpha = alpha;
    for (std::size_t i = 0; i < alpha.N.size(); ++i) {
        int N = alpha.N[i];
        rep.N.push_back(N);
        rep.beta_Np_upper.push_back(alpha.alpha_upper[i] / std::sqrt(N - 1.0));
        rep.beta_LN.push_back(beta_LN_interval(N, rep.beta_L2_hat, alpha.alpha_inf_upper));
    }
    for (double b : gamma_betas) {
        rep.gamma_betas.push_back(b);
        rep.gamma_star.push_back(gamma_star_interval(b, rep.beta_L2_hat, alpha.alpha_inf_upper));
    }
    return rep;
}

CriticalConstantsReport critical_constants(const moll::RadialProfile& R, int N_max, const std::vector<int>& ladder,
                                           const std::vector<double>& gamma_beta_fractions) {
    auto bl = bs::estimate_beta_L2(R, ladder);
    auto ab = alpha_bounds(R, N_max, R.dim());
    std::vector<double> betas;
    for (double f : gamma_beta_fractions) {
        if (!(f > 0.0 && f < 1.0)) throw ConfigError("critical_constants: beta fractions must lie in (0, 1)");
        betas.push_back(f * bl.beta_hat.back());
    }
    return critical_constants(bl, ab, betas);
}

SemigroupCheck semigroup_bound_check(const moll::RadialProfile& R, double beta, int grid_n, double half_width, double t,
                                     int n_vectors, unsigned long long seed) {
    if (grid_n < 2 || grid_n > 12) throw ConfigError("semigroup_bound_check: grid_n must lie in [2, 12]");
    require_positive(half_width, "half_width");
    require_positive(t, "t");
    const int n = grid_n;
    const int M = n * n * n;
    // Interior nodes of a Dirichlet grid with spacing h.
    const double h = 2.0 * half_width / (n + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(M, M);
    auto id = [n](int i, int j, int k) { return (i * n + j) * n + k; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                int a = id(i, j, k);
                double x = -half_width + (i + 1) * h, y = -half_width + (j + 1) * h, z = -half_width + (k + 1) * h;
                H(a, a) = -6.0 / (h * h) + beta * beta * R(std::sqrt(x * x + y * y + z * z));
                const int nb[3][2] = {{i, 0}, {j, 1}, {k, 2}};
                for (auto [c, axis] : nb)
                    for (int step : {-1, 1}) {
                        int cc = c + step;
                        if (cc < 0 || cc >= n) continue;
                        int ii = axis == 0 ? cc : i, jj = axis == 1 ? cc : j, kk = axis == 2 ? cc : k;
                        H(a, id(ii, jj, kk)) = 1.0 / (h * h);
                    }
            }
    SemigroupCheck out;
    out.grid_n = n;
    out.t = t;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    out.sup_rayleigh = es.eigenvalues().maxCoeff();
    Eigen::MatrixXd E = (t * H).exp();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ee(0.5 * (E + E.transpose()), Eigen::EigenvaluesOnly);
    out.exp_norm = ee.eigenvalues().cwiseAbs().maxCoeff();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const double bound = std::exp(t * out.sup_rayleigh);
    for (int v = 0; v < n_vectors; ++v) {
        Eigen::VectorXd u(M);
        for (int q = 0; q < M; ++q) u(q) = g(rng);
        out.max_ratio = std::max(out.max_ratio, (E * u).norm() / (bound * u.norm()));
    }
    return out;
}

}  // namespace bosecrit::var
