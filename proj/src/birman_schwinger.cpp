#include "bosecrit/birman_schwinger.hpp"

#include "bosecrit/errors.hpp"
#include "bosecrit/quadrature.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

namespace bosecrit::bs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMemoryGuard = std::size_t(1536) << 20;

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// (1 - e^{-μ}(1 + μ)) / μ², continuous at 0.
double g_ratio(double mu) {
    if (mu < 1e-4) return 0.5 - mu / 3.0 + mu * mu / 8.0;
    return -std::expm1(-mu) / (mu * mu) - std::exp(-mu) / mu;
}

// Mean over [-a, a]³ of a radial f, given F(ρ) = ∫_0^ρ r² f(r) dr. The cube splits into six
// pyramids with apex at the origin; along each ray the radial integral is F.
template <class F>
double cube_average(double a, F radial_moment) {
    static const quad::Rule face = quad::composite(std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}, 16);
    double s = 0.0;
    for (std::size_t i = 0; i < face.x.size(); ++i)
        for (std::size_t j = 0; j < face.x.size(); ++j) {
            double u = a * face.x[i], v = a * face.x[j];
            double rho = std::sqrt(a * a + u * u + v * v);
            s += face.w[i] * face.w[j] * a * radial_moment(rho) / (rho * rho * rho);
        }
    s *= a * a;  // face area element
    return 6.0 * s / (8.0 * a * a * a);
}

}  // namespace

double yukawa(double lambda, double r) {
    if (lambda < 0.0) throw DomainError("yukawa: lambda must be nonnegative");
    if (!(r > 0.0)) throw DomainError("yukawa: singular at r = 0; use the cell average");
    return std::exp(-std::sqrt(2.0 * lambda) * r) / (2.0 * kPi * r);
}

double yukawa_cell_average(double lambda, double h) {
    if (lambda < 0.0) throw DomainError("yukawa_cell_average: lambda must be nonnegative");
    require_positive(h, "cell size");
    const double kappa = std::sqrt(2.0 * lambda);
    return cube_average(0.5 * h, [kappa](double rho) { return rho * rho * g_ratio(kappa * rho) / (2.0 * kPi); });
}

double yukawa_sq_cell_average(double lambda, double h) {
    if (lambda < 0.0) throw DomainError("yukawa_sq_cell_average: lambda must be nonnegative");
    require_positive(h, "cell size");
    const double kappa = std::sqrt(2.0 * lambda);
    return cube_average(0.5 * h, [kappa](double rho) {
        double m = 2.0 * kappa * rho;
        double f = m < 1e-8 ? rho : -std::expm1(-m) / (2.0 * kappa);
        return f / (4.0 * kPi * kPi);
    });
}

Vec3 PotentialField::center(std::size_t idx) const {
    const double hh = h();
    std::size_t k = idx % n, j = (idx / n) % n, i = idx / (std::size_t(n) * n);
    return {-half_width + (i + 0.5) * hh, -half_width + (j + 0.5) * hh, -half_width + (k + 0.5) * hh};
}

double PotentialField::V_at(const Vec3& x) const {
    if (!profile) throw StructuralError("PotentialField: profile missing");
    return beta * beta * (*profile)(std::sqrt(2.0 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])));
}

double PotentialField::sup_sqrtV() const { return sqrtV.empty() ? 0.0 : *std::max_element(sqrtV.begin(), sqrtV.end()); }

PotentialField potential_field(const moll::RadialProfile& R, double beta, int grid_n) {
    if (R.dim() != 3) throw DomainError("potential_field: d = 3 only");
    require_positive(beta, "beta");
    if (grid_n < 16) throw ConfigError("potential_field: grid_n must be at least 16");
    if (workspace_bytes(grid_n) > kMemoryGuard) {
        int suggest = grid_n;
        while (suggest > 16 && workspace_bytes(suggest) > kMemoryGuard) suggest -= 8;
        throw ResourceError("potential_field: grid " + std::to_string(grid_n) + "^3 exceeds the memory guard; try " +
                            std::to_string(suggest));
    }
    PotentialField p;
    p.beta = beta;
    p.n = grid_n;
    p.half_width = R.support_radius() / std::sqrt(2.0);
    p.profile = std::make_shared<const moll::RadialProfile>(R);
    std::size_t N = std::size_t(grid_n) * grid_n * grid_n;
    p.V.resize(N);
    p.sqrtV.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        Vec3 c = p.center(i);
        double r = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
        p.V[i] = beta * beta * R(std::sqrt(2.0) * r);
        p.sqrtV[i] = std::sqrt(p.V[i]);
    }
    return p;
}

PotentialField with_beta(const PotentialField& pot, double beta) {
    require_positive(beta, "beta");
    PotentialField p = pot;
    double s = beta / pot.beta;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p.V[i] = pot.V[i] * s * s;
        p.sqrtV[i] = pot.sqrtV[i] * s;
    }
    p.beta = beta;
    return p;
}

double inner(const PotentialField& pot, const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
    return quad::pairwise_sum(prod.data(), prod.size()) * pot.cell_volume();
}

double norm(const PotentialField& pot, const std::vector<double>& a) { return std::sqrt(inner(pot, a, a)); }

std::size_t workspace_bytes(int grid_n) {
    std::size_t M = 2 * std::size_t(grid_n);
    std::size_t cplx = M * M * (M / 2 + 1);
    // Two kernel spectra, one real and one complex work buffer.
    return 2 * cplx * sizeof(fftw_complex) + M * M * M * sizeof(double) + cplx * sizeof(fftw_complex);
}

struct KernelOperator::Fft {
    int n = 0, M = 0;
    std::size_t real_size = 0, cplx_size = 0;
    fftw_plan fwd = nullptr, bwd = nullptr;
    fftw_complex* kernel_hat = nullptr;
    fftw_complex* kernel_sq_hat = nullptr;

    ~Fft() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        fftw_free(kernel_hat);
        fftw_free(kernel_sq_hat);
    }
};

KernelOperator::KernelOperator(PotentialField pot, double lambda) : pot_(std::move(pot)), lambda_(lambda) {
    if (lambda < 0.0) throw DomainError("KernelOperator: lambda must be nonnegative");
    const int n = pot_.n;
    if (workspace_bytes(n) > kMemoryGuard) throw ResourceError("KernelOperator: grid exceeds the memory guard");
    fft_ = std::make_unique<Fft>();
    Fft& F = *fft_;
    F.n = n;
    F.M = 2 * n;
    const int M = F.M;
    F.real_size = std::size_t(M) * M * M;
    F.cplx_size = std::size_t(M) * M * (M / 2 + 1);
    double* work = fftw_alloc_real(F.real_size);
    F.kernel_hat = fftw_alloc_complex(F.cplx_size);
    F.kernel_sq_hat = fftw_alloc_complex(F.cplx_size);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        F.fwd = fftw_plan_dft_r2c_3d(M, M, M, work, F.kernel_hat, FFTW_ESTIMATE);
        F.bwd = fftw_plan_dft_c2r_3d(M, M, M, F.kernel_hat, work, FFTW_ESTIMATE);
    }
    const double h = pot_.h();
    const double diag = yukawa_cell_average(lambda, h), diag_sq = yukawa_sq_cell_average(lambda, h);
    auto wrap = [n, M](int a) { return a < n ? a : a - M; };
    for (int pass = 0; pass < 2; ++pass) {
        for (int a = 0; a < M; ++a)
            for (int b = 0; b < M; ++b)
                for (int c = 0; c < M; ++c) {
                    int ia = wrap(a), ib = wrap(b), ic = wrap(c);
                    double val = 0.0;
                    if (a != n && b != n && c != n) {
                        if (ia == 0 && ib == 0 && ic == 0) {
                            val = pass == 0 ? diag : diag_sq;
                        } else {
                            double r = h * std::sqrt(double(ia * ia + ib * ib + ic * ic));
                            double k = yukawa(lambda, r);
                            val = pass == 0 ? k : k * k;
                        }
                    }
                    work[(std::size_t(a) * M + b) * M + c] = val;
                }
        fftw_execute_dft_r2c(F.fwd, work, pass == 0 ? F.kernel_hat : F.kernel_sq_hat);
    }
    fftw_free(work);
}

KernelOperator::~KernelOperator() = default;
KernelOperator::KernelOperator(KernelOperator&&) noexcept = default;

std::vector<double> KernelOperator::conv_impl(const std::vector<double>& f, bool squared) const {
    const Fft& F = *fft_;
    const int n = F.n, M = F.M;
    if (f.size() != pot_.size()) throw StructuralError("KernelOperator: vector size mismatch");
    double* work = fftw_alloc_real(F.real_size);
    fftw_complex* spec = fftw_alloc_complex(F.cplx_size);
    std::fill(work, work + F.real_size, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) work[(std::size_t(i) * M + j) * M + k] = f[(std::size_t(i) * n + j) * n + k];
    fftw_execute_dft_r2c(F.fwd, work, spec);
    const fftw_complex* K = squared ? F.kernel_sq_hat : F.kernel_hat;
    for (std::size_t q = 0; q < F.cplx_size; ++q) {
        double re = spec[q][0] * K[q][0] - spec[q][1] * K[q][1];
        double im = spec[q][0] * K[q][1] + spec[q][1] * K[q][0];
        spec[q][0] = re;
        spec[q][1] = im;
    }
    fftw_execute_dft_c2r(F.bwd, spec, work);
    const double scale = pot_.cell_volume() / double(F.real_size);
    std::vector<double> out(pot_.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) out[(std::size_t(i) * n + j) * n + k] = work[(std::size_t(i) * M + j) * M + k] * scale;
    fftw_free(work);
    fftw_free(spec);
    return out;
}

std::vector<double> KernelOperator::convolve(const std::vector<double>& f) const { return conv_impl(f, false); }
std::vector<double> KernelOperator::convolve_squared(const std::vector<double>& f) const { return conv_impl(f, true); }

std::vector<double> KernelOperator::apply(const std::vector<double>& u) const {
    std::vector<double> w(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) w[i] = pot_.sqrtV[i] * u[i];
    auto c = convolve(w);
    for (std::size_t i = 0; i < u.size(); ++i) c[i] *= pot_.sqrtV[i];
    return c;
}

double KernelOperator::hilbert_schmidt_norm() const {
    auto c = convolve_squared(pot_.V);
    return std::sqrt(std::max(0.0, inner(pot_, pot_.V, c)));
}

std::vector<double> KernelOperator::dense_kernel() const {
    const std::size_t N = size();
    if (N > 4096) throw ResourceError("dense_kernel: limited to 16^3 grids");
    std::vector<double> K(N * N);
    const double diag = yukawa_cell_average(lambda_, pot_.h());
    for (std::size_t i = 0; i < N; ++i) {
        Vec3 a = pot_.center(i);
        for (std::size_t j = 0; j < N; ++j) {
            if (i == j) {
                K[i * N + j] = diag;
                continue;
            }
            Vec3 b = pot_.center(j);
            double r = std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
            K[i * N + j] = yukawa(lambda_, r);
        }
    }
    return K;
}

double KernelOperator::potential_at(const std::vector<double>& f, const Vec3& x) const {
    const double h = pot_.h();
    const double diag = yukawa_cell_average(lambda_, h);
    std::vector<double> terms;
    terms.reserve(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) {
        if (f[j] == 0.0) continue;
        Vec3 y = pot_.center(j);
        double r = std::sqrt((x[0] - y[0]) * (x[0] - y[0]) + (x[1] - y[1]) * (x[1] - y[1]) + (x[2] - y[2]) * (x[2] - y[2]));
        terms.push_back(f[j] * (r < 1e-9 * h ? diag : yukawa(lambda_, r)));
    }
    return quad::pairwise_sum(terms.data(), terms.size()) * pot_.cell_volume();
}

SpectralResult top_eigen(const KernelOperator& T, double tol, int max_iter) {
    require_positive(tol, "eigen tolerance");
    const PotentialField& pot = T.potential();
    SpectralResult res;
    const std::size_t N = T.size();

    auto normalize = [&](std::vector<double>& v) {
        double s = norm(pot, v);
        if (s == 0.0) return 0.0;
        for (double& x : v) x /= s;
        return s;
    };

    // λ₁ from the positive start 𝔙 (overlaps the Perron vector of the nonnegative kernel).
    std::vector<double> v = pot.sqrtV;
    if (normalize(v) == 0.0) {
        res.v1.assign(N, 0.0);
        res.v2.assign(N, 0.0);
        return res;
    }
    double mu = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        auto w = T.apply(v);
        mu = inner(pot, v, w);
        std::vector<double> r(N);
        for (std::size_t i = 0; i < N; ++i) r[i] = w[i] - mu * v[i];
        res.residual = norm(pot, r);
        if (normalize(w) == 0.0) {
            mu = 0.0;
            break;
        }
        v.swap(w);
        if (res.residual <= tol * std::abs(mu)) break;
    }
    if (it == max_iter) throw NumericError("top_eigen: power iteration did not converge, residual " + std::to_string(res.residual));
    res.lambda1 = mu;
    if (inner(pot, v, pot.sqrtV) < 0.0)
        for (double& x : v) x = -x;
    res.v1 = v;

    // λ₂ on the deflated operator T - λ₁ v₁ ⊗ v₁, kept orthogonal to v₁.
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> q(N);
    for (std::size_t i = 0; i < N; ++i) q[i] = pot.sqrtV[i] > 0.0 ? U(rng) : 0.0;
    auto deflate = [&](std::vector<double>& x) {
        double c = inner(pot, res.v1, x);
        for (std::size_t i = 0; i < N; ++i) x[i] -= c * res.v1[i];
    };
    deflate(q);
    normalize(q);
    double mu2 = 0.0;
    int it2 = 0;
    for (; it2 < max_iter; ++it2) {
        auto w = T.apply(q);
        deflate(w);
        mu2 = inner(pot, q, w);
        std::vector<double> r(N);
        for (std::size_t i = 0; i < N; ++i) r[i] = w[i] - mu2 * q[i];
        res.residual2 = norm(pot, r);
        if (normalize(w) == 0.0) {
            mu2 = 0.0;
            break;
        }
        q.swap(w);
        if (res.residual2 <= tol * std::max(std::abs(mu), 1e-300) * 100.0) break;
    }
    if (it2 == max_iter) throw NumericError("top_eigen: deflated iteration did not converge, residual " + std::to_string(res.residual2));
    res.lambda2 = std::max(0.0, mu2);
    res.v2 = q;
    res.iterations = it + it2;
    return res;
}

double energy(const PotentialField& pot, double lambda, double tol) {
    KernelOperator T(pot, lambda);
    // Only λ₁ is needed; run a single power iteration.
    std::vector<double> v = pot.sqrtV;
    double s = norm(pot, v);
    if (s == 0.0) return 0.0;
    for (double& x : v) x /= s;
    double mu = 0.0;
    for (int it = 0; it < 20000; ++it) {
        auto w = T.apply(v);
        mu = inner(pot, v, w);
        double r2 = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) r2 += (w[i] - mu * v[i]) * (w[i] - mu * v[i]);
        double res = std::sqrt(r2 * pot.cell_volume());
        double nw = norm(pot, w);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nw;
        if (res <= tol * mu) return mu;
    }
    throw NumericError("energy: power iteration did not converge");
}

std::vector<EnergyPoint> energy_curve(const PotentialField& pot, const std::vector<double>& lambdas) {
    std::vector<EnergyPoint> out;
    for (double l : lambdas) {
        if (l < 0.0) throw DomainError("energy_curve: lambda must be nonnegative");
        out.push_back({l, energy(pot, l)});
    }
    return out;
}

BetaL2Report estimate_beta_L2(const moll::RadialProfile& R, const std::vector<int>& ladder) {
    if (ladder.size() < 2) throw ConfigError("estimate_beta_L2: need at least two grid resolutions");
    BetaL2Report rep;
    for (int n : ladder) {
        auto pot1 = potential_field(R, 1.0, n);
        KernelOperator T1(pot1, 0.0);
        auto spec = top_eigen(T1, 1e-11);
        rep.grids.push_back(n);
        rep.h.push_back(pot1.h());
        rep.energy0.push_back(spec.lambda1);
        rep.beta_hat.push_back(1.0 / std::sqrt(spec.lambda1));
        rep.gap_ratio.push_back(spec.lambda2 / spec.lambda1);
    }
    std::size_t k = rep.grids.size();
    double h1 = rep.h[k - 2], h2 = rep.h[k - 1], b1 = rep.beta_hat[k - 2], b2 = rep.beta_hat[k - 1];
    rep.extrapolated = (h1 * h1 * b2 - h2 * h2 * b1) / (h1 * h1 - h2 * h2);
    rep.relative_change = std::abs(b2 - b1) / b2;
    for (std::size_t i = 2; i < k; ++i) {
        double d1 = rep.beta_hat[i - 1] - rep.beta_hat[i - 2], d2 = rep.beta_hat[i] - rep.beta_hat[i - 1];
        if (d1 * d2 < 0.0 || std::abs(d2) > std::abs(d1)) rep.monotone = false;
    }
    for (std::size_t i = 1; i < k; ++i)
        if (rep.h[i] >= rep.h[i - 1]) rep.monotone = false;
    rep.converged = rep.monotone && rep.relative_change <= 0.02;
    return rep;
}

NeumannSeries neumann_series_moment(const PotentialField& pot, int kmax) {
    if (kmax < 1) throw ConfigError("neumann_series_moment: kmax must be at least 1");
    KernelOperator T(pot, 0.0);
    NeumannSeries out;
    out.energy = top_eigen(T, 1e-11).lambda1;
    if (out.energy >= 1.0)
        throw PreconditionError("neumann_series_moment: E_beta(0) = " + std::to_string(out.energy) + " >= 1, the series diverges");
    std::vector<double> w = pot.sqrtV;
    double sum = 0.0;
    for (int k = 0; k <= kmax; ++k) {
        double t = inner(pot, pot.sqrtV, w);
        out.terms.push_back(t);
        sum += t;
        out.partial_sums.push_back(sum);
        if (k < kmax) w = T.apply(w);
    }
    out.limit = sum + out.terms.back() * out.energy / (1.0 - out.energy);
    return out;
}

namespace {

double fd_residual(const PotentialField& pot, double lambda, const std::vector<double>& h) {
    const int n = pot.n;
    const double hh = pot.h();
    std::vector<double> res, ref;
    auto at = [&](int i, int j, int k) { return h[(std::size_t(i) * n + j) * n + k]; };
    for (int i = 1; i < n - 1; ++i)
        for (int j = 1; j < n - 1; ++j)
            for (int k = 1; k < n - 1; ++k) {
                double c = at(i, j, k);
                double lap = (at(i + 1, j, k) + at(i - 1, j, k) + at(i, j + 1, k) + at(i, j - 1, k) + at(i, j, k + 1) +
                              at(i, j, k - 1) - 6.0 * c) / (hh * hh);
                double vh = pot.V[(std::size_t(i) * n + j) * n + k] * c;
                double r = lambda * c - 0.5 * lap - vh;
                res.push_back(r * r);
                ref.push_back(vh * vh);
            }
    return std::sqrt(quad::pairwise_sum(res.data(), res.size()) / quad::pairwise_sum(ref.data(), ref.size()));
}

}  // namespace

BsPrinciple bs_principle_eigenvalue(const PotentialField& pot, double tol) {
    require_positive(tol, "tolerance");
    double e0 = energy(pot, 0.0, 1e-11);
    if (e0 <= 1.0) throw PreconditionError("bs_principle_eigenvalue: E_beta(0) = " + std::to_string(e0) + " <= 1, no bound state");
    double lo = 0.0, hi = 2.0 * pot.sup_sqrtV() * pot.sup_sqrtV() + 1e-3;
    double ehi = energy(pot, hi, 1e-11);
    while (ehi >= 1.0) {
        lo = hi;
        hi *= 2.0;
        ehi = energy(pot, hi, 1e-11);
    }
    BsPrinciple out;
    double mid = 0.5 * (lo + hi), em = 0.0;
    for (int step = 0; step < 200; ++step) {
        mid = 0.5 * (lo + hi);
        em = energy(pot, mid, 1e-12);
        out.bisection_steps = step + 1;
        if (std::abs(em - 1.0) <= tol) break;
        (em > 1.0 ? lo : hi) = mid;
    }
    out.lambda_star = mid;
    KernelOperator T(pot, mid);
    auto spec = top_eigen(T, 1e-12);
    out.energy = spec.lambda1;
    out.u = spec.v1;
    std::vector<double> w(out.u.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = pot.sqrtV[i] * out.u[i];
    out.h = T.convolve(w);
    auto Tu = T.apply(out.u);
    std::vector<double> d(Tu.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = Tu[i] - out.u[i];
    out.fixed_point_residual = norm(pot, d) / norm(pot, out.u);
    std::vector<double> vh(out.h.size());
    for (std::size_t i = 0; i < vh.size(); ++i) vh[i] = pot.V[i] * out.h[i];
    auto gh = T.convolve(vh);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = gh[i] - out.h[i];
    out.integral_residual = norm(pot, d) / norm(pot, out.h);
    out.pde_residual = fd_residual(pot, mid, out.h);
    return out;
}

ZeroResonance zero_resonance(const moll::RadialProfile& R, int grid_n) {
    auto pot1 = potential_field(R, 1.0, grid_n);
    double e = energy(pot1, 0.0, 1e-12);
    auto pot = with_beta(pot1, 1.0 / std::sqrt(e));
    KernelOperator T(pot, 0.0);
    auto spec = top_eigen(T, 1e-11);
    return zero_resonance(pot, spec);
}

ZeroResonance zero_resonance(const PotentialField& pot, const SpectralResult& spec) {
    if (std::abs(spec.lambda1 - 1.0) > 1e-4)
        throw PreconditionError("zero_resonance: lambda_1 = " + std::to_string(spec.lambda1) + " is not within 1e-4 of 1");
    ZeroResonance zr;
    zr.pot = pot;
    zr.spectrum = spec;
    KernelOperator T(pot, 0.0);
    std::vector<double> w(pot.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = pot.sqrtV[i] * spec.v1[i];
    zr.h = T.convolve(w);
    zr.overlap = inner(pot, spec.v1, pot.sqrtV);
    std::vector<double> vh(zr.h.size());
    for (std::size_t i = 0; i < vh.size(); ++i) vh[i] = pot.V[i] * zr.h[i];
    auto gh = T.convolve(vh);
    std::vector<double> d(gh.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = gh[i] - zr.h[i];
    zr.residual = norm(pot, d) / norm(pot, zr.h);

    const double r_phi = pot.half_width / std::sqrt(2.0);
    zr.far_limit = zr.overlap / (2.0 * kPi);
    for (int s = 0; s <= 8; ++s) {
        double r = r_phi * (4.0 + 0.5 * s);
        double acc = 0.0;
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 x{0.0, 0.0, 0.0};
            x[axis] = r;
            double hv = T.potential_at(w, x);
            acc += r * hv;
            zr.decay_constant = std::max(zr.decay_constant, hv * (r - 2.0 * r_phi));
        }
        zr.far_radii.push_back(r);
        zr.far_products.push_back(acc / 3.0);
    }
    return zr;
}

double resonance_at(const ZeroResonance& zr, const Vec3& x) {
    std::vector<double> w(zr.pot.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = zr.pot.sqrtV[i] * zr.spectrum.v1[i];
    KernelOperator T(zr.pot, 0.0);
    return T.potential_at(w, x);
}

double constant_C(const ZeroResonance& zr, const Vec3& z, const Vec3& zp) {
    double b2 = zr.pot.beta * zr.pot.beta;
    return b2 * b2 * resonance_at(zr, z) * resonance_at(zr, zp) / (zr.overlap * zr.overlap);
}

IdentityOne identity_one_check(const ZeroResonance& zr) {
    const PotentialField& pot = zr.pot;
    IdentityOne out;
    std::vector<double> vh(pot.size());
    for (std::size_t i = 0; i < vh.size(); ++i) vh[i] = pot.V[i] * zr.h[i];
    double s = quad::pairwise_sum(vh.data(), vh.size()) * pot.cell_volume();
    out.on_grid = s * s / (zr.overlap * zr.overlap);

    // Vertex lattice: never coincides with a source node, so 𝒢⁰ is sampled off the diagonal.
    const int n = pot.n;
    const double h = pot.h(), L = pot.half_width;
    std::vector<double> w(pot.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = pot.sqrtV[j] * zr.spectrum.v1[j];
    KernelOperator T(pot, 0.0);
    std::vector<double> contrib;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            for (int k = 0; k <= n; ++k) {
                Vec3 p{-L + i * h, -L + j * h, -L + k * h};
                double v = pot.V_at(p);
                if (v == 0.0) continue;
                contrib.push_back(v * T.potential_at(w, p));
            }
    double st = quad::pairwise_sum(contrib) * pot.cell_volume();
    out.staggered = st * st / (zr.overlap * zr.overlap);
    return out;
}

std::vector<double> solve_resolvent(const KernelOperator& T, const std::vector<double>& b, ResolventSolver solver,
                                    double tol, int* iterations) {
    const PotentialField& pot = T.potential();
    const std::size_t N = b.size();
    const double bn = norm(pot, b);
    std::vector<double> x(N, 0.0);
    if (bn == 0.0) return x;
    int it = 0;
    if (solver == ResolventSolver::neumann) {
        // x_{k+1} = b + T x_k
        for (; it < 200000; ++it) {
            auto tx = T.apply(x);
            double d2 = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                double nx = b[i] + tx[i];
                d2 += (nx - x[i]) * (nx - x[i]);
                x[i] = nx;
            }
            if (std::sqrt(d2 * pot.cell_volume()) <= tol * bn) break;
        }
    } else {
        std::vector<double> r = b, p = b;
        double rr = inner(pot, r, r);
        for (; it < 20000; ++it) {
            auto tp = T.apply(p);
            std::vector<double> ap(N);
            for (std::size_t i = 0; i < N; ++i) ap[i] = p[i] - tp[i];
            double alpha = rr / inner(pot, p, ap);
            for (std::size_t i = 0; i < N; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            double rr_new = inner(pot, r, r);
            if (std::sqrt(rr_new) <= tol * bn) {
                ++it;
                break;
            }
            double beta = rr_new / rr;
            rr = rr_new;
            for (std::size_t i = 0; i < N; ++i) p[i] = r[i] + beta * p[i];
        }
    }
    if (iterations) *iterations = it;
    return x;
}

LaplaceLadder laplace_asymptotic_check(const ZeroResonance& zr, const Vec3& z, const Vec3& zp, double Lambda,
                                       const std::vector<double>& eps_list, ResolventSolver solver) {
    require_positive(Lambda, "Lambda");
    const PotentialField& pot = zr.pot;
    const double b2 = pot.beta * pot.beta;
    LaplaceLadder out;
    out.target = 2.0 * kPi / std::sqrt(2.0 * Lambda) * constant_C(zr, z, zp);
    for (double eps : eps_list) {
        require_positive(eps, "eps");
        double lam = eps * eps * Lambda;
        KernelOperator T(pot, lam);
        double e = energy(pot, lam, 1e-11);
        out.eps.push_back(eps);
        out.energies.push_back(e);
        double dz = std::sqrt((z[0] - zp[0]) * (z[0] - zp[0]) + (z[1] - zp[1]) * (z[1] - zp[1]) + (z[2] - zp[2]) * (z[2] - zp[2]));
        out.first_terms.push_back(dz > 0 ? eps * b2 * b2 * yukawa(lam, dz) : INFINITY);
        if (e >= 1.0 - 1e-3) {
            out.values.push_back(NAN);
            out.iterations.push_back(0);
            out.skipped.push_back(true);
            continue;
        }
        std::vector<double> a(pot.size()), b(pot.size());
        for (std::size_t i = 0; i < pot.size(); ++i) {
            Vec3 x = pot.center(i);
            auto dist = [&](const Vec3& p) {
                return std::sqrt((p[0] - x[0]) * (p[0] - x[0]) + (p[1] - x[1]) * (p[1] - x[1]) + (p[2] - x[2]) * (p[2] - x[2]));
            };
            double dz1 = dist(z), dz2 = dist(zp);
            a[i] = pot.sqrtV[i] == 0.0 ? 0.0 : b2 * yukawa(lam, std::max(dz1, 1e-12)) * pot.sqrtV[i];
            b[i] = pot.sqrtV[i] == 0.0 ? 0.0 : pot.sqrtV[i] * yukawa(lam, std::max(dz2, 1e-12)) * b2;
        }
        int iters = 0;
        auto x = solve_resolvent(T, b, solver, 1e-11, &iters);
        out.values.push_back(eps * inner(pot, a, x));
        out.iterations.push_back(iters);
        out.skipped.push_back(false);
    }
    // Richardson in ε for a ladder with ratio 2: eliminate the O(ε) and O(ε²) terms.
    std::vector<double> v;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (!out.skipped[i]) v.push_back(out.values[i]);
    if (v.size() >= 3) {
        std::size_t k = v.size();
        double r1a = 2.0 * v[k - 2] - v[k - 3], r1b = 2.0 * v[k - 1] - v[k - 2];
        out.richardson = (4.0 * r1b - r1a) / 3.0;
    } else if (v.size() == 2) {
        out.richardson = 2.0 * v[1] - v[0];
    } else if (v.size() == 1) {
        out.richardson = v[0];
    }
    out.relative_error = std::abs(out.richardson - out.target) / out.target;
    return out;
}

}  // namespace bosecrit::bs
