#include "bosecrit/iterated_integrals.hpp"

#include "bosecrit/errors.hpp"
#include "bosecrit/parallel.hpp"
#include "bosecrit/quadrature.hpp"
#include "bosecrit/simplex_sampling.hpp"

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace bosecrit::iter {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kPi = std::numbers::pi;

double logistic(double u) { return u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u)); }

struct Build {
    std::vector<std::vector<double>> eta, zeta;
};

Build build(int m_max, int panels, int order, const std::vector<double>& y, const std::vector<double>& w,
            const std::vector<double>& ref, const std::vector<double>& bary) {
    const std::size_t N = y.size();
    const std::size_t Q = order;
    // σ(y_i - x_j) depends only on the panel offset and the two local node indices.
    std::vector<double> S((2 * panels - 1) * Q * Q);
    for (int dp = -(panels - 1); dp <= panels - 1; ++dp)
        for (std::size_t a = 0; a < Q; ++a)
            for (std::size_t b = 0; b < Q; ++b)
                S[((dp + panels - 1) * Q + a) * Q + b] = logistic(dp + ref[a] - ref[b]);

    quad::Rule unit = quad::gauss_legendre(order, 0.0, 1.0);
    Build out;
    out.eta.assign(m_max + 1, std::vector<double>(N, 1.0));
    out.zeta.assign(m_max + 1, std::vector<double>(N, 1.0));
    std::vector<double> wprev(N), wz(N);
    for (int m = 1; m <= m_max; ++m) {
        const auto& ep = out.eta[m - 1];
        const auto& zp = out.zeta[m - 1];
        for (std::size_t j = 0; j < N; ++j) {
            wprev[j] = w[j] * ep[j];
            wz[j] = w[j] * zp[j];
        }
        for (std::size_t i = 0; i < N; ++i) {
            std::size_t pi = i / Q, a = i % Q;
            double s = 0.0;
            for (std::size_t pj = 0; pj < static_cast<std::size_t>(panels); ++pj) {
                const double* row = &S[(((long)pi - (long)pj + panels - 1) * Q + a) * Q];
                const double* wv = &wprev[pj * Q];
                for (std::size_t b = 0; b < Q; ++b) s += row[b] * wv[b];
            }
            out.eta[m][i] = s;

            double z = 0.0;
            for (std::size_t pj = 0; pj < pi; ++pj) {
                const double* row = &S[(((long)pi - (long)pj + panels - 1) * Q + a) * Q];
                const double* wv = &wz[pj * Q];
                for (std::size_t b = 0; b < Q; ++b) z += row[b] * wv[b];
            }
            double lo = static_cast<double>(pi), len = y[i] - lo;
            for (std::size_t q = 0; q < Q; ++q) {
                double x = lo + len * unit.x[q];
                double zv = quad::barycentric_eval(ref, bary, &zp[pi * Q], x - lo);
                z += len * unit.w[q] * logistic(y[i] - x) * zv;
            }
            out.zeta[m][i] = z;
        }
    }
    return out;
}

}  // namespace

IteratedIntegrals::IteratedIntegrals(int m_max, int panels, int order) : m_max_(m_max), panels_(panels), order_(order) {
    if (m_max < 1 || m_max > 20) throw ConfigError("IteratedIntegrals: m_max must lie in [1, 20]");
    if (panels < 40 || order < 8) throw ConfigError("IteratedIntegrals: need at least 40 panels of order 8");
    quad::Rule r = quad::composite(panels, order, 0.0, panels);
    y_ = r.x;
    w_ = r.w;
    ref_x_ = quad::gauss_legendre(order, 0.0, 1.0).x;
    bary_ = quad::barycentric_weights(ref_x_);

    Build fine = build(m_max, panels, order, y_, w_, ref_x_, bary_);

    // Lower-order rebuild for the error estimate.
    int order2 = order - 4;
    quad::Rule r2 = quad::composite(panels, order2, 0.0, panels);
    auto ref2 = quad::gauss_legendre(order2, 0.0, 1.0).x;
    Build coarse = build(m_max, panels, order2, r2.x, r2.w, ref2, quad::barycentric_weights(ref2));

    auto moment = [](const std::vector<double>& yy, const std::vector<double>& ww, const std::vector<double>& f) {
        std::vector<double> t(f.size());
        for (std::size_t j = 0; j < f.size(); ++j) t[j] = ww[j] * std::exp(-yy[j]) * f[j];
        return quad::pairwise_sum(t);
    };

    L_.assign(m_max + 2, 0.0);
    Lerr_.assign(m_max + 2, 0.0);
    zint_.assign(m_max + 1, 0.0);
    for (int m = 0; m <= m_max; ++m) {
        EtaTable t;
        t.m = m;
        t.v.resize(y_.size());
        for (std::size_t i = 0; i < y_.size(); ++i) t.v[i] = std::exp(-y_[i]);
        t.eta = fine.eta[m];
        t.zeta = fine.zeta[m];
        double lf = moment(y_, w_, fine.eta[m]), lc = moment(r2.x, r2.w, coarse.eta[m]);
        double zf = moment(y_, w_, fine.zeta[m]), zc = moment(r2.x, r2.w, coarse.zeta[m]);
        t.error_estimate = std::max(std::abs(lf - lc), std::abs(zf - zc));
        L_[m + 1] = lf;
        Lerr_[m + 1] = std::abs(lf - lc);
        zint_[m] = zf;
        if (t.error_estimate > 1e-7 * std::max(1.0, lf))
            throw NumericError("IteratedIntegrals: quadrature error estimate above 1e-7 at m = " + std::to_string(m));
        tables_.push_back(std::move(t));
    }
}

const EtaTable& IteratedIntegrals::table(int m) const {
    if (m < 0 || m > m_max_) throw DomainError("table index out of range");
    return tables_[m];
}

double IteratedIntegrals::interp(const std::vector<double>& vals, double y) const {
    if (y < 0.0 || y > panels_) throw DomainError("evaluation point outside the tabulated range");
    int p = std::min(static_cast<int>(y), panels_ - 1);
    return quad::barycentric_eval(ref_x_, bary_, &vals[p * order_], y - p);
}

double IteratedIntegrals::eta(int m, double v) const {
    require_positive(v, "v");
    if (v > 1.0) throw DomainError("v must lie in (0, 1]");
    return interp(table(m).eta, -std::log(v));
}

double IteratedIntegrals::zeta(int m, double v) const {
    require_positive(v, "v");
    if (v > 1.0) throw DomainError("v must lie in (0, 1]");
    return interp(table(m).zeta, -std::log(v));
}

double IteratedIntegrals::L(int m) const {
    if (m < 1 || m > m_max_ + 1) throw DomainError("L index out of range");
    return L_[m];
}

double IteratedIntegrals::L_error(int m) const {
    if (m < 1 || m > m_max_ + 1) throw DomainError("L index out of range");
    return Lerr_[m];
}

double IteratedIntegrals::zeta_integral(int k) const {
    if (k < 0 || k > m_max_) throw DomainError("zeta index out of range");
    return zint_[k];
}

std::vector<EtaTable> eta_zeta_tables(int m_max, int grid_n) {
    IteratedIntegrals ii(m_max, grid_n);
    std::vector<EtaTable> out;
    for (int m = 0; m <= m_max; ++m) out.push_back(ii.table(m));
    return out;
}

const IteratedIntegrals& default_tables() {
    static const IteratedIntegrals ii(20, 200, 16);
    return ii;
}

double L(int m) { return default_tables().L(m); }
double zeta_integral(int k) { return default_tables().zeta_integral(k); }

double eta_binomial_check(int m, const std::vector<double>& v_samples) {
    if (m < 0 || m > 8) throw DomainError("eta_binomial_check: m must lie in [0, 8]");
    const auto& ii = default_tables();
    double worst = std::numeric_limits<double>::infinity();
    for (double v : v_samples) {
        double bound = 0.0;
        for (int k = 0; k <= m; ++k)
            bound += boost::math::binomial_coefficient<double>(m, k) * ii.zeta(k, v) * std::pow(kLn2, m - k);
        worst = std::min(worst, ii.eta(m, v) - bound);
    }
    return worst;
}

double r_integral(double a, double u) {
    require_positive(a, "a");
    require_positive(u, "u");
    return (2.0 / a) * std::sqrt(u / (a + u));
}

double ratio_constant(bool include_099) {
    double r = std::sqrt(4.0 / 3.0) * 4.0 * kLn2 / kPi;
    return include_099 ? 0.99 * r : r;
}

namespace {

// a K(a) with K(a) = ∫_0^∞ e^{-r} r^{-1/2} (a + 3r/4)^{-3/2} dr; tends to 2 (4/3)^{1/2} as a -> 0.
class ScaledK {
public:
    ScaledK() {
        const int n = 1801;
        lo_ = -40.0;
        hi_ = 5.0;
        step_ = (hi_ - lo_) / (n - 1);
        std::vector<double> vals(n);
        for (int i = 0; i < n; ++i) {
            double a = std::exp(lo_ + i * step_);
            vals[i] = 2.0 * quad::integrate_to_inf(
                                [a](double x) { return std::exp(-a * x * x) * std::pow(1.0 + 0.75 * x * x, -1.5); }, 0.0, 1e-13);
        }
        spline_ = std::make_unique<boost::math::interpolators::cardinal_quintic_b_spline<double>>(vals, lo_, step_);
        limit_ = 2.0 * std::sqrt(4.0 / 3.0);
    }
    double operator()(double a) const {
        double la = std::log(a);
        if (la <= lo_) return limit_;
        if (la >= hi_) return std::sqrt(kPi / a) * (1.0 - 0.5625 / a);  // large-a tail
        return (*spline_)(la);
    }

private:
    double lo_, hi_, step_, limit_;
    std::unique_ptr<boost::math::interpolators::cardinal_quintic_b_spline<double>> spline_;
};

const ScaledK& scaled_K() {
    static const ScaledK k;
    return k;
}

}  // namespace

double simplex_constant(int m) {
    if (m < 1 || m > 12) throw DomainError("simplex_constant: m must lie in [1, 12]");
    static std::mutex mu;
    static std::vector<double> cache;
    std::lock_guard<std::mutex> lock(mu);
    if (cache.empty()) {
        // y = ln v on [-150, 4]; measure dv = v dy.
        quad::Rule r = quad::composite(154, 16, -150.0, 4.0);
        const std::size_t N = r.x.size();
        std::vector<double> v(N), mu_w(N);
        for (std::size_t i = 0; i < N; ++i) {
            v[i] = std::exp(r.x[i]);
            mu_w[i] = r.w[i] * v[i] * std::exp(-v[i]);
        }
        const auto& aK = scaled_K();
        std::vector<double> Kmat(N * N);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                double a = v[i] + v[j];
                Kmat[i * N + j] = Kmat[j * N + i] = aK(a) / a;
            }
        std::vector<double> g(N, 1.0), next(N), tmp(N);
        cache.assign(13, 0.0);
        for (int k = 1; k <= 12; ++k) {
            for (std::size_t i = 0; i < N; ++i) tmp[i] = mu_w[i] * g[i];
            cache[k] = quad::pairwise_sum(tmp) * std::pow(kPi, -k);
            for (std::size_t i = 0; i < N; ++i) {
                double s = 0.0;
                const double* row = &Kmat[i * N];
                for (std::size_t j = 0; j < N; ++j) s += row[j] * tmp[j];
                next[i] = s;
            }
            g.swap(next);
        }
    }
    return cache[m];
}

// Integrand on the simplex of gaps (v_1, r_2, v_2, ..., r_m, v_m, slack), all summing to t.
static double simplex_weight(int m, const std::vector<double>& x) {
    double f = std::pow(kPi, -m);
    for (int j = 2; j <= m; ++j) {
        double vprev = x[2 * (j - 2)], r = x[2 * (j - 2) + 1], v = x[2 * (j - 1)];
        f *= std::pow(r, -0.5) * std::pow(vprev + v + 0.75 * r, -1.5);
    }
    return f;
}

SimplexMc simplex_integral_mc(int m, double t, const SimplexMcConfig& cfg) {
    if (m < 2 || m > 6) throw DomainError("simplex_integral_mc: m must lie in [2, 6]");
    require_positive(t, "t");
    if (cfg.n_samples < 100) throw ConfigError("simplex_integral_mc: n_samples must be at least 100");
    const std::size_t n = 2 * m;  // 2m-1 free gaps plus slack
    double alpha = 1.0 / (2 * m - 1);
    std::vector<double> small(n, alpha), bulk(n, 1.0);
    small.back() = 1.0;
    for (int j = 2; j <= m; ++j) bulk[2 * (j - 2) + 1] = 0.5;
    simplex::DirichletMixture mix({small, bulk}, {0.5, 0.5}, t);

    const std::size_t block = 256;
    const std::size_t nblocks = (cfg.n_samples + block - 1) / block;
    std::vector<double> vals(nblocks * block, 0.0);
    parallel_for(nblocks, resolve_threads(cfg.threads), [&](std::size_t b0, std::size_t b1) {
        std::vector<double> x;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (std::size_t b = b0; b < b1; ++b) {
            auto rng = stream_engine(cfg.seed, b);
            for (std::size_t k = 0; k < block; ++k) {
                std::size_t idx = b * block + k;
                std::size_t c = idx % 2;
                double su = ((idx / 2) % cfg.strata + unif(rng)) / cfg.strata;
                mix.sample(c, rng, su, x);
                vals[idx] = simplex_weight(m, x) / mix.density(x);
            }
        }
    });
    vals.resize(cfg.n_samples);
    auto e = simplex::summarize(vals);
    return {e.mean, e.std_error};
}

SimplexCheck simplex_lower_bound_check(int m, double t, const SimplexMcConfig& cfg) {
    if (m < 3 || m > 6) throw DomainError("simplex_lower_bound_check: m must lie in [3, 6]");
    SimplexCheck c;
    c.m = m;
    c.t = t;
    auto mc = simplex_integral_mc(m, t, cfg);
    c.lhs_estimate = mc.mean;
    c.lhs_stderr = mc.std_error;
    c.lhs_quadrature = t * simplex_constant(m);
    double Ct = t * simplex_constant(3) * 3.0 * 2.0 / std::pow(1.008, 3);
    c.rhs = Ct * std::pow(1.008, m) / (m * (m - 1.0));
    c.holds = c.lhs_estimate >= c.rhs - 3.0 * c.lhs_stderr && c.lhs_quadrature >= c.rhs;
    return c;
}

}  // namespace bosecrit::iter
