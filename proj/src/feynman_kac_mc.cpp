#include "bosecrit/feynman_kac_mc.hpp"

#include "bosecrit/errors.hpp"
#include "bosecrit/parallel.hpp"
#include "bosecrit/quadrature.hpp"
#include "bosecrit/simplex_sampling.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace bosecrit::fk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kBlock = 256;

double gauss3(double r2, double t) { return std::pow(2 * kPi * t, -1.5) * std::exp(-r2 / (2 * t)); }

// R as a function of |x|², linear interpolation on a fine grid.
class RTable {
public:
    RTable(const moll::RadialProfile& R, double arg_scale) {
        const double rmax = R.support_radius() / arg_scale;
        r2max_ = rmax * rmax;
        v_.resize(kSize + 1);
        for (int i = 0; i <= kSize; ++i) v_[i] = R(arg_scale * std::sqrt(r2max_ * i / kSize));
        v_[kSize] = 0.0;
        inv_h_ = kSize / r2max_;
    }
    double operator()(double r2) const {
        if (r2 >= r2max_) return 0.0;
        double s = r2 * inv_h_;
        int i = int(s);
        double f = s - i;
        return v_[i] + f * (v_[i + 1] - v_[i]);
    }

private:
    static constexpr int kSize = 16384;
    double r2max_ = 0.0, inv_h_ = 0.0;
    std::vector<double> v_;
};

struct PathTask {
    int particles = 2;
    bool pair_mode = true;     // Σ_{i<i'} R(x(i') - x(i)); otherwise R(√2 x) for one particle
    double T = 1.0;
    int steps = 1;
    int refine = 0;
    bool bridge = false;
    // Fills start (and end for bridges) and returns the prefactor weight.
    std::function<double(std::mt19937_64&, double* start, double* end)> endpoints;
    // Multiplies the weight by a function of the final position (free paths only).
    std::function<double(const double* final)> end_factor;
};

struct PathSamples {
    std::vector<double> I, w;
    bool antithetic = true;
};

double interaction(const PathTask& task, const RTable& tab, const double* y) {
    if (!task.pair_mode) return tab(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    double s = 0.0;
    for (int i = 0; i < task.particles; ++i)
        for (int j = i + 1; j < task.particles; ++j) {
            double dx = y[3 * j] - y[3 * i], dy = y[3 * j + 1] - y[3 * i + 1], dz = y[3 * j + 2] - y[3 * i + 2];
            s += tab(dx * dx + dy * dy + dz * dz);
        }
    return s;
}

PathSamples run_paths(const PathTask& task, const RTable& tab, const McConfig& cfg) {
    const int D = 3 * task.particles;
    const std::size_t per_sample = cfg.antithetic ? 2 : 1;
    const std::size_t n_units = (cfg.n_paths + per_sample - 1) / per_sample;
    const std::size_t units_per_block = kBlock / per_sample;
    const std::size_t n_blocks = (n_units + units_per_block - 1) / units_per_block;
    PathSamples out;
    out.antithetic = cfg.antithetic;
    out.I.assign(n_units * per_sample, 0.0);
    out.w.assign(n_units * per_sample, 0.0);
    const int K = task.steps;
    const int fine = K << task.refine;

    parallel_for(n_blocks, resolve_threads(cfg.threads), [&](std::size_t b0, std::size_t b1) {
        boost::random::normal_distribution<double> normal;
        std::vector<double> start(D), end(D), xi(std::size_t(K) * D), eta(std::size_t(fine) * D);
        std::vector<double> path((std::size_t(fine) + 1) * D), tmp((std::size_t(fine) + 1) * D);
        for (std::size_t blk = b0; blk < b1; ++blk) {
            auto rng_a = stream_engine(cfg.seed, 2 * blk);
            auto rng_b = stream_engine(cfg.seed, 2 * blk + 1);
            std::size_t u_end = std::min(n_units, (blk + 1) * units_per_block);
            for (std::size_t u = blk * units_per_block; u < u_end; ++u) {
                double pre = task.endpoints(rng_a, start.data(), end.data());
                for (auto& x : xi) x = normal(rng_a);
                std::size_t n_eta = std::size_t(K) * D * ((std::size_t(1) << task.refine) - 1);
                for (std::size_t q = 0; q < n_eta; ++q) eta[q] = normal(rng_b);
                for (std::size_t rep = 0; rep < per_sample; ++rep) {
                    const double sgn = rep == 0 ? 1.0 : -1.0;
                    double h = task.T / K;
                    std::copy(start.begin(), start.end(), path.begin());
                    for (int k = 0; k < K; ++k) {
                        const double* y = &path[std::size_t(k) * D];
                        double* yn = &path[std::size_t(k + 1) * D];
                        const double* g = &xi[std::size_t(k) * D];
                        if (task.bridge) {
                            double rem = task.T - k * h;
                            if (k == K - 1) {
                                std::copy(end.begin(), end.end(), yn);
                                continue;
                            }
                            double a = h / rem, sd = std::sqrt(h * (rem - h) / rem);
                            for (int c = 0; c < D; ++c) yn[c] = y[c] + (end[c] - y[c]) * a + sd * sgn * g[c];
                        } else {
                            double sd = std::sqrt(h);
                            for (int c = 0; c < D; ++c) yn[c] = y[c] + sd * sgn * g[c];
                        }
                    }
                    // Midpoint refinement: the Brownian midpoint given both ends is N(mean, h/4).
                    int cur = K;
                    std::size_t used = 0;
                    for (int lvl = 0; lvl < task.refine; ++lvl) {
                        double sd = std::sqrt(h / 4.0);
                        for (int k = 0; k < cur; ++k) {
                            const double* y0 = &path[std::size_t(k) * D];
                            const double* y1 = &path[std::size_t(k + 1) * D];
                            double* m = &tmp[std::size_t(2 * k + 1) * D];
                            std::copy(y0, y0 + D, &tmp[std::size_t(2 * k) * D]);
                            for (int c = 0; c < D; ++c) m[c] = 0.5 * (y0[c] + y1[c]) + sd * sgn * eta[used++];
                        }
                        std::copy(&path[std::size_t(cur) * D], &path[std::size_t(cur) * D] + D, &tmp[std::size_t(2 * cur) * D]);
                        path.swap(tmp);
                        cur *= 2;
                        h *= 0.5;
                    }
                    double acc = 0.5 * (interaction(task, tab, &path[0]) + interaction(task, tab, &path[std::size_t(cur) * D]));
                    for (int k = 1; k < cur; ++k) acc += interaction(task, tab, &path[std::size_t(k) * D]);
                    double w = pre;
                    if (task.end_factor) w *= task.end_factor(&path[std::size_t(cur) * D]);
                    out.I[u * per_sample + rep] = acc * h;
                    out.w[u * per_sample + rep] = w;
                }
            }
        }
    });
    return out;
}

MomentEstimate estimate(const PathSamples& s, double beta) {
    const std::size_t per = s.antithetic ? 2 : 1;
    const std::size_t n = s.I.size() / per;
    std::vector<double> unit(n), single(s.I.size()), sq(s.I.size());
    const double b2 = beta * beta;
    for (std::size_t i = 0; i < s.I.size(); ++i) {
        single[i] = s.w[i] * std::exp(b2 * s.I[i]);
        sq[i] = single[i] * single[i];
    }
    for (std::size_t u = 0; u < n; ++u) {
        double v = 0.0;
        for (std::size_t r = 0; r < per; ++r) v += single[u * per + r];
        unit[u] = v / per;
    }
    auto sm = simplex::summarize(unit);
    MomentEstimate e;
    e.mean = sm.mean;
    e.std_error = sm.std_error;
    e.n_effective = n;
    double tot = quad::pairwise_sum(single), tot2 = quad::pairwise_sum(sq);
    e.ess = tot2 > 0.0 ? tot * tot / tot2 : 0.0;
    e.reliable = e.ess >= 100.0;
    e.beta = beta;
    return e;
}

int step_count(double T, double dt) { return std::max(1, int(std::ceil(T / dt - 1e-9))); }

void check_config(int N, const Config& x, const char* what) {
    if (N < 2) throw DomainError(std::string(what) + ": N must be at least 2");
    if (int(x.size()) != N) throw ConfigError(std::string(what) + ": configuration must have N points");
}

void uniform_ball(std::mt19937_64& rng, double ell, double* out) {
    boost::random::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        double a = u(rng), b = u(rng), c = u(rng);
        if (a * a + b * b + c * c <= 1.0) {
            out[0] = ell * a;
            out[1] = ell * b;
            out[2] = ell * c;
            return;
        }
    }
}

}  // namespace

void validate(const McConfig& cfg, double horizon) {
    if (cfg.n_paths < 100) throw ConfigError("McConfig: n_paths must be at least 100");
    if (!(cfg.dt > 0.0)) throw ConfigError("McConfig: dt must be positive");
    if (cfg.dt > horizon / 50.0 * (1 + 1e-12))
        throw ConfigError("McConfig: dt = " + std::to_string(cfg.dt) + " exceeds horizon/50 = " + std::to_string(horizon / 50.0));
    if (cfg.refine < 0 || cfg.refine > 6) throw ConfigError("McConfig: refine must lie in [0, 6]");
}

double InitialDatum::operator()(const double* x) const {
    if (kind == Kind::flat) return 1.0;
    return gauss3(x[0] * x[0] + x[1] * x[1] + x[2] * x[2], nu);
}

double InitialDatum::heat(const double* x, double t) const {
    if (kind == Kind::flat) return 1.0;
    return gauss3(x[0] * x[0] + x[1] * x[1] + x[2] * x[2], nu + t);
}

double free_moment(const Config& x0, double t, const InitialDatum& U0) {
    double p = 1.0;
    for (const auto& x : x0) p *= U0.heat(x.data(), t);
    return p;
}

std::vector<MomentEstimate> simulate_moment(int N, const std::vector<double>& betas, double eps, double t, const Config& x0,
                                            const InitialDatum& U0, const McConfig& cfg, const moll::RadialProfile& R) {
    check_config(N, x0, "simulate_moment");
    require_positive(eps, "eps");
    require_positive(t, "t");
    validate(cfg, t);
    if (U0.kind == InitialDatum::Kind::gaussian) require_positive(U0.nu, "nu");
    RTable tab(R, 1.0);
    PathTask task;
    task.particles = N;
    task.T = t / (eps * eps);
    task.steps = step_count(t, cfg.dt);
    task.refine = cfg.refine;
    task.endpoints = [&](std::mt19937_64&, double* s, double*) {
        for (int i = 0; i < N; ++i)
            for (int c = 0; c < 3; ++c) s[3 * i + c] = x0[i][c] / eps;
        return 1.0;
    };
    task.end_factor = [&](const double* y) {
        double p = 1.0;
        for (int i = 0; i < N; ++i) {
            double x[3] = {eps * y[3 * i], eps * y[3 * i + 1], eps * y[3 * i + 2]};
            p *= U0(x);
        }
        return p;
    };
    auto s = run_paths(task, tab, cfg);
    std::vector<MomentEstimate> out;
    for (double b : betas) {
        auto e = estimate(s, b);
        e.horizon = t;
        e.N = N;
        e.eps = eps;
        out.push_back(e);
    }
    return out;
}

MomentEstimate simulate_moment(int N, double beta, double eps, double t, const Config& x0, const InitialDatum& U0,
                               const McConfig& cfg, const moll::RadialProfile& R) {
    return simulate_moment(N, std::vector<double>{beta}, eps, t, x0, U0, cfg, R).front();
}

double free_kernel(const Config& x, const Config& z, double T) {
    require_positive(T, "T");
    if (x.size() != z.size()) throw ConfigError("free_kernel: configurations differ in size");
    double p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r2 = 0.0;
        for (int c = 0; c < 3; ++c) r2 += (x[i][c] - z[i][c]) * (x[i][c] - z[i][c]);
        p *= gauss3(r2, T);
    }
    return p;
}

std::vector<MomentEstimate> simulate_rescaled_semigroup(int N, const std::vector<double>& betas, double T, const Config& x,
                                                        const Config& z, const McConfig& cfg, const moll::RadialProfile& R) {
    check_config(N, x, "simulate_rescaled_semigroup");
    check_config(N, z, "simulate_rescaled_semigroup");
    require_positive(T, "T");
    validate(cfg, T);
    RTable tab(R, 1.0);
    const double g = free_kernel(x, z, T);
    PathTask task;
    task.particles = N;
    task.T = T;
    task.steps = step_count(T, cfg.dt);
    task.refine = cfg.refine;
    task.bridge = true;
    task.endpoints = [&](std::mt19937_64&, double* s, double* e) {
        for (int i = 0; i < N; ++i)
            for (int c = 0; c < 3; ++c) {
                s[3 * i + c] = x[i][c];
                e[3 * i + c] = z[i][c];
            }
        return g;
    };
    auto s = run_paths(task, tab, cfg);
    std::vector<MomentEstimate> out;
    for (double b : betas) {
        auto e = estimate(s, b);
        e.horizon = T;
        e.N = N;
        out.push_back(e);
    }
    return out;
}

MomentEstimate simulate_rescaled_semigroup(int N, double beta, double T, const Config& x, const Config& z,
                                           const McConfig& cfg, const moll::RadialProfile& R) {
    return simulate_rescaled_semigroup(N, std::vector<double>{beta}, T, x, z, cfg, R).front();
}

MomentEstimate rescaled_moment(int N, double beta, double eps, double t, const Config& x0, double nu, const McConfig& cfg,
                               double width_factor, const moll::RadialProfile& R) {
    check_config(N, x0, "rescaled_moment");
    require_positive(eps, "eps");
    require_positive(t, "t");
    require_positive(nu, "nu");
    require_positive(width_factor, "width_factor");
    validate(cfg, t);
    RTable tab(R, 1.0);
    const double T = t / (eps * eps);
    // G_T(z - x/ε) G_ν(εz) ∝ Gaussian in z with mean x/ε · b/(T + b) and variance Tb/(T + b), b = ν/ε².
    const double bb = nu / (eps * eps);
    const double shrink = bb / (T + bb);
    const double var = width_factor * T * bb / (T + bb);
    PathTask task;
    task.particles = N;
    task.T = T;
    task.steps = step_count(t, cfg.dt);
    task.refine = cfg.refine;
    task.bridge = true;
    task.endpoints = [&, T, var, shrink](std::mt19937_64& rng, double* s, double* e) {
        boost::random::normal_distribution<double> normal;
        double w = 1.0;
        for (int i = 0; i < N; ++i) {
            double r2 = 0.0, d2 = 0.0, q2 = 0.0;
            for (int c = 0; c < 3; ++c) {
                s[3 * i + c] = x0[i][c] / eps;
                double dz = std::sqrt(var) * normal(rng);
                e[3 * i + c] = shrink * s[3 * i + c] + dz;
                double off = e[3 * i + c] - s[3 * i + c], ez = eps * e[3 * i + c];
                r2 += off * off;
                d2 += ez * ez;
                q2 += dz * dz;
            }
            w *= gauss3(r2, T) * gauss3(d2, nu) / gauss3(q2, var);
        }
        return w;
    };
    auto s = run_paths(task, tab, cfg);
    auto e = estimate(s, beta);
    e.horizon = t;
    e.N = N;
    e.eps = eps;
    return e;
}

std::vector<MomentEstimate> quadratic_form_theta(int N, const std::vector<double>& betas, double T, double ell,
                                                 const McConfig& cfg, const moll::RadialProfile& R) {
    if (N < 2) throw DomainError("quadratic_form_theta: N must be at least 2");
    require_positive(T, "T");
    if (!(ell > 0.0)) throw ConfigError("quadratic_form_theta: support radius must be positive");
    validate(cfg, T);
    RTable tab(R, 1.0);
    const double vol = 4.0 / 3.0 * kPi * ell * ell * ell;
    PathTask task;
    task.particles = N;
    task.T = T;
    task.steps = step_count(T, cfg.dt);
    task.refine = cfg.refine;
    task.bridge = true;
    task.endpoints = [&, T, vol](std::mt19937_64& rng, double* s, double* e) {
        double w = 1.0;
        for (int i = 0; i < N; ++i) {
            uniform_ball(rng, ell, s + 3 * i);
            uniform_ball(rng, ell, e + 3 * i);
            double r2 = 0.0;
            for (int c = 0; c < 3; ++c) r2 += (s[3 * i + c] - e[3 * i + c]) * (s[3 * i + c] - e[3 * i + c]);
            w *= vol * vol * gauss3(r2, T);
        }
        return w;
    };
    auto s = run_paths(task, tab, cfg);
    std::vector<MomentEstimate> out;
    for (double b : betas) {
        auto e = estimate(s, b);
        e.horizon = T;
        e.N = N;
        out.push_back(e);
    }
    return out;
}

double free_quadratic_form_theta(int N, double T, double ell) {
    require_positive(T, "T");
    require_positive(ell, "ell");
    // ∫_B∫_B G_T(x - z) = ∫_0^{2ℓ} 4πu² g_T(u) |B ∩ (B + u)| du with the lens volume.
    double q = quad::integrate([T, ell](double u) {
        double lens = kPi * (4 * ell + u) * (2 * ell - u) * (2 * ell - u) / 12.0;
        return 4 * kPi * u * u * gauss3(u * u, T) * lens;
    }, 0.0, 2 * ell, 1e-14);
    return std::pow(q, N);
}

GrowthProbe growth_probe(int N, const std::vector<double>& betas, const std::vector<double>& T_grid, double ell,
                         const McConfig& cfg, const moll::RadialProfile& R) {
    if (T_grid.size() < 4) throw ConfigError("growth_probe: need at least 4 horizons");
    for (std::size_t i = 1; i < T_grid.size(); ++i)
        if (!(T_grid[i] > T_grid[i - 1])) throw ConfigError("growth_probe: horizons must increase");
    GrowthProbe gp;
    gp.betas = betas;
    gp.T_grid = T_grid;
    gp.values.assign(betas.size(), {});
    for (double T : T_grid) {
        auto est = quadratic_form_theta(N, betas, T, ell, cfg, R);
        for (std::size_t b = 0; b < betas.size(); ++b) gp.values[b].push_back(est[b]);
    }
    for (std::size_t b = 0; b < betas.size(); ++b) {
        // Weighted least squares for log value, with σ_log = stderr / mean.
        double sw = 0, st = 0, sy = 0;
        bool ok = true;
        std::vector<double> w(T_grid.size()), y(T_grid.size());
        for (std::size_t k = 0; k < T_grid.size(); ++k) {
            const auto& e = gp.values[b][k];
            ok = ok && e.reliable && e.mean > 0.0;
            double sl = e.mean > 0.0 ? std::max(e.std_error / e.mean, 1e-12) : 1.0;
            w[k] = 1.0 / (sl * sl);
            y[k] = e.mean > 0.0 ? std::log(e.mean) : 0.0;
            sw += w[k];
            st += w[k] * T_grid[k];
            sy += w[k] * y[k];
        }
        double tbar = st / sw, ybar = sy / sw, stt = 0, sty = 0;
        for (std::size_t k = 0; k < T_grid.size(); ++k) {
            stt += w[k] * (T_grid[k] - tbar) * (T_grid[k] - tbar);
            sty += w[k] * (T_grid[k] - tbar) * (y[k] - ybar);
        }
        gp.slopes.push_back(sty / stt);
        gp.slope_errors.push_back(std::sqrt(1.0 / stt));
        gp.reliable.push_back(ok);
    }
    return gp;
}

double series_term_quadrature(double beta, double T, double b, int k, const moll::RadialProfile& R) {
    require_positive(T, "T");
    require_positive(b, "b");
    if (k < 0 || k > 2) throw DomainError("series_term_quadrature: only k = 0, 1, 2 are supported");
    if (R.dim() != 3) throw DomainError("series_term_quadrature: d = 3 only");
    const double G0 = std::pow(2 * kPi * (T + b), -1.5);
    if (k == 0) return G0 * G0;
    const double rmax = R.support_radius() / std::sqrt(2.0);
    auto Rw = [&R](double rho) { return R(std::sqrt(2.0) * rho); };
    auto radial_rule = [rmax](double width) {
        std::vector<double> br{0.0};
        for (double c : {0.5, 1.0, 2.0, 4.0, 8.0})
            if (c * width < rmax) br.push_back(c * width);
        br.push_back(rmax);
        return quad::composite(br, 10);
    };
    const double b2 = beta * beta;
    if (k == 1) {
        // β² G_{T+b}(0)² ∫_0^T P(σ(t)) dt, P(σ) = ∫ G_σ(w) R(√2 w) dw, σ = t(T - t + b)/(T + b).
        auto tr = quad::composite(6, 10, 0.0, std::sqrt(T));
        double s = 0.0;
        for (std::size_t i = 0; i < tr.x.size(); ++i) {
            double t = tr.x[i] * tr.x[i];
            double sig = t * (T - t + b) / (T + b);
            double P = 0.0;
            if (sig < 1e-14) {
                P = R(0.0);
            } else {
                auto rr = radial_rule(std::sqrt(sig));
                for (std::size_t j = 0; j < rr.x.size(); ++j)
                    P += rr.w[j] * 4 * kPi * rr.x[j] * rr.x[j] * gauss3(rr.x[j] * rr.x[j], sig) * Rw(rr.x[j]);
            }
            s += tr.w[i] * 2 * tr.x[i] * P;
        }
        return b2 * G0 * G0 * s;
    }
    // k = 2 in relative coordinates; the center of mass contributes G_{T+b}(0).
    auto ur = quad::composite(4, 8, 0.0, 1.0);
    auto gh = quad::gauss_legendre(32, 0.0, 1.0);
    double total = 0.0;
    for (std::size_t i = 0; i < ur.x.size(); ++i) {
        double u1 = std::sqrt(T) * ur.x[i], t1 = u1 * u1, jac1 = 2 * u1 * std::sqrt(T) * ur.w[i];
        auto r1 = radial_rule(std::sqrt(t1));
        std::vector<double> A(r1.x.size());
        for (std::size_t p = 0; p < r1.x.size(); ++p) {
            double rho = r1.x[p];
            A[p] = r1.w[p] * 4 * kPi * rho * rho * gauss3(rho * rho, t1) * Rw(rho);
        }
        double vmax = std::sqrt(T - t1);
        for (std::size_t j = 0; j < ur.x.size(); ++j) {
            double v = vmax * ur.x[j], tau = v * v, jac2 = 2 * v * vmax * ur.w[j];
            double s_end = T - t1 - tau + b;
            double sq = std::sqrt(tau), inner = 0.0;
            for (std::size_t p = 0; p < r1.x.size(); ++p) {
                double rho1 = r1.x[p];
                double lo = std::max(-9.0, -rho1 / sq), hi = std::min(9.0, (rmax - rho1) / sq);
                if (hi <= lo) continue;
                double acc = 0.0;
                for (std::size_t q = 0; q < gh.x.size(); ++q) {
                    double uu = lo + (hi - lo) * gh.x[q];
                    double rho2 = rho1 + sq * uu;
                    double m = 2 * rho1 * rho2 / tau;
                    double fac = m < 1e-10 ? 1.0 / tau : -std::expm1(-m) / (2 * rho1 * rho2);
                    // √τ · K_τ · 4πρ₂² with K_τ the angular mean of G_τ.
                    double kern = std::pow(2 * kPi, -1.5) * std::exp(-0.5 * uu * uu) * fac * 4 * kPi * rho2 * rho2;
                    acc += gh.w[q] * (hi - lo) * kern * Rw(rho2) * gauss3(rho2 * rho2, s_end);
                }
                inner += A[p] * acc;
            }
            total += jac1 * jac2 * inner;
        }
    }
    return b2 * b2 * G0 * total;
}

SeriesComparison series_partial_sum(double beta, double T, double b, const moll::RadialProfile& R) {
    SeriesComparison out;
    for (int k = 0; k <= 2; ++k) out.terms.push_back(series_term_quadrature(beta, T, b, k, R));
    out.partial_sum = out.terms[0] + out.terms[1] + out.terms[2];
    double q = out.terms[1] > 0.0 ? out.terms[2] / out.terms[1] : 0.0;
    out.remainder = q < 1.0 ? out.terms[2] * q / (1.0 - q) : INFINITY;
    return out;
}

MomentEstimate truncated_two_body_functional(double beta, double T, const McConfig& cfg, const moll::RadialProfile& phi,
                                             const moll::RadialProfile& R) {
    require_positive(beta, "beta");
    require_positive(T, "T");
    validate(cfg, T);
    RTable tab(R, std::sqrt(2.0));
    const double r_phi = phi.support_radius(), phi0 = phi(0.0);
    PathTask task;
    task.particles = 1;
    task.pair_mode = false;
    task.T = T;
    task.steps = step_count(T, cfg.dt);
    task.refine = cfg.refine;
    task.endpoints = [&](std::mt19937_64& rng, double* s, double*) {
        // X + Y with X, Y iid of density φ, by rejection from the uniform law on B(0, r_φ).
        boost::random::uniform_real_distribution<double> u01(0.0, 1.0);
        double p[2][3];
        for (auto& pt : p)
            for (;;) {
                uniform_ball(rng, r_phi, pt);
                double r = std::sqrt(pt[0] * pt[0] + pt[1] * pt[1] + pt[2] * pt[2]);
                if (u01(rng) * phi0 <= phi(r)) break;
            }
        for (int c = 0; c < 3; ++c) s[c] = (p[0][c] + p[1][c]) / std::sqrt(2.0);
        return beta * beta / std::pow(2.0, 1.5);
    };
    auto s = run_paths(task, tab, cfg);
    auto e = estimate(s, beta);
    e.horizon = T;
    e.N = 2;
    return e;
}

}  // namespace bosecrit::fk
