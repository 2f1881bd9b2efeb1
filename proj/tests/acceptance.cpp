#include "bosecrit/birman_schwinger.hpp"
#include "bosecrit/feynman_kac_mc.hpp"
#include "bosecrit/gaussian_algebra.hpp"
#include "bosecrit/iterated_integrals.hpp"
#include "bosecrit/quadrature.hpp"
#include "bosecrit/sublimiting_n3.hpp"
#include "bosecrit/variational.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace bosecrit;
using nlohmann::json;

namespace {

// Tolerances and budgets.
constexpr double kIterTol = 1e-6;
constexpr double kLmSlack = 1e-3;
constexpr double kBinomialSlack = -1e-6;
constexpr double kRatioFloor = 1.008;
constexpr double kRatioValue = 1.0089;
constexpr double kRatioTol = 1e-4;
constexpr double kGridAgreement = 0.02;
constexpr double kGapFraction = 0.05;
constexpr double kResonanceResidual = 1e-4;
constexpr double kIdentityOneTol = 0.02;
constexpr double kLaplaceTol = 0.10;
constexpr double kRayleighSlack = 0.02;
constexpr double kNeumannRel = 0.05;
constexpr double kSigmas = 3.0;
constexpr double kSlopeSigmas = 2.0;
constexpr double kDualityTol = 1e-8;
constexpr double kBQuadTol = 1e-6;
// Lower constant for term(m)(m-1)(m-2)/1.008^{m-1}, m = 3..7, at the standard configuration.
// Frozen at half the smallest value observed in an independent high-sample run (1.08e-4 at m = 3).
constexpr double kSubRatioFloor = 5e-5;
constexpr double kAlgebraTol = 1e-12;
constexpr double kQuadTol = 1e-8;
constexpr double kBudget1 = 60, kBudget2 = 600, kBudget4 = 900, kBudget5 = 1200, kBudget6 = 60;

constexpr std::size_t kPaths = 200000;
constexpr double kTruncationHorizon = 40.0;
constexpr std::size_t kSubSamples = 1000000;

using Clock = std::chrono::steady_clock;

struct Report {
    bool ok = true;
    std::ostringstream detail;
    Report() { detail << std::setprecision(8); }
    void check(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

struct StochasticRun {
    std::string name;
    std::function<json(int)> run;
    std::string reference;  // payload at one thread
};
std::vector<StochasticRun> g_runs;

json run_and_register(const std::string& name, std::function<json(int)> f) {
    json j = f(1);
    g_runs.push_back({name, std::move(f), j.dump()});
    return j;
}

json estimate_json(const fk::MomentEstimate& e) {
    return {{"mean", e.mean}, {"std_error", e.std_error}, {"ess", e.ess}, {"n", e.n_effective}};
}

fk::McConfig mc(std::size_t n, double dt, std::uint64_t seed, int threads) {
    fk::McConfig c;
    c.n_paths = n;
    c.dt = dt;
    c.seed = seed;
    c.threads = threads;
    return c;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

void emit(int id, const std::string& title, Report& r, double seconds, double budget) {
    if (budget > 0 && seconds > budget) {
        r.ok = false;
        r.detail << " [failed: runtime over " << budget << " s]";
    }
    std::cout << (r.ok ? "PASS" : "FAIL") << " " << id << " " << title << " (" << std::fixed << std::setprecision(1) << seconds
              << " s):" << std::defaultfloat << std::setprecision(8) << r.detail.str() << std::endl;
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// 1. Iterated integrals.
Report criterion1() {
    Report r;
    const double ln2 = std::numbers::ln2;
    double e2 = std::abs(iter::L(2) - 2 * ln2);
    r.check(e2 <= kIterTol, "L_2");
    double ez = 0.0;
    for (int k = 0; k <= 10; ++k) ez = std::max(ez, std::abs(iter::zeta_integral(k) - std::pow(ln2, k)));
    r.check(ez <= kIterTol, "zeta integrals");
    double lm = 1e300;
    for (int m = 1; m <= 10; ++m) lm = std::min(lm, iter::L(m) / std::pow(2 * ln2, m - 1));
    r.check(lm >= 1 - kLmSlack, "L_m lower bound");
    std::vector<double> grid;
    for (int i = 1; i <= 50; ++i) grid.push_back(i / 50.0);
    double slack = 1e300;
    for (int m = 0; m <= 8; ++m) slack = std::min(slack, iter::eta_binomial_check(m, grid));
    r.check(slack >= kBinomialSlack, "binomial slack");
    double rc = iter::ratio_constant();
    r.check(rc >= kRatioFloor && std::abs(rc - kRatioValue) <= kRatioTol, "ratio constant");
    r.detail << " |L2-2ln2|=" << e2 << " max|zeta_k-(ln2)^k|=" << ez << " min L_m/(2ln2)^(m-1)=" << lm << " binomial slack=" << slack
             << " ratio_constant=" << rc;
    return r;
}

// 2. Birman-Schwinger suite; also returns the ladder.
Report criterion2(bs::BetaL2Report& ladder) {
    Report r;
    const auto& R = moll::default_R();
    ladder = bs::estimate_beta_L2(R, {24, 32, 48});
    r.check(ladder.relative_change <= kGridAgreement, "grid agreement");
    const double bh = ladder.beta_hat.back();
    auto pot = bs::potential_field(R, bh, 48);
    auto curve = bs::energy_curve(pot, {0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0});
    bool decreasing = true;
    for (std::size_t i = 1; i < curve.size(); ++i) decreasing = decreasing && curve[i].energy < curve[i - 1].energy;
    r.check(decreasing, "energy curve decreasing");
    double gap = 1.0 - ladder.gap_ratio.back();
    r.check(gap > kGapFraction, "spectral gap");
    auto zr = bs::zero_resonance(R, 32);
    r.check(zr.residual <= kResonanceResidual, "zero-resonance residual");
    auto id = bs::identity_one_check(zr);
    r.check(std::abs(id.staggered - 1.0) <= kIdentityOneTol, "identity one");
    auto lap = bs::laplace_asymptotic_check(zr, {2.0, 0.0, 0.0}, {0.0, 2.0, 0.0}, 1.0, {0.2, 0.1, 0.05});
    r.check(lap.relative_error <= kLaplaceTol, "Laplace ladder");
    r.detail << " beta_hat(24,32,48)=" << ladder.beta_hat[0] << "," << ladder.beta_hat[1] << "," << ladder.beta_hat[2]
             << " rel_change=" << ladder.relative_change << " (1-l2/l1)=" << gap << " resonance_residual=" << zr.residual
             << " identity_one=" << id.staggered << " laplace richardson=" << lap.richardson << " target=" << lap.target
             << " rel_err=" << lap.relative_error;
    return r;
}

// 3. Cross-module consistency.
Report criterion3(double bh) {
    Report r;
    const auto& R = moll::default_R();
    double worst = 1e300;
    for (double ls = -4.0; ls <= 4.0 + 1e-12; ls += 0.25)
        worst = std::min(worst, var::rayleigh_I({std::exp(ls), 2, 3}, R) / (bh * bh));
    r.check(worst >= 1 - kRayleighSlack, "Rayleigh bound");
    const double beta = 0.5 * bh;
    double limit = bs::neumann_series_moment(bs::potential_field(R, beta, 48), 200).limit;
    json j = run_and_register("truncated two-body functional", [beta](int threads) {
        return estimate_json(fk::truncated_two_body_functional(beta, kTruncationHorizon, mc(kPaths, 0.02, 31, threads)));
    });
    double m = j["mean"], se = j["std_error"];
    r.check(std::abs(m - limit) <= std::max(kNeumannRel * limit, kSigmas * se), "Neumann vs MC");
    r.detail << " min I2/beta_hat^2=" << worst << " neumann=" << limit << " mc(T=" << kTruncationHorizon << ")=" << m << " +- " << se
             << " rel_diff=" << std::abs(m - limit) / limit;
    return r;
}

// 4. Monte Carlo suite.
Report criterion4(double bh) {
    Report r;
    const fk::InitialDatum g{fk::InitialDatum::Kind::gaussian, 0.7};
    for (int N : {2, 3}) {
        fk::Config x0;
        for (int i = 0; i < N; ++i) x0.push_back({0.2 * i, -0.1 * i, 0.05});
        json j = run_and_register("free moment N=" + std::to_string(N), [=](int threads) {
            return estimate_json(fk::simulate_moment(N, 0.0, 0.5, 1.0, x0, g, mc(kPaths, 0.01, 41 + N, threads)));
        });
        double exact = fk::free_moment(x0, 1.0, g), m = j["mean"], se = j["std_error"];
        r.check(std::abs(m - exact) <= kSigmas * se, "free moment N=" + std::to_string(N));
        r.detail << " N=" << N << " free mc=" << m << " +- " << se << " exact=" << exact;

        fk::Config xd;
        for (int i = 0; i < N; ++i) xd.push_back({0.1 * i, 0.05 * (i % 2), 0.0});
        const fk::InitialDatum gd{fk::InitialDatum::Kind::gaussian, 0.3};
        json h = run_and_register("dt halving N=" + std::to_string(N), [=](int threads) {
            auto c = mc(kPaths, 0.02, 51 + N, threads);
            auto coarse = fk::simulate_moment(N, 0.5 * bh, 0.5, 1.0, xd, gd, c);
            c.refine = 1;
            auto fine = fk::simulate_moment(N, 0.5 * bh, 0.5, 1.0, xd, gd, c);
            return json{{"coarse", estimate_json(coarse)}, {"fine", estimate_json(fine)}};
        });
        double dc = h["coarse"]["mean"], df = h["fine"]["mean"], dse = h["fine"]["std_error"];
        r.check(std::abs(dc - df) <= dse, "dt halving N=" + std::to_string(N));
        r.detail << " dt-halving change=" << std::abs(dc - df) << " stderr=" << dse;
    }
    json p = run_and_register("growth probe", [bh](int threads) {
        auto gp = fk::growth_probe(2, {0.5 * bh, 1.5 * bh}, {2, 4, 6, 8, 10}, 1.0, mc(kPaths, 0.02, 61, threads));
        return json{{"slopes", gp.slopes}, {"slope_errors", gp.slope_errors}};
    });
    double s0 = p["slopes"][0], e0 = p["slope_errors"][0], s1 = p["slopes"][1], e1 = p["slope_errors"][1];
    r.check(s0 <= kSlopeSigmas * e0, "subcritical slope");
    r.check(s1 - kSlopeSigmas * e1 > 0.0, "supercritical slope");
    r.detail << " slope(0.5 beta_hat)=" << s0 << " +- " << e0 << " slope(1.5 beta_hat)=" << s1 << " +- " << e1;
    return r;
}

// 5. Sub-limiting N = 3 suite.
Report criterion5() {
    Report r;
    auto point = [](int m) {
        std::vector<double> iv;
        for (int i = 0; i < 2 * m; ++i) iv.push_back((0.5 + 0.3 * std::sin(1.3 * i + 0.2)) / (2 * m + 1));
        return sub::make_time_point(iv, 1.0, 1.0);
    };
    double dual = 0.0;
    for (int m : {3, 4, 6}) dual = std::max(dual, sub::duality_residual(point(m), 20, 101 + m));
    r.check(dual <= kDualityTol, "duality");
    const sub::Config3 xa{{{0.1, -0.2, 0.05}, {0.6, 0.1, -0.2}, {-0.3, 0.5, 0.3}}};
    const sub::LabelSequence fig{{1, 2, 1}, {2, 3, 1}, {1, 3, 1}};
    auto tp = sub::make_time_point({0.2, 0.1, 0.15, 0.12, 0.18, 0.1}, 1.2, 0.3);
    double bq = rel_diff(sub::b_quadrature_value(xa, tp, fig), sub::integrand_pointwise(xa, tp, fig));
    r.check(bq <= kBQuadTol, "B quadrature");
    bool counts = true;
    for (int m = 1; m <= 10; ++m) counts = counts && sub::enumerate_sequences(m).size() == 3u * (1u << (m - 1));
    r.check(counts, "sequence count");
    const sub::Config3 x0{{{0, 0, 0}, {0.5, 0, 0}, {0, 0.5, 0}}};
    json ps = run_and_register("partial sums", [x0](int threads) {
        sub::SubMcConfig c;
        c.n_samples = kSubSamples;
        c.seed = 71;
        c.threads = threads;
        auto s = sub::partial_sum_QN(x0, 1.0, 1.0, 7, c);
        return json{{"term", s.term}, {"term_error", s.term_error}, {"ratio", s.ratio_vs_1008}};
    });
    r.detail << " duality=" << dual << " B quadrature=" << bq << " counts " << (counts ? "ok" : "wrong") << " ratio-3sd:";
    for (int m = 3; m <= 7; ++m) {
        double ratio = ps["ratio"][m - 1], scale = double((m - 1) * (m - 2)) / std::pow(1.008, m - 1);
        double lo = ratio - kSigmas * scale * ps["term_error"][m - 1].get<double>();
        r.check(lo >= kSubRatioFloor, "ratio floor m=" + std::to_string(m));
        r.detail << " m" << m << "=" << lo;
    }
    return r;
}

// 6. Gaussian algebra.
Report criterion6() {
    using namespace gauss;
    Report r;
    std::mt19937_64 rng(20240607);
    std::normal_distribution<double> nz(0.0, 1.0);
    auto rv = [&](double s) { return Vec{s * nz(rng), s * nz(rng), s * nz(rng)}; };
    auto n2 = [](const Vec& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; };
    std::uniform_real_distribution<double> ut(0.05, 5.0);

    double key = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double t = ut(rng);
        Vec z1 = rv(1.5), z2 = rv(1.5);
        key = std::max(key, rel_diff(eval_numeric(split_pair_product(t, z1, z2), {}), heat_kernel(t, n2(z1), 3) * heat_kernel(t, n2(z2), 3)));
    }
    r.check(key <= kAlgebraTol, "key identity");

    double ck = 0.0;
    std::uniform_real_distribution<double> us(0.1, 3.0), ux(-2.0, 2.0);
    for (int i = 0; i < 40; ++i) {
        double s = us(rng), t = us(rng), x = ux(rng), z = ux(rng);
        double c = (t * x + s * z) / (s + t), sd = std::sqrt(oplus(s, t));
        quad::Rule q = quad::composite(8, 20, c - 12 * sd, c + 12 * sd);
        double v = 0.0;
        for (std::size_t k = 0; k < q.x.size(); ++k)
            v += q.w[k] * heat_kernel(s, (x - q.x[k]) * (x - q.x[k]), 1) * heat_kernel(t, (q.x[k] - z) * (q.x[k] - z), 1);
        ck = std::max(ck, rel_diff(v, heat_kernel(s + t, (x - z) * (x - z), 1)));
    }
    r.check(ck <= kQuadTol, "Chapman-Kolmogorov");

    // Two shifted factors integrate to G_{s1+s2}(0) 𝒢_{s1⊕s2}(k1 - k2).
    double ifv = 0.0;
    for (int i = 0; i < 300; ++i) {
        double s1 = us(rng), s2 = us(rng);
        GaussExpr e;
        e.times(fourier_gaussian(s1, LinearForm::var("w") - LinearForm::var("k1")));
        e.times(fourier_gaussian(s2, LinearForm::var("w") - LinearForm::var("k2")));
        Assignment a{{"k1", rv(0.3)}, {"k2", rv(0.3)}};
        Vec d{a["k1"][0] - a["k2"][0], a["k1"][1] - a["k2"][1], a["k1"][2] - a["k2"][2]};
        ifv = std::max(ifv, rel_diff(eval_numeric(integrate_freq_var(e, "w"), a), heat_at_zero(s1 + s2, 3) * fourier_kernel(oplus(s1, s2), n2(d))));
    }
    r.check(ifv <= kAlgebraTol, "integrate_freq_var algebraic");

    // Against tensor quadrature with a scaled integration variable.
    double ifq = 0.0;
    std::uniform_real_distribution<double> uc(0.5, 2.0);
    for (int i = 0; i < 4; ++i) {
        double s1 = us(rng), s2 = us(rng), c1 = uc(rng), c2 = -uc(rng);
        GaussExpr e;
        e.times(fourier_gaussian(s1, LinearForm::var("w", c1) + LinearForm::var("k", 0.7)));
        e.times(fourier_gaussian(s2, LinearForm::var("w", c2) - LinearForm::var("q")));
        Assignment a{{"k", rv(0.2)}, {"q", rv(0.2)}};
        double a1 = s1 * c1 * c1, a2 = s2 * c2 * c2, width = 10.0 / (2 * std::numbers::pi * std::sqrt(a1 + a2));
        Vec center(3);
        for (int d = 0; d < 3; ++d) center[d] = (a1 * (-0.7 * a["k"][d] / c1) + a2 * (a["q"][d] / c2)) / (a1 + a2);
        quad::Rule q = quad::gauss_legendre(64, -width, width);
        double v = 0.0;
        Assignment b = a;
        for (std::size_t x = 0; x < q.x.size(); ++x)
            for (std::size_t y = 0; y < q.x.size(); ++y)
                for (std::size_t z = 0; z < q.x.size(); ++z) {
                    b["w"] = {center[0] + q.x[x], center[1] + q.x[y], center[2] + q.x[z]};
                    v += q.w[x] * q.w[y] * q.w[z] * eval_numeric(e, b);
                }
        ifq = std::max(ifq, rel_diff(v, eval_numeric(integrate_freq_var(e, "w"), a)));
    }
    r.check(ifq <= kQuadTol, "integrate_freq_var quadrature");

    double cs = 0.0;
    std::uniform_real_distribution<double> ua(0.1, 4.0), ucs(0.3, 2.5);
    for (int i = 0; i < 1000; ++i) {
        double a = ua(rng), c = ucs(rng);
        GaussExpr e;
        e.times(fourier_gaussian(a, LinearForm::var("h", c)));
        e.times(fourier_gaussian(ua(rng), LinearForm::var("K") - LinearForm::var("h")));
        e.times(fourier_gaussian(ua(rng), LinearForm::var("K") + LinearForm::constant({0.1, 0.0, -0.2})));
        Assignment x{{"h", rv(0.3)}, {"K", rv(0.3)}};
        cs = std::max(cs, rel_diff(eval_numeric(e, x), eval_numeric(complete_square(e, "h"), x)));
    }
    r.check(cs <= kAlgebraTol, "complete_square");
    r.detail << " key identity=" << key << " Chapman-Kolmogorov=" << ck << " integrate_freq_var=" << ifv << "/" << ifq
             << " complete_square=" << cs;
    return r;
}

// 7. Determinism across thread counts.
Report criterion7() {
    Report r;
    for (const auto& run : g_runs)
        for (int threads : {4, 8}) {
            bool same = run.run(threads).dump() == run.reference;
            r.check(same, run.name + " at " + std::to_string(threads) + " threads");
        }
    r.detail << " " << g_runs.size() << " stochastic runs compared at 1/4/8 threads";
    return r;
}

}  // namespace

int main() {
    bool all = true;
    auto go = [&](int id, const std::string& title, double budget, const std::function<Report()>& f) {
        auto t0 = Clock::now();
        Report r;
        try {
            r = f();
        } catch (const std::exception& e) {
            r.ok = false;
            r.detail << " [exception: " << e.what() << "]";
        }
        emit(id, title, r, elapsed(t0), budget);
        all = all && r.ok;
    };
    bs::BetaL2Report ladder;
    go(1, "iterated-integral suite", kBudget1, criterion1);
    go(2, "Birman-Schwinger suite", kBudget2, [&] { return criterion2(ladder); });
    const double bh = ladder.beta_hat.empty() ? 0.0 : ladder.beta_hat.back();
    go(3, "cross-module consistency", 0, [&] { return criterion3(bh); });
    go(4, "Monte Carlo suite", kBudget4, [&] { return criterion4(bh); });
    go(5, "sub-limiting N=3 suite", kBudget5, criterion5);
    go(6, "Gaussian algebra suite", kBudget6, criterion6);
    go(7, "determinism", 0, criterion7);
    return all ? 0 : 1;
}
