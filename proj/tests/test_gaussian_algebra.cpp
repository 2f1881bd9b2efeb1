#include <doctest.h>

#include "bosecrit/errors.hpp"
#include "bosecrit/gaussian_algebra.hpp"
#include "bosecrit/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace bosecrit;
using namespace bosecrit::gauss;

namespace {

constexpr double kPi = std::numbers::pi;

Vec random_vec(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    return {n(rng), n(rng), n(rng)};
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// ∫_{R^3} dw of eval_numeric(expr) with `var` = w, tensor Gauss-Legendre on a box around the peak.
double quadrature_over(const GaussExpr& expr, const std::string& var, Assignment a, const Vec& center, double width) {
    quad::Rule r = quad::gauss_legendre(64, -width, width);
    double total = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i)
        for (std::size_t j = 0; j < r.x.size(); ++j)
            for (std::size_t k = 0; k < r.x.size(); ++k) {
                a[var] = {center[0] + r.x[i], center[1] + r.x[j], center[2] + r.x[k]};
                total += r.w[i] * r.w[j] * r.w[k] * eval_numeric(expr, a);
            }
    return total;
}

}  // namespace

TEST_CASE("fourier_gaussian values") {
    auto f = fourier_gaussian(0.7);
    CHECK(f.evaluate({{"k", {0, 0, 0}}}, 3) == doctest::Approx(1.0).epsilon(1e-15));
    auto g = fourier_gaussian(1.0 / (2 * kPi * kPi));
    CHECK(g.evaluate({{"k", {0, 1, 0}}}, 3) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    Assignment k{{"k", {0.3, -0.2, 0.5}}};
    double one = fourier_gaussian(1.0).evaluate(k, 3);
    CHECK(fourier_gaussian(2.0).evaluate(k, 3) == doctest::Approx(one * one).epsilon(1e-14));
    CHECK_THROWS_AS(fourier_gaussian(0.0), DomainError);
    CHECK_THROWS_AS(fourier_gaussian(-1.0), DomainError);
}

TEST_CASE("split_pair_product examples") {
    Vec z{0.4, -1.1, 0.3};
    Vec mz{-0.4, 1.1, -0.3};
    double r2 = 2.0 * (0.16 + 1.21 + 0.09);
    auto same = split_pair_product(1.3, z, z);
    CHECK(eval_numeric(same, {}) == doctest::Approx(heat_at_zero(1.3, 3) * heat_kernel(1.3, r2, 3)).epsilon(1e-13));
    auto opp = split_pair_product(1.3, z, mz);
    CHECK(eval_numeric(opp, {}) == doctest::Approx(heat_kernel(1.3, r2, 3) * heat_at_zero(1.3, 3)).epsilon(1e-13));
    auto e = split_pair_product(1.0, Vec{1, 0, 0}, Vec{0, 1, 0});
    double direct = heat_kernel(1.0, 1.0, 3) * heat_kernel(1.0, 1.0, 3);
    CHECK(rel_diff(eval_numeric(e, {}), direct) < 1e-12);
}

TEST_CASE("key Gaussian identity holds on random inputs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.05, 5.0);
    auto sym = split_pair_product(1.0, "z1", "z2");
    for (int i = 0; i < 500; ++i) {
        double t = ut(rng);
        Vec z1 = random_vec(rng, 1.5), z2 = random_vec(rng, 1.5);
        auto e = split_pair_product(t, z1, z2);
        double lhs = heat_kernel(t, z1[0] * z1[0] + z1[1] * z1[1] + z1[2] * z1[2], 3) *
                     heat_kernel(t, z2[0] * z2[0] + z2[1] * z2[1] + z2[2] * z2[2], 3);
        CHECK(rel_diff(eval_numeric(e, {}), lhs) < 1e-12);
        auto s = sym;
        for (auto& f : s.factors) f.variance = t;
        CHECK(rel_diff(eval_numeric(s, {{"z1", z1}, {"z2", z2}}), lhs) < 1e-12);
    }
}

TEST_CASE("oplus") {
    CHECK(oplus(2, 2) == doctest::Approx(1.0));
    CHECK(oplus(1, 3) == doctest::Approx(0.75));
    CHECK(oplus(6, 1) == doctest::Approx(6.0 / 7.0));
    CHECK_THROWS_AS(oplus(0, 1), DomainError);
    CHECK_THROWS_AS(oplus(1, -2), DomainError);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    for (int i = 0; i < 200; ++i) {
        double a = u(rng), b = u(rng), c = u(rng);
        CHECK(oplus(a, b) == doctest::Approx(oplus(b, a)).epsilon(1e-15));
        CHECK(oplus(a, b) <= std::min(a, b));
        if (c > a) CHECK(oplus(c, b) >= oplus(a, b));
    }
}

TEST_CASE("Chapman-Kolmogorov on one-dimensional slices") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(0.1, 3.0), ux(-2.0, 2.0);
    for (int i = 0; i < 20; ++i) {
        double s = ut(rng), t = ut(rng), x = ux(rng), z = ux(rng);
        double c = (t * x + s * z) / (s + t), sd = std::sqrt(oplus(s, t));
        quad::Rule r = quad::composite(8, 20, c - 12 * sd, c + 12 * sd);
        double q = 0.0;
        for (std::size_t k = 0; k < r.x.size(); ++k)
            q += r.w[k] * heat_kernel(s, (x - r.x[k]) * (x - r.x[k]), 1) * heat_kernel(t, (r.x[k] - z) * (r.x[k] - z), 1);
        CHECK(rel_diff(q, heat_kernel(s + t, (x - z) * (x - z), 1)) < 1e-8);
    }
}

TEST_CASE("integrate_freq_var examples") {
    GaussExpr e;
    e.times(fourier_gaussian(1.0, LinearForm::var("w")));
    e.times(fourier_gaussian(1.0, LinearForm::var("w")));
    auto r = integrate_freq_var(e, "w");
    CHECK(r.prefactor == doctest::Approx(heat_at_zero(2.0, 3)).epsilon(1e-14));
    REQUIRE(r.factors.size() == 1);
    CHECK(r.factors[0].variance == doctest::Approx(0.5));
    CHECK(eval_numeric(r, {}) == doctest::Approx(heat_at_zero(2.0, 3)).epsilon(1e-14));
    CHECK(r.bound_vars.count("w") == 1);
    CHECK(r.free_vars.count("w") == 0);

    // s1 = 1, s2 = 3 with shift κ = k1 - k2.
    GaussExpr e2;
    e2.times(fourier_gaussian(1.0, LinearForm::var("w") - LinearForm::var("k1")));
    e2.times(fourier_gaussian(3.0, LinearForm::var("w") - LinearForm::var("k2")));
    auto r2 = integrate_freq_var(e2, "w");
    Assignment a{{"k1", {0.2, -0.1, 0.05}}, {"k2", {-0.1, 0.15, 0.0}}};
    double k2n = 0.09 + 0.0625 + 0.0025;
    CHECK(eval_numeric(r2, a) == doctest::Approx(heat_at_zero(4.0, 3) * fourier_kernel(0.75, k2n)).epsilon(1e-13));
    Vec center{(0.2 * 1 + (-0.1) * 3) / 4, (-0.1 + 0.15 * 3) / 4, 0.05 / 4};
    double q = quadrature_over(e2, "w", a, center, 10.0 / (2 * kPi * std::sqrt(4.0)));
    CHECK(rel_diff(q, eval_numeric(r2, a)) < 1e-8);
}

TEST_CASE("integrate_freq_var matches quadrature on random instances") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> us(0.2, 3.0), uc(0.5, 2.0);
    for (int it = 0; it < 6; ++it) {
        double s1 = us(rng), s2 = us(rng), c1 = uc(rng), c2 = -uc(rng);
        GaussExpr e;
        e.times(fourier_gaussian(s1, LinearForm::var("w", c1) + LinearForm::var("k", 0.7)));
        e.times(fourier_gaussian(s2, LinearForm::var("w", c2) - LinearForm::var("q")));
        e.times(fourier_gaussian(0.4, LinearForm::var("k")));
        Assignment a{{"k", random_vec(rng, 0.2)}, {"q", random_vec(rng, 0.2)}};
        auto r = integrate_freq_var(e, "w");
        double a1 = s1 * c1 * c1, a2 = s2 * c2 * c2;
        Vec center(3);
        for (int d = 0; d < 3; ++d) {
            double p1 = -0.7 * a["k"][d] / c1, p2 = a["q"][d] / c2;
            center[d] = (a1 * p1 + a2 * p2) / (a1 + a2);
        }
        double q = quadrature_over(e, "w", a, center, 10.0 / (2 * kPi * std::sqrt(a1 + a2)));
        CHECK(rel_diff(q, eval_numeric(r, a)) < 1e-8);
    }
}

TEST_CASE("integrate_freq_var structural errors") {
    GaussExpr one;
    one.times(fourier_gaussian(1.0, LinearForm::var("w")));
    CHECK_THROWS_AS(integrate_freq_var(one, "w"), StructuralError);
    GaussExpr mixed;
    mixed.times(fourier_gaussian(1.0, LinearForm::var("w")));
    mixed.times(space_gaussian(1.0, LinearForm::var("w")));
    CHECK_THROWS_AS(integrate_freq_var(mixed, "w"), StructuralError);
    GaussExpr three;
    for (int i = 0; i < 3; ++i) three.times(fourier_gaussian(1.0, LinearForm::var("w")));
    CHECK_THROWS_AS(integrate_freq_var(three, "w"), StructuralError);
}

TEST_CASE("complete_square examples") {
    const double s2 = std::sqrt(2.0);
    GaussExpr e;
    e.times(fourier_gaussian(1.0, LinearForm::var("h", s2)));
    e.times(fourier_gaussian(1.0, LinearForm::var("K") - LinearForm::var("h")));
    auto r = complete_square(e, "h");
    REQUIRE(r.factors.size() == 2);
    CHECK(r.factors[0].variance == doctest::Approx(3.0));
    CHECK(r.factors[1].variance == doctest::Approx(2.0 / 3.0));
    CHECK(r.factors[0].arg.coefficient("h") == doctest::Approx(1.0));
    CHECK(r.factors[0].arg.coefficient("K") == doctest::Approx(-1.0 / 3.0));
    CHECK(std::abs(r.factors[1].arg.coefficient("K")) == doctest::Approx(1.0));
    CHECK(r.factors[1].arg.coefficient("h") == 0.0);

    Assignment zero{{"h", {0.3, 0.1, -0.2}}, {"K", {0, 0, 0}}};
    CHECK(eval_numeric(r, zero) == doctest::Approx(fourier_kernel(3.0, 0.09 + 0.01 + 0.04)).epsilon(1e-14));
}

TEST_CASE("complete_square preserves values on random inputs") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ua(0.1, 4.0), uc(0.3, 2.5);
    for (int it = 0; it < 300; ++it) {
        double a = ua(rng), c = uc(rng);
        GaussExpr e;
        e.times(fourier_gaussian(a, LinearForm::var("h", c)));
        e.times(fourier_gaussian(a, LinearForm::var("K") - LinearForm::var("h")));
        e.times(fourier_gaussian(ua(rng), LinearForm::var("K") + LinearForm::constant({0.1, 0.0, -0.2})));
        auto r = complete_square(e, "h");
        Assignment x{{"h", random_vec(rng, 0.3)}, {"K", random_vec(rng, 0.3)}};
        CHECK(rel_diff(eval_numeric(e, x), eval_numeric(r, x)) < 1e-12);
        if (std::abs(c - std::sqrt(2.0)) < 1e-12) CHECK(r.factors[0].variance == doctest::Approx(3 * a));
    }
}

TEST_CASE("eval_numeric") {
    GaussExpr empty;
    empty.prefactor = 2.5;
    CHECK(eval_numeric(empty, {}) == 2.5);
    GaussExpr g;
    g.times(space_gaussian(1.0, LinearForm::var("x")));
    CHECK(eval_numeric(g, {{"x", {0, 0, 0}}}) == doctest::Approx(std::pow(2 * kPi, -1.5)).epsilon(1e-14));
    CHECK(eval_numeric(g, {{"x", {0, 0, 0}}}) == doctest::Approx(0.063494).epsilon(1e-5));
    CHECK_THROWS_AS(eval_numeric(g, {}), StructuralError);
    GaussExpr d;
    d.times(dirac_factor(LinearForm::var("x")));
    CHECK_THROWS_AS(eval_numeric(d, {{"x", {0, 0, 0}}}), StructuralError);
}

TEST_CASE("json debug form") {
    auto e = split_pair_product(1.0, "a", "b");
    auto j = to_json(e);
    CHECK(j["factors"].size() == 2);
    CHECK(j["factors"][0]["domain"] == "space");
    CHECK(j["free_vars"].size() == 2);
}
