#include <doctest.h>

#include "bosecrit/errors.hpp"
#include "bosecrit/mollifier.hpp"
#include "bosecrit/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace bosecrit;
using namespace bosecrit::moll;

TEST_CASE("bump profile") {
    const auto& phi = default_phi();
    CHECK(phi(1.0) == 0.0);
    CHECK(phi(1.3) == 0.0);
    for (std::size_t i = 1; i < phi.values().size(); ++i) CHECK(phi.values()[i] <= phi.values()[i - 1]);
    CHECK(std::abs(phi.total_integral() - 1.0) < 1e-10);
    CHECK_THROWS_AS(build_bump(1.0, 32), ConfigError);
    CHECK_THROWS_AS(build_bump(0.0, 128), DomainError);

    // Independent normalization: Gauss-Kronrod on the unnormalized shape.
    double c = phi(0.0) * std::exp(1.0);
    double z = 4 * std::numbers::pi * quad::integrate([](double r) { return r * r * std::exp(-1 / (1 - r * r)); }, 0, 1, 1e-15);
    CHECK(std::abs(c * z - 1.0) < 1e-10);
}

TEST_CASE("self-convolution R = phi * phi") {
    const auto& R = default_R();
    CHECK(R.support_radius() == doctest::Approx(2.0));
    CHECK(R(2.0) == 0.0);
    CHECK(R(2.5) == 0.0);
    CHECK(std::abs(R.total_integral() - 1.0) < 1e-8);
    CHECK(R(1.0) > 0.0);
    for (std::size_t i = 1; i < R.values().size(); ++i) CHECK(R.values()[i] <= R.values()[i - 1] + 1e-15);
    // R(0) = ∫ φ^2.
    const auto& phi = default_phi();
    double r0 = phi.radial_integral([&](double r) { return phi(r); });
    CHECK(R(0.0) == doctest::Approx(r0).epsilon(1e-10));
    // Support edge sits within one grid cell of 2 r_phi.
    double h = R.radii()[1] - R.radii()[0];
    CHECK(R(2.0 - 2 * h) > 0.0);
}

TEST_CASE("self-convolution matches a direct three-dimensional quadrature at sample radii") {
    const auto& phi = default_phi();
    const auto& R = default_R();
    // (φ*φ)(r) = ∫ φ(|y|) φ(|r e - y|) dy in spherical coordinates around the origin.
    quad::Rule rr = quad::composite(16, 16, 0.0, 1.0), mu = quad::composite(8, 16, -1.0, 1.0);
    for (double r : {0.1, 0.5, 1.0, 1.5, 1.9}) {
        double s = 0.0;
        for (std::size_t i = 0; i < rr.x.size(); ++i)
            for (std::size_t j = 0; j < mu.x.size(); ++j) {
                double y = rr.x[i], c = mu.x[j];
                double d = std::sqrt(std::max(0.0, r * r + y * y - 2 * r * y * c));
                s += rr.w[i] * mu.w[j] * 2 * std::numbers::pi * y * y * phi(y) * phi(d);
            }
        CHECK(R(r) == doctest::Approx(s).epsilon(1e-6));
    }
}

TEST_CASE("self-convolution commutes with scaling") {
    const double s = 0.6;
    auto phis = build_bump(s, 2048);
    auto Rs = self_convolve(phis, 2048);
    for (double r : {0.0, 0.2, 0.5, 0.9, 1.1}) CHECK(std::abs(Rs(r) - default_R()(r / s) / (s * s * s)) < 1e-8);
}

TEST_CASE("beta_eps") {
    CHECK(beta_eps(1, 1, 3) == 1.0);
    CHECK(beta_eps(1, 0.01, 3) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(beta_eps(2, 0.25, 4) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("rescaled profile keeps unit mass") {
    const auto& R = default_R();
    double eps = 0.5;
    double m = 4 * std::numbers::pi * quad::integrate([&](double r) { return r * r * rescaled(R, eps, r); }, 0, 2 * eps, 1e-12);
    CHECK(m == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("rearrangement") {
    auto ball = GridFunction::sample(3, 40, 1.2, [](const std::vector<double>& x) {
        return x[0] * x[0] + x[1] * x[1] + x[2] * x[2] < 0.64 ? 1.0 : 0.0;
    });
    auto rb = rearrange(ball);
    CHECK(rb.values == ball.values);

    auto ann = GridFunction::sample(3, 60, 1.1, [](const std::vector<double>& x) {
        double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return (r2 < 1.0 && r2 >= 0.25) ? 1.0 : 0.0;
    });
    auto ra = rearrange(ann);
    CHECK(ra.l1_norm() == doctest::Approx(ann.l1_norm()).epsilon(1e-14));
    double rmax = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i)
        if (ra.values[i] > 0) rmax = std::max(rmax, ra.radius(i));
    CHECK(std::abs(rmax - std::cbrt(7.0 / 8.0)) < 2 * ra.h());

    auto bumpy = GridFunction::sample(3, 24, 1.0, [](const std::vector<double>& x) {
        return std::exp(-((x[0] - 0.3) * (x[0] - 0.3) + x[1] * x[1] * 2 + x[2] * x[2])) * (1.2 + std::sin(5 * x[0]));
    });
    auto rr = rearrange(bumpy);
    for (double lvl : {0.1, 0.5, 1.0, 1.5}) CHECK(superlevel_volume(rr, lvl) == superlevel_volume(bumpy, lvl));
    CHECK(rearrange(rr).values == rr.values);
    for (std::size_t i = 0; i < rr.size(); ++i)
        for (std::size_t j : {i + 1, i + 24}) {
            if (j >= rr.size()) continue;
            if (rr.radius(i) < rr.radius(j)) CHECK(rr.values[i] >= rr.values[j]);
        }

    auto neg = ball;
    neg.values[0] = -1.0;
    CHECK_THROWS_AS(rearrange(neg), DomainError);
}

TEST_CASE("shrink rate and theta supports") {
    CHECK(shrink_rate(3) == doctest::Approx(0.956466).epsilon(1e-6));
    CHECK(theta_support(0, 0.7, 3) == 0.7);
    for (int k = 1; k < 30; ++k) CHECK(theta_support(k, 1.0, 3) < theta_support(k - 1, 1.0, 3));
    int k = theta_support_index(1.0, 0.5, 3);
    CHECK(theta_support(k, 1.0, 3) <= 0.5);
    CHECK(theta_support(k - 1, 1.0, 3) > 0.5);
    CHECK(k == 16);
}

TEST_CASE("profile CSV") {
    auto csv = default_phi().to_csv();
    CHECK(csv.rfind("radius,value\n", 0) == 0);
}
