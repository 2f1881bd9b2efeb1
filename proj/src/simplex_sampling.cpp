#include "bosecrit/simplex_sampling.hpp"

#include "bosecrit/errors.hpp"
#include "bosecrit/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

namespace bosecrit::simplex {

DirichletMixture::DirichletMixture(std::vector<std::vector<double>> shapes, std::vector<double> mixture_weights, double total)
    : shapes_(std::move(shapes)), mix_(std::move(mixture_weights)), total_(total) {
    if (shapes_.empty() || shapes_.size() != mix_.size()) throw ConfigError("DirichletMixture: shapes/weights mismatch");
    require_positive(total_, "simplex total");
    double s = 0.0;
    for (double w : mix_) s += w;
    for (double& w : mix_) w /= s;
    std::size_t n = shapes_.front().size();
    for (const auto& a : shapes_) {
        if (a.size() != n || n < 2) throw ConfigError("DirichletMixture: inconsistent dimension");
        double sa = 0.0, lg = 0.0;
        for (double ai : a) {
            require_positive(ai, "Dirichlet shape");
            sa += ai;
            lg += std::lgamma(ai);
        }
        log_norm_.push_back(std::lgamma(sa) - lg - (n - 1) * std::log(total_));
    }
}

void DirichletMixture::sample(std::size_t c, std::mt19937_64& rng, double stratum_u, std::vector<double>& x) const {
    const auto& a = shapes_[c];
    x.resize(a.size());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double u = (i == 0) ? stratum_u : unif(rng);
        u = std::min(std::max(u, 1e-300), 1.0 - 1e-16);
        double g = boost::math::gamma_p_inv(a[i], u);
        if (!(g > 0.0)) g = std::numeric_limits<double>::min();
        x[i] = g;
        s += g;
    }
    for (double& xi : x) xi *= total_ / s;
}

double DirichletMixture::density(const std::vector<double>& x) const {
    double p = 0.0;
    for (std::size_t c = 0; c < shapes_.size(); ++c) {
        double lp = log_norm_[c];
        for (std::size_t i = 0; i < x.size(); ++i) lp += (shapes_[c][i] - 1.0) * std::log(x[i] / total_);
        p += mix_[c] * std::exp(lp);
    }
    return p;
}

Estimate summarize(const std::vector<double>& values) {
    Estimate e;
    e.n = values.size();
    if (e.n == 0) return e;
    e.mean = quad::pairwise_sum(values) / e.n;
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - e.mean) * (values[i] - e.mean);
    double var = e.n > 1 ? quad::pairwise_sum(dev) / (e.n - 1) : 0.0;
    e.std_error = std::sqrt(var / e.n);
    return e;
}

}  // namespace bosecrit::simplex
