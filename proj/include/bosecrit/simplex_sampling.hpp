#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace bosecrit::simplex {

// Defensive mixture of Dirichlet laws on {x_i > 0, sum x_i = total}, n components.
// Small shape parameters put mass near faces where the singular weights live; the
// uniform component keeps the bulk covered.
class DirichletMixture {
public:
    DirichletMixture(std::vector<std::vector<double>> shapes, std::vector<double> mixture_weights, double total);

    std::size_t dimension() const { return shapes_.front().size(); }
    std::size_t components() const { return shapes_.size(); }
    double mixture_weight(std::size_t c) const { return mix_[c]; }

    // Draws from component c; `stratum_u` in (0, 1) drives the first coordinate's gamma variate.
    void sample(std::size_t c, std::mt19937_64& rng, double stratum_u, std::vector<double>& x) const;

    // Mixture density w.r.t. Lebesgue measure on the first n-1 coordinates.
    double density(const std::vector<double>& x) const;

private:
    std::vector<std::vector<double>> shapes_;
    std::vector<double> mix_;
    std::vector<double> log_norm_;
    double total_;
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

// Mean and standard error of per-sample values, summed pairwise in index order.
Estimate summarize(const std::vector<double>& values);

}  // namespace bosecrit::simplex
