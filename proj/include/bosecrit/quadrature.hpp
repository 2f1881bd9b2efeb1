#pragma once

#include <functional>
#include <vector>

namespace bosecrit::quad {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
};

// n-point Gauss-Legendre rule on [a, b].
Rule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Composite Gauss-Legendre: `panels` equal panels of `order` nodes each on [a, b].
Rule composite(int panels, int order, double a, double b);

// Composite rule on panels delimited by the given sorted breakpoints.
Rule composite(const std::vector<double>& breaks, int order);

// Adaptive Gauss-Kronrod on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

// Adaptive integral on [a, inf) for integrands with exponential decay.
double integrate_to_inf(const std::function<double(double)>& f, double a, double tol = 1e-12);

// Barycentric weights for Lagrange interpolation through the given nodes.
std::vector<double> barycentric_weights(const std::vector<double>& nodes);

double barycentric_eval(const std::vector<double>& nodes, const std::vector<double>& weights,
                        const double* values, double x);

// Pairwise (cascade) summation; result independent of how the data was produced.
double pairwise_sum(const double* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace bosecrit::quad
