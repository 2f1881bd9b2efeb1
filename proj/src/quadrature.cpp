#include "bosecrit/quadrature.hpp"

#include "bosecrit/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <map>
#include <mutex>

namespace bosecrit::quad {

namespace {

// Reference rule on [-1, 1], cached per order.
const Rule& reference_rule(int n) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    auto zeros = boost::math::legendre_p_zeros<double>(n);  // nonnegative zeros, ascending
    Rule r;
    auto add = [&](double x) {
        double dp = boost::math::legendre_p_prime(n, x);
        r.x.push_back(x);
        r.w.push_back(2.0 / ((1.0 - x * x) * dp * dp));
    };
    for (auto it2 = zeros.rbegin(); it2 != zeros.rend(); ++it2)
        if (*it2 != 0.0) add(-*it2);
    for (double z : zeros) add(z);
    return cache.emplace(n, std::move(r)).first->second;
}

}  // namespace

Rule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw ConfigError("gauss_legendre: need at least one node");
    const Rule& ref = reference_rule(n);
    Rule r;
    r.x.resize(ref.x.size());
    r.w.resize(ref.w.size());
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < ref.x.size(); ++i) {
        r.x[i] = mid + half * ref.x[i];
        r.w[i] = half * ref.w[i];
    }
    return r;
}

Rule composite(int panels, int order, double a, double b) {
    std::vector<double> breaks(panels + 1);
    for (int i = 0; i <= panels; ++i) breaks[i] = a + (b - a) * i / panels;
    return composite(breaks, order);
}

Rule composite(const std::vector<double>& breaks, int order) {
    Rule r;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        if (breaks[p + 1] <= breaks[p]) continue;
        Rule g = gauss_legendre(order, breaks[p], breaks[p + 1]);
        r.x.insert(r.x.end(), g.x.begin(), g.x.end());
        r.w.insert(r.w.end(), g.w.begin(), g.w.end());
    }
    return r;
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol);
}

double integrate_to_inf(const std::function<double(double)>& f, double a, double tol) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double x) { return f(x); }, a,
                                std::numeric_limits<double>::infinity(), tol);
}

std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
    std::size_t n = nodes.size();
    std::vector<double> w(n, 1.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) w[j] /= (nodes[j] - nodes[k]);
    return w;
}

double barycentric_eval(const std::vector<double>& nodes, const std::vector<double>& weights,
                        const double* values, double x) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        double d = x - nodes[j];
        if (d == 0.0) return values[j];
        double t = weights[j] / d;
        num += t * values[j];
        den += t;
    }
    return num / den;
}

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

}  // namespace bosecrit::quad
