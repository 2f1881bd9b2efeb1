#include "bosecrit/mollifier.hpp"

#include "bosecrit/errors.hpp"
#include "bosecrit/quadrature.hpp"

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace bosecrit::moll {

namespace {

constexpr double kPi = std::numbers::pi;

double sphere_area(int dim) { return 2.0 * std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim); }

// Even extension to [-r_max, r_max] so the spline sees a smooth function through r = 0.
std::function<double(double)> spline_of(const std::vector<double>& r, const std::vector<double>& v, double support) {
    std::size_t n = r.size();
    double h = r[1] - r[0];
    std::vector<double> ext(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        ext[n - 1 + i] = v[i];
        ext[n - 1 - i] = v[i];
    }
    boost::math::interpolators::cardinal_quintic_b_spline<double> s(ext, -r.back(), h, {0.0, 0.0}, {0.0, 0.0});
    return [s, support](double x) {
        x = std::abs(x);
        if (x >= support) return 0.0;
        return std::max(0.0, s(x));
    };
}

std::vector<double> uniform_radii(double rmax, int n) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = rmax * i / (n - 1);
    return r;
}

}  // namespace

RadialProfile::RadialProfile(int dim, double support_radius, std::vector<double> radii, std::vector<double> values,
                             std::function<double(double)> exact)
    : dim_(dim), support_(support_radius), r_(std::move(radii)), v_(std::move(values)) {
    if (r_.size() != v_.size() || r_.size() < 8) throw ConfigError("RadialProfile: need matching radii/values, at least 8 samples");
    for (double x : v_)
        if (x < 0.0) throw DomainError("RadialProfile: values must be nonnegative");
    eval_ = exact ? std::move(exact) : spline_of(r_, v_, support_);
    total_ = radial_integral([](double) { return 1.0; });
}

double RadialProfile::operator()(double r) const { return eval_(r); }

double RadialProfile::sup() const { return *std::max_element(v_.begin(), v_.end()); }

double RadialProfile::radial_integral(const std::function<double(double)>& g) const {
    static const quad::Rule unit = quad::composite(128, 12, 0.0, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < unit.x.size(); ++i) {
        double r = unit.x[i] * support_;
        s += unit.w[i] * std::pow(r, dim_ - 1) * eval_(r) * g(r);
    }
    return s * support_ * sphere_area(dim_);
}

RadialProfile RadialProfile::scaled(double s) const {
    require_positive(s, "profile scale");
    std::vector<double> v = v_;
    for (double& x : v) x *= s;
    auto f = eval_;
    return RadialProfile(dim_, support_, r_, v, [f, s](double r) { return s * f(r); });
}

std::string RadialProfile::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "radius,value\n";
    for (std::size_t i = 0; i < r_.size(); ++i) os << r_[i] << ',' << v_[i] << '\n';
    return os.str();
}

RadialProfile build_bump(double r_phi, int grid_n, int dim) {
    require_positive(r_phi, "r_phi");
    if (grid_n < 64) throw ConfigError("build_bump: grid_n must be at least 64");
    if (dim < 1) throw DomainError("build_bump: dimension must be positive");
    auto shape = [r_phi](double r) {
        double u = r / r_phi;
        if (u >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - u * u));
    };
    double z = sphere_area(dim) *
               quad::integrate([&](double r) { return std::pow(r, dim - 1) * shape(r); }, 0.0, r_phi, 1e-15);
    double c = 1.0 / z;
    auto phi = [shape, c](double r) { return c * shape(std::abs(r)); };
    auto radii = uniform_radii(r_phi, grid_n);
    std::vector<double> vals(grid_n);
    for (int i = 0; i < grid_n; ++i) vals[i] = phi(radii[i]);
    return RadialProfile(dim, r_phi, radii, vals, phi);
}

// (f*f)(r) = (2 pi / r) ∫ s f(s) [P(min(r+s, a)) - P(|r-s|)] ds,  P(x) = ∫_0^x t f(t) dt.
RadialProfile self_convolve(const RadialProfile& phi, int grid_n) {
    if (phi.dim() != 3) throw DomainError("self_convolve: radial reduction implemented for d = 3");
    if (grid_n < 64) throw ConfigError("self_convolve: grid_n must be at least 64");
    const double a = phi.support_radius();

    const int pn = 8192;
    std::vector<double> pr = uniform_radii(a, pn), pv(pn, 0.0);
    const double ph = pr[1] - pr[0];
    quad::Rule cell = quad::gauss_legendre(10, 0.0, ph);
    for (int i = 1; i < pn; ++i) {
        double s = 0.0;
        for (std::size_t q = 0; q < cell.x.size(); ++q) {
            double t = pr[i - 1] + cell.x[q];
            s += cell.w[q] * t * phi(t);
        }
        pv[i] = pv[i - 1] + s;
    }
    boost::math::interpolators::cardinal_quintic_b_spline<double> P(pv, 0.0, ph);
    const double p_tot = pv.back();
    auto Pc = [&](double x) {
        if (x <= 0.0) return 0.0;
        if (x >= a) return p_tot;
        return P(x);
    };

    const double supp = 2.0 * a;
    auto radii = uniform_radii(supp, grid_n);
    std::vector<double> vals(grid_n, 0.0);
    double r0 = 4.0 * kPi * quad::integrate([&](double s) { return s * s * phi(s) * phi(s); }, 0.0, a, 1e-15);
    vals[0] = r0;
    for (int i = 1; i < grid_n - 1; ++i) {
        double r = radii[i];
        std::vector<double> br{std::max(0.0, r - a), a};
        for (double b : {r, a - r})
            if (b > br.front() && b < a) br.push_back(b);
        std::sort(br.begin(), br.end());
        // The bump is flat to all orders at its edge; subdivide each piece.
        std::vector<double> fine;
        for (std::size_t k = 0; k + 1 < br.size(); ++k)
            for (int j = 0; j < 8; ++j) fine.push_back(br[k] + (br[k + 1] - br[k]) * j / 8.0);
        fine.push_back(br.back());
        quad::Rule rule = quad::composite(fine, 24);
        double s = 0.0;
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            double x = rule.x[q];
            s += rule.w[q] * x * phi(x) * (Pc(std::min(r + x, a)) - Pc(std::abs(r - x)));
        }
        vals[i] = std::max(0.0, 2.0 * kPi * s / r);
    }
    return RadialProfile(3, supp, radii, vals);
}

const RadialProfile& default_phi() {
    static const RadialProfile p = build_bump(1.0, 2048, 3);
    return p;
}

const RadialProfile& default_R() {
    static const RadialProfile R = self_convolve(default_phi(), 2048);
    return R;
}

double rescaled(const RadialProfile& R, double eps, double r) {
    require_positive(eps, "eps");
    return std::pow(eps, -R.dim()) * R(r / eps);
}

double beta_eps(double beta, double eps, int dim) {
    require_positive(beta, "beta");
    require_positive(eps, "eps");
    if (dim < 3) throw DomainError("beta_eps: dimension must be at least 3");
    return beta * std::pow(eps, 0.5 * (dim - 2));
}

double GridFunction::cell_volume() const { return std::pow(h(), dim); }

std::vector<double> GridFunction::center(std::size_t idx) const {
    std::vector<double> c(dim);
    double hh = h();
    for (int k = dim - 1; k >= 0; --k) {
        c[k] = -half_width + (static_cast<double>(idx % n) + 0.5) * hh;
        idx /= n;
    }
    return c;
}

double GridFunction::radius(std::size_t idx) const {
    auto c = center(idx);
    double s = 0.0;
    for (double x : c) s += x * x;
    return std::sqrt(s);
}

double GridFunction::l1_norm() const {
    double s = 0.0;
    for (double v : values) s += std::abs(v);
    return s * cell_volume();
}

GridFunction GridFunction::sample(int dim, int n, double half_width, const std::function<double(const std::vector<double>&)>& f) {
    GridFunction g;
    g.dim = dim;
    g.n = n;
    g.half_width = half_width;
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k) total *= n;
    g.values.resize(total);
    for (std::size_t i = 0; i < total; ++i) g.values[i] = f(g.center(i));
    return g;
}

GridFunction rearrange(const GridFunction& f) {
    for (double v : f.values)
        if (v < 0.0) throw DomainError("rearrange: input must be nonnegative");
    std::vector<double> sorted = f.values;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    std::vector<double> radius(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) radius[i] = f.radius(i);
    std::vector<std::size_t> order(f.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radius[a] < radius[b]; });
    GridFunction out = f;
    for (std::size_t k = 0; k < order.size(); ++k) out.values[order[k]] = sorted[k];
    return out;
}

double superlevel_volume(const GridFunction& f, double level) {
    std::size_t c = 0;
    for (double v : f.values)
        if (v > level) ++c;
    return c * f.cell_volume();
}

double shrink_rate(int dim) {
    if (dim < 1) throw DomainError("shrink_rate: dimension must be positive");
    return std::pow(1.0 - std::pow(2.0, -dim), 1.0 / dim);
}

double theta_support(int k, double l0, int dim) {
    if (k < 0) throw DomainError("theta_support: k must be nonnegative");
    require_positive(l0, "l0");
    return std::pow(shrink_rate(dim), k) * l0;
}

int theta_support_index(double l0, double threshold, int dim) {
    require_positive(threshold, "threshold");
    int k = 0;
    while (theta_support(k, l0, dim) > threshold) ++k;
    return k;
}

}  // namespace bosecrit::moll
