#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace bosecrit::moll {

// Radial function on R^d sampled on a uniform grid r_i = i * dr, i = 0..n-1, covering [0, support].
class RadialProfile {
public:
    RadialProfile(int dim, double support_radius, std::vector<double> radii, std::vector<double> values,
                  std::function<double(double)> exact = {});

    int dim() const { return dim_; }
    double support_radius() const { return support_; }
    const std::vector<double>& radii() const { return r_; }
    const std::vector<double>& values() const { return v_; }
    double total_integral() const { return total_; }

    // Exact closed form when available, otherwise quintic B-spline interpolant of the samples.
    double operator()(double r) const;
    double at_zero() const { return (*this)(0.0); }
    double sup() const;

    // ∫_{R^d} f(|x|) g(|x|) dx for any radial g, by quadrature on the profile's support.
    double radial_integral(const std::function<double(double)>& g) const;

    // Profile multiplied by s.
    RadialProfile scaled(double s) const;

    std::string to_csv() const;

private:
    int dim_;
    double support_;
    std::vector<double> r_, v_;
    std::function<double(double)> eval_;
    double total_;
};

// Normalized bump c * exp(-1 / (1 - |x/r_phi|^2)) on the ball of radius r_phi.
RadialProfile build_bump(double r_phi = 1.0, int grid_n = 2048, int dim = 3);

// R = phi * phi (d = 3, via the radial convolution formula). Sampled on grid_n points over [0, 2 r_phi].
RadialProfile self_convolve(const RadialProfile& phi, int grid_n = 2048);

// Default interaction profile R for the bump with r_phi = 1.
const RadialProfile& default_R();
const RadialProfile& default_phi();

// R_eps(x) = eps^{-d} R(x / eps).
double rescaled(const RadialProfile& R, double eps, double r);

double beta_eps(double beta, double eps, int dim);

// Cell-centered cubic grid on [-L, L]^d with n cells per axis.
struct GridFunction {
    int dim = 3;
    int n = 0;
    double half_width = 1.0;
    std::vector<double> values;

    double h() const { return 2.0 * half_width / n; }
    double cell_volume() const;
    std::size_t size() const { return values.size(); }
    std::vector<double> center(std::size_t idx) const;
    double radius(std::size_t idx) const;
    double l1_norm() const;

    static GridFunction sample(int dim, int n, double half_width, const std::function<double(const std::vector<double>&)>& f);
};

// Symmetric-decreasing rearrangement by sorting cell values and refilling cells in order of radius.
GridFunction rearrange(const GridFunction& f);

// Volume of {f > level} on the grid.
double superlevel_volume(const GridFunction& f, double level);

double shrink_rate(int dim);
double theta_support(int k, double l0, int dim);
// Smallest k with theta_support(k) <= threshold.
int theta_support_index(double l0, double threshold, int dim);

}  // namespace bosecrit::moll
