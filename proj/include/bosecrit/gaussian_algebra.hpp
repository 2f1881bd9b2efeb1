#pragma once

// Symbolic products of isotropic Gaussian kernels.
//
//   space:     G_t(y)  = (2 pi t)^{-d/2} exp(-|y|^2 / (2t))
//   frequency: 𝒢_t(k) = exp(-2 pi^2 t |k|^2)          (transform of G_t, kernel e^{-2 pi i k.x})
//
// Each factor's argument is a linear combination of named vector variables with scalar
// coefficients plus a constant offset vector.

#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

namespace bosecrit::gauss {

using Vec = std::vector<double>;
using Assignment = std::map<std::string, Vec>;

enum class Domain { space, frequency };

struct LinearForm {
    std::map<std::string, double> coeff;
    Vec offset;  // empty means zero

    static LinearForm var(const std::string& name, double c = 1.0);
    static LinearForm constant(const Vec& v);

    LinearForm operator+(const LinearForm& o) const;
    LinearForm operator-(const LinearForm& o) const;
    LinearForm operator*(double s) const;

    double coefficient(const std::string& name) const;
    LinearForm without(const std::string& name) const;
    bool depends_on(const std::string& name) const;
    bool is_zero() const;
    Vec evaluate(const Assignment& a, int dim) const;
};

struct GaussFactor {
    double variance = 1.0;
    LinearForm arg;
    Domain domain = Domain::space;
    bool dirac = false;  // variance 0: symbolic delta, never evaluated

    double evaluate(const Assignment& a, int dim) const;
};

struct GaussExpr {
    int dim = 3;
    double prefactor = 1.0;
    std::vector<GaussFactor> factors;
    std::set<std::string> free_vars;
    std::set<std::string> bound_vars;

    GaussExpr& times(const GaussFactor& f);
    GaussExpr& scale(double s);
};

// G_t(0) in dimension d.
double heat_at_zero(double t, int dim);
double heat_kernel(double t, double r2, int dim);
double fourier_kernel(double t, double k2);

double oplus(double a, double b);

GaussFactor fourier_gaussian(double t, const LinearForm& arg = LinearForm::var("k"));
GaussFactor space_gaussian(double t, const LinearForm& arg);
GaussFactor dirac_factor(const LinearForm& arg);

// G_t(z1) G_t(z2) rewritten as G_t((z2 - z1)/sqrt2) G_t((z2 + z1)/sqrt2).
GaussExpr split_pair_product(double t, const std::string& z1, const std::string& z2, int dim = 3);
GaussExpr split_pair_product(double t, const Vec& z1, const Vec& z2);

// ∫ dw over the two frequency factors containing `var`.
GaussExpr integrate_freq_var(const GaussExpr& expr, const std::string& var);

// Rewrites the two frequency factors containing `var` so that only one of them depends on it.
GaussExpr complete_square(const GaussExpr& expr, const std::string& var);

double eval_numeric(const GaussExpr& expr, const Assignment& assignment);

nlohmann::json to_json(const GaussExpr& expr);

}  // namespace bosecrit::gauss
