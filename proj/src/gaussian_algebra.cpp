#include "bosecrit/gaussian_algebra.hpp"

#include "bosecrit/errors.hpp"

#include <cmath>
#include <numbers>

namespace bosecrit::gauss {

namespace {

constexpr double kPi = std::numbers::pi;

Vec add_vec(const Vec& a, const Vec& b, double sb) {
    if (b.empty()) return a;
    Vec out = a.empty() ? Vec(b.size(), 0.0) : a;
    if (out.size() != b.size()) throw StructuralError("offset dimension mismatch");
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += sb * b[i];
    return out;
}

const std::string kSpaceTag = "space", kFreqTag = "frequency";

}  // namespace

LinearForm LinearForm::var(const std::string& name, double c) {
    LinearForm f;
    if (c != 0.0) f.coeff[name] = c;
    return f;
}

LinearForm LinearForm::constant(const Vec& v) {
    LinearForm f;
    f.offset = v;
    return f;
}

LinearForm LinearForm::operator+(const LinearForm& o) const {
    LinearForm r = *this;
    for (const auto& [k, c] : o.coeff) {
        double v = r.coeff[k] + c;
        if (v == 0.0)
            r.coeff.erase(k);
        else
            r.coeff[k] = v;
    }
    r.offset = add_vec(offset, o.offset, 1.0);
    return r;
}

LinearForm LinearForm::operator-(const LinearForm& o) const { return *this + o * -1.0; }

LinearForm LinearForm::operator*(double s) const {
    LinearForm r;
    if (s == 0.0) return r;
    for (const auto& [k, c] : coeff) r.coeff[k] = c * s;
    r.offset = offset;
    for (double& x : r.offset) x *= s;
    return r;
}

double LinearForm::coefficient(const std::string& name) const {
    auto it = coeff.find(name);
    return it == coeff.end() ? 0.0 : it->second;
}

LinearForm LinearForm::without(const std::string& name) const {
    LinearForm r = *this;
    r.coeff.erase(name);
    return r;
}

bool LinearForm::depends_on(const std::string& name) const { return coefficient(name) != 0.0; }

bool LinearForm::is_zero() const {
    if (!coeff.empty()) return false;
    for (double x : offset)
        if (x != 0.0) return false;
    return true;
}

Vec LinearForm::evaluate(const Assignment& a, int dim) const {
    Vec out = offset.empty() ? Vec(dim, 0.0) : offset;
    if (static_cast<int>(out.size()) != dim) throw StructuralError("offset dimension mismatch");
    for (const auto& [name, c] : coeff) {
        auto it = a.find(name);
        if (it == a.end()) throw StructuralError("missing assignment for variable '" + name + "'");
        if (static_cast<int>(it->second.size()) != dim) throw StructuralError("variable '" + name + "' has wrong dimension");
        for (int i = 0; i < dim; ++i) out[i] += c * it->second[i];
    }
    return out;
}

double GaussFactor::evaluate(const Assignment& a, int dim) const {
    if (dirac) throw StructuralError("dirac factors are eliminated before numeric evaluation");
    Vec y = arg.evaluate(a, dim);
    double r2 = 0.0;
    for (double x : y) r2 += x * x;
    return domain == Domain::space ? heat_kernel(variance, r2, dim) : fourier_kernel(variance, r2);
}

GaussExpr& GaussExpr::times(const GaussFactor& f) {
    factors.push_back(f);
    for (const auto& [name, c] : f.arg.coeff) {
        (void)c;
        if (!bound_vars.count(name)) free_vars.insert(name);
    }
    return *this;
}

GaussExpr& GaussExpr::scale(double s) {
    if (!(s > 0.0)) throw DomainError("prefactor must stay positive");
    prefactor *= s;
    return *this;
}

double heat_at_zero(double t, int dim) {
    require_positive(t, "variance");
    return std::pow(2.0 * kPi * t, -0.5 * dim);
}

double heat_kernel(double t, double r2, int dim) { return heat_at_zero(t, dim) * std::exp(-r2 / (2.0 * t)); }

double fourier_kernel(double t, double k2) {
    require_positive(t, "variance");
    return std::exp(-2.0 * kPi * kPi * t * k2);
}

double oplus(double a, double b) {
    require_positive(a, "oplus argument");
    require_positive(b, "oplus argument");
    return a * b / (a + b);
}

GaussFactor fourier_gaussian(double t, const LinearForm& arg) {
    require_positive(t, "variance");
    return GaussFactor{t, arg, Domain::frequency, false};
}

GaussFactor space_gaussian(double t, const LinearForm& arg) {
    require_positive(t, "variance");
    return GaussFactor{t, arg, Domain::space, false};
}

GaussFactor dirac_factor(const LinearForm& arg) { return GaussFactor{0.0, arg, Domain::space, true}; }

GaussExpr split_pair_product(double t, const std::string& z1, const std::string& z2, int dim) {
    const double s = 1.0 / std::sqrt(2.0);
    GaussExpr e;
    e.dim = dim;
    e.times(space_gaussian(t, (LinearForm::var(z2) - LinearForm::var(z1)) * s));
    e.times(space_gaussian(t, (LinearForm::var(z2) + LinearForm::var(z1)) * s));
    return e;
}

GaussExpr split_pair_product(double t, const Vec& z1, const Vec& z2) {
    if (z1.size() != z2.size() || z1.empty()) throw DomainError("split_pair_product: vectors must share a positive dimension");
    const double s = 1.0 / std::sqrt(2.0);
    GaussExpr e;
    e.dim = static_cast<int>(z1.size());
    auto c1 = LinearForm::constant(z1), c2 = LinearForm::constant(z2);
    e.times(space_gaussian(t, (c2 - c1) * s));
    e.times(space_gaussian(t, (c2 + c1) * s));
    return e;
}

namespace {

struct MergePlan {
    std::size_t i1, i2;
    double alpha1, alpha2;
    LinearForm p1, p2;  // w - p_i is the shifted argument of factor i, up to the coefficient
};

MergePlan plan_merge(const GaussExpr& expr, const std::string& var) {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < expr.factors.size(); ++i)
        if (expr.factors[i].arg.depends_on(var)) hits.push_back(i);
    if (hits.size() != 2)
        throw StructuralError("variable '" + var + "' must appear in exactly two factors, found " + std::to_string(hits.size()));
    MergePlan p{hits[0], hits[1], 0, 0, {}, {}};
    double alpha[2];
    LinearForm pos[2];
    for (int k = 0; k < 2; ++k) {
        const GaussFactor& f = expr.factors[hits[k]];
        if (f.domain != Domain::frequency || f.dirac)
            throw StructuralError("variable '" + var + "' appears in a non-frequency factor");
        double c = f.arg.coefficient(var);
        alpha[k] = f.variance * c * c;
        pos[k] = f.arg.without(var) * (-1.0 / c);
    }
    p.alpha1 = alpha[0];
    p.alpha2 = alpha[1];
    p.p1 = pos[0];
    p.p2 = pos[1];
    return p;
}

GaussExpr drop_two(const GaussExpr& expr, std::size_t i1, std::size_t i2) {
    GaussExpr out = expr;
    out.factors.clear();
    for (std::size_t i = 0; i < expr.factors.size(); ++i)
        if (i != i1 && i != i2) out.factors.push_back(expr.factors[i]);
    return out;
}

}  // namespace

// alpha1 |w - p1|^2 + alpha2 |w - p2|^2 = (alpha1 + alpha2) |w - mu|^2 + (alpha1 ⊕ alpha2) |p1 - p2|^2
GaussExpr integrate_freq_var(const GaussExpr& expr, const std::string& var) {
    MergePlan p = plan_merge(expr, var);
    GaussExpr out = drop_two(expr, p.i1, p.i2);
    out.prefactor *= heat_at_zero(p.alpha1 + p.alpha2, expr.dim);
    out.factors.push_back(fourier_gaussian(oplus(p.alpha1, p.alpha2), p.p1 - p.p2));
    out.free_vars.erase(var);
    out.bound_vars.insert(var);
    return out;
}

GaussExpr complete_square(const GaussExpr& expr, const std::string& var) {
    MergePlan p = plan_merge(expr, var);
    GaussExpr out = drop_two(expr, p.i1, p.i2);
    double a = p.alpha1 + p.alpha2;
    LinearForm mu = (p.p1 * p.alpha1 + p.p2 * p.alpha2) * (1.0 / a);
    out.factors.push_back(fourier_gaussian(a, LinearForm::var(var) - mu));
    out.factors.push_back(fourier_gaussian(oplus(p.alpha1, p.alpha2), p.p1 - p.p2));
    return out;
}

double eval_numeric(const GaussExpr& expr, const Assignment& assignment) {
    for (const auto& v : expr.free_vars)
        if (!assignment.count(v)) throw StructuralError("missing assignment for variable '" + v + "'");
    double val = expr.prefactor;
    for (const auto& f : expr.factors) val *= f.evaluate(assignment, expr.dim);
    return val;
}

nlohmann::json to_json(const GaussExpr& expr) {
    nlohmann::json j;
    j["dim"] = expr.dim;
    j["prefactor"] = expr.prefactor;
    j["free_vars"] = expr.free_vars;
    j["bound_vars"] = expr.bound_vars;
    j["factors"] = nlohmann::json::array();
    for (const auto& f : expr.factors) {
        nlohmann::json jf;
        jf["domain"] = f.domain == Domain::space ? kSpaceTag : kFreqTag;
        jf["variance"] = f.variance;
        jf["dirac"] = f.dirac;
        jf["coefficients"] = f.arg.coeff;
        jf["offset"] = f.arg.offset;
        j["factors"].push_back(jf);
    }
    return j;
}

}  // namespace bosecrit::gauss
