#include "bosecrit/sublimiting_n3.hpp"

#include "bosecrit/errors.hpp"
#include "bosecrit/parallel.hpp"
#include "bosecrit/quadrature.hpp"
#include "bosecrit/simplex_sampling.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace bosecrit::sub {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

double oplus(double a, double b) { return a * b / (a + b); }
double G0(double t) { return std::pow(2 * kPi * t, -1.5); }
double G3(const Vec3& x, double t) { return G0(t) * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2 * t)); }
double norm3(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }
// One-dimensional Fourier transform of the heat kernel.
double hatg(double s, double k) { return std::exp(-2 * kPi * kPi * s * k * k); }

int complement(int l, int lp) { return 6 - l - lp; }

// ∫_{R^n} Π g_t(c·v + a) dv for one-dimensional kernels g_t, in closed form.
class GaussianIntegral {
public:
    explicit GaussianIntegral(int n) : A_(Eigen::MatrixXd::Zero(n, n)), b_(Eigen::VectorXd::Zero(n)) {}
    void add(const Eigen::VectorXd& c, double a, double t) {
        A_.noalias() += c * c.transpose() / t;
        b_ -= a * c / t;
        c0_ += a * a / (2 * t);
        logpref_ -= 0.5 * std::log(2 * kPi * t);
    }
    double value() const {
        const int n = int(b_.size());
        if (n == 0) return std::exp(logpref_ - c0_);
        Eigen::LLT<Eigen::MatrixXd> llt(A_);
        if (llt.info() != Eigen::Success) throw NumericError("Gaussian integral: quadratic form is not positive definite");
        Eigen::VectorXd sol = llt.solve(b_);
        double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        return std::exp(logpref_ + 0.5 * n * std::log(2 * kPi) - 0.5 * logdet + 0.5 * b_.dot(sol) - c0_);
    }

private:
    Eigen::MatrixXd A_;
    Eigen::VectorXd b_;
    double c0_ = 0.0, logpref_ = 0.0;
};

void require_all_active(const LabelSequence& seq, const char* what) {
    auto chk = validate_labels(seq);
    if (!chk.valid) throw StructuralError(std::string(what) + ": consecutive pairs must differ");
    if (chk.zero_shortcut) throw PreconditionError(std::string(what) + ": all interaction flags must equal 1");
}

void require_off_diagonal(const Config3& x0, const char* what) {
    if (on_diagonal(x0)) throw DomainError(std::string(what) + ": x0 has coinciding particles, the integral diverges");
}

double reciprocal_root_product(const TimeSimplexPoint& tp) {
    double p = 1.0;
    for (double r : tp.r) p *= std::sqrt(2 * kPi / r);
    return p;
}

}  // namespace

LabelCheck validate_labels(const LabelSequence& seq) {
    LabelCheck out;
    out.valid = true;
    for (std::size_t j = 0; j < seq.size(); ++j) {
        const auto& L = seq[j];
        if (!(1 <= L.l && L.l < L.lp && L.lp <= 3))
            throw StructuralError("label " + std::to_string(j + 1) + ": pair must satisfy 1 <= l < l' <= 3");
        if (L.i != 0 && L.i != 1) throw StructuralError("label " + std::to_string(j + 1) + ": flag must be 0 or 1");
        if (L.i == 0) out.zero_shortcut = true;
        if (j > 0 && L.l == seq[j - 1].l && L.lp == seq[j - 1].lp) out.valid = false;
    }
    return out;
}

std::vector<LabelSequence> enumerate_sequences(int m) {
    if (m < 1) throw DomainError("enumerate_sequences: m must be at least 1");
    if (m > 20) throw ConfigError("enumerate_sequences: m too large to enumerate");
    const std::array<Label, 3> pairs{Label{1, 2, 1}, Label{1, 3, 1}, Label{2, 3, 1}};
    std::vector<LabelSequence> out;
    LabelSequence cur;
    std::function<void()> rec = [&]() {
        if (int(cur.size()) == m) {
            out.push_back(cur);
            return;
        }
        for (const auto& p : pairs) {
            if (!cur.empty() && cur.back().l == p.l && cur.back().lp == p.lp) continue;
            cur.push_back(p);
            rec();
            cur.pop_back();
        }
    };
    rec();
    return out;
}

RelativeCoords relative_coords(const Config3& x, int l, int lp) {
    if (!(1 <= l && l < lp && lp <= 3)) throw StructuralError("relative_coords: pair must satisfy 1 <= l < l' <= 3");
    RelativeCoords rc;
    const auto& a = x[l - 1];
    const auto& b = x[lp - 1];
    rc.x_comp = x[complement(l, lp) - 1];
    for (int c = 0; c < 3; ++c) {
        rc.x_rel[c] = (b[c] - a[c]) / kSqrt2;
        rc.x_star[c] = (b[c] + a[c]) / kSqrt2;
    }
    return rc;
}

bool on_diagonal(const Config3& x, double tol) {
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            Vec3 d{x[j][0] - x[i][0], x[j][1] - x[i][1], x[j][2] - x[i][2]};
            if (norm3(d) <= tol) return true;
        }
    return false;
}

TimeSimplexPoint make_time_point(const std::vector<double>& interleaved, double t, double nu) {
    require_positive(t, "t");
    require_positive(nu, "nu");
    if (interleaved.size() < 2 || interleaved.size() % 2) throw DomainError("time point: need (v_0, r_1, ..., v_{m-1}, r_m)");
    TimeSimplexPoint tp;
    tp.t = t;
    tp.nu = nu;
    double s = 0.0;
    for (std::size_t i = 0; i < interleaved.size(); ++i) {
        double x = interleaved[i];
        if (!(x > 0.0)) throw DomainError("time point: all times must be positive");
        s += x;
        (i % 2 == 0 ? tp.v : tp.r).push_back(x);
    }
    if (!(s < t)) throw DomainError("time point: times must sum to less than t");
    tp.v.push_back(t - s);
    return tp;
}

TjChain tj_chain(const TimeSimplexPoint& tp) {
    const int m = tp.m();
    if (m < 1 || int(tp.v.size()) != m + 1) throw DomainError("tj_chain: inconsistent time point");
    for (double x : tp.v)
        if (!(x > 0.0)) throw DomainError("tj_chain: nonpositive time");
    for (double x : tp.r)
        if (!(x > 0.0)) throw DomainError("tj_chain: nonpositive time");
    TjChain c;
    c.t.assign(m + 1, 0.0);
    const double rb = tp.r_bar();
    c.t[m] = 4 * oplus(tp.v[m - 1], 3 * (tp.v[m - 1] + rb));
    for (int j = m - 1; j >= 1; --j) c.t[j] = 4 * oplus(tp.v[j - 1], c.t[j + 1] + 3 * (tp.v[j - 1] + tp.r[j - 1]));
    c.S = rb;
    for (int j = 1; j < m; ++j) c.S += tp.v[j];
    for (int j = 2; j < m; ++j) c.S += tp.r[j - 1];
    const double T = m >= 2 ? c.t[2] : 0.0;
    const double a = tp.v[0] + tp.r[0];
    c.u1 = a + 2.0 / 9.0 * T + c.S / 3.0;
    c.u4 = a + T / 9.0 + 2.0 / 3.0 * c.S;
    c.u3 = (-T * kSqrt2 / 9.0 + kSqrt2 / 3.0 * c.S) / c.u1;
    c.u2 = c.u4 - c.u1 * c.u3 * c.u3;
    return c;
}

double integrand_pointwise(const Config3& x0, const TimeSimplexPoint& tp, const LabelSequence& seq) {
    const int m = int(seq.size());
    if (m < 3) throw DomainError("integrand_pointwise: the closed form needs m >= 3");
    if (tp.m() != m) throw DomainError("integrand_pointwise: time point length differs from the sequence");
    require_all_active(seq, "integrand_pointwise");
    require_off_diagonal(x0, "integrand_pointwise");
    auto c = tj_chain(tp);
    auto rc = relative_coords(x0, seq[0].l, seq[0].lp);
    Vec3 shifted{};
    for (int k = 0; k < 3; ++k) shifted[k] = rc.x_star[k] - c.u3 * rc.x_comp[k];
    double val = G3(rc.x_rel, tp.v[0]) * G3(rc.x_comp, c.u1) * G3(shifted, c.u2);
    val *= reciprocal_root_product(tp) * std::pow(8.0, m - 1) * G0(tp.v[m] + tp.nu);
    for (int j = 2; j < m; ++j) val *= G0(tp.v[j - 1] + c.t[j + 1] + 3 * (tp.v[j - 1] + tp.r[j - 1]));
    val *= G0(tp.v[m - 1] + 3 * (tp.v[m - 1] + tp.r_bar()));
    return val;
}

double spatial_integral_direct(const Config3& x0, const TimeSimplexPoint& tp, const LabelSequence& seq) {
    const int m = int(seq.size());
    if (m < 1 || tp.m() != m) throw DomainError("spatial_integral_direct: time point length differs from the sequence");
    auto chk = validate_labels(seq);
    if (!chk.valid) throw StructuralError("spatial_integral_direct: consecutive pairs must differ");
    if (chk.zero_shortcut) return 0.0;
    require_off_diagonal(x0, "spatial_integral_direct");
    // Per coordinate, variables (y_j, p_j, q_j): the meeting point, the merged pair position at
    // u_j and the third particle at u_j. Each delta contributes √2 per coordinate.
    const int n = 3 * m;
    double total = 1.0;
    for (int d = 0; d < 3; ++d) {
        GaussianIntegral gi(n);
        auto pos = [&](int j, int i, Eigen::VectorXd& vec) {
            vec.setZero(n);
            if (j == 0) return x0[i - 1][d];
            const auto& L = seq[j - 1];
            vec(3 * (j - 1) + ((i == L.l || i == L.lp) ? 1 : 2)) = 1.0;
            return 0.0;
        };
        Eigen::VectorXd pv(n), qv(n), y(n);
        for (int j = 1; j <= m; ++j) {
            const auto& L = seq[j - 1];
            const int c = complement(L.l, L.lp);
            y.setZero(n);
            y(3 * (j - 1)) = 1.0;
            for (int i : {L.l, L.lp}) {
                double pc = pos(j - 1, i, pv);
                gi.add(pv - y, pc, tp.v[j - 1]);
            }
            pos(j, L.l, pv);
            gi.add(kSqrt2 * (y - pv), 0.0, tp.r[j - 1]);
            pos(j, c, qv);
            double pc = pos(j - 1, c, pv);
            gi.add(qv - pv, -pc, tp.v[j - 1] + tp.r[j - 1]);
        }
        for (int i = 1; i <= 3; ++i) {
            double pc = pos(m, i, pv);
            gi.add(pv, pc, tp.v[m] + tp.nu);
        }
        total *= gi.value() * std::pow(2.0, m);
    }
    return total * reciprocal_root_product(tp);
}

double relative_motion_integral(const Config3& x0, const TimeSimplexPoint& tp, const LabelSequence& seq) {
    const int m = int(seq.size());
    if (m < 3 || tp.m() != m) throw DomainError("relative_motion_integral: needs m >= 3 and matching times");
    require_all_active(seq, "relative_motion_integral");
    require_off_diagonal(x0, "relative_motion_integral");
    auto rc = relative_coords(x0, seq[0].l, seq[0].lp);
    const double rb = tp.r_bar();
    double total = G3(rc.x_rel, tp.v[0]) * G0(tp.v[m] + tp.nu) * reciprocal_root_product(tp);
    const int n = 2 * (m - 1);
    for (int d = 0; d < 3; ++d) {
        GaussianIntegral gi(n);
        auto S = [n](int j) { Eigen::VectorXd e = Eigen::VectorXd::Zero(n); e(2 * (j - 1)) = 1.0; return e; };
        auto C = [n](int j) { Eigen::VectorXd e = Eigen::VectorXd::Zero(n); e(2 * (j - 1) + 1) = 1.0; return e; };
        gi.add(-S(1), rc.x_star[d], tp.v[0] + tp.r[0]);
        gi.add(-C(1), rc.x_comp[d], tp.v[0] + tp.r[0]);
        for (int j = 2; j < m; ++j) {
            gi.add(C(j - 1) / kSqrt2 - S(j - 1) / 2.0, 0.0, tp.v[j - 1]);
            gi.add(C(j - 1) / kSqrt2 + S(j - 1) / 2.0 - S(j), 0.0, tp.v[j - 1] + tp.r[j - 1]);
            gi.add(S(j - 1) / kSqrt2 - C(j), 0.0, tp.v[j - 1] + tp.r[j - 1]);
        }
        gi.add(C(m - 1) / kSqrt2 - S(m - 1) / 2.0, 0.0, tp.v[m - 1]);
        gi.add(C(m - 1) / kSqrt2 + S(m - 1) / 2.0, 0.0, tp.v[m - 1] + rb);
        gi.add(S(m - 1) / kSqrt2, 0.0, tp.v[m - 1] + rb);
        total *= gi.value();
    }
    return total;
}

RelativeMotionCheck relative_motion_check(const Config3& x0, const TimeSimplexPoint& tp, const LabelSequence& seq) {
    RelativeMotionCheck c;
    c.closed_form = integrand_pointwise(x0, tp, seq);
    c.relative_motion = relative_motion_integral(x0, tp, seq);
    c.direct = spatial_integral_direct(x0, tp, seq);
    c.residual = std::abs(c.closed_form - c.relative_motion) / c.closed_form;
    c.direct_residual = std::abs(c.closed_form - c.direct) / c.closed_form;
    return c;
}

double fourier_product(const TimeSimplexPoint& tp, const Vec3& k, const Vec3& ks, const Vec3& kc) {
    auto c = tj_chain(tp);
    if (tp.m() < 2) throw DomainError("fourier_product: needs m >= 2");
    const double a = tp.v[0] + tp.r[0];
    double p = 1.0;
    for (int d = 0; d < 3; ++d) {
        double q1 = ks[d] / 3.0 - 2.0 / 3.0 * kc[d] / kSqrt2;
        double q2 = ks[d] + kc[d] / kSqrt2;
        p *= hatg(tp.v[0], k[d]) * hatg(a, ks[d]) * hatg(a, kc[d]) * hatg(c.t[2], q1) * hatg(2.0 * c.S / 3.0, q2);
    }
    return p;
}

double space_side_transform(const TimeSimplexPoint& tp, const Vec3& k, const Vec3& ks, const Vec3& kc) {
    auto c = tj_chain(tp);
    auto g1 = [](double x, double t) { return std::exp(-x * x / (2 * t)) / std::sqrt(2 * kPi * t); };
    const double Lz = 10.0 * std::sqrt(tp.v[0]);
    const double Lc = 10.0 * std::sqrt(c.u1);
    const double Ls = 10.0 * std::sqrt(c.u2) + std::abs(c.u3) * Lc;
    auto rz = quad::composite(8, 20, -Lz, Lz);
    auto rcq = quad::composite(8, 20, -Lc, Lc);
    auto rsq = quad::composite(8, 20, -Ls, Ls);
    double p = 1.0;
    for (int d = 0; d < 3; ++d) {
        // The integrands are even, so the transform is the cosine transform.
        double fz = 0.0;
        for (std::size_t i = 0; i < rz.x.size(); ++i) fz += rz.w[i] * std::cos(2 * kPi * k[d] * rz.x[i]) * g1(rz.x[i], tp.v[0]);
        double f2 = 0.0;
        for (std::size_t i = 0; i < rcq.x.size(); ++i) {
            double zc = rcq.x[i], gc = g1(zc, c.u1);
            for (std::size_t j = 0; j < rsq.x.size(); ++j) {
                double zs = rsq.x[j];
                f2 += rcq.w[i] * rsq.w[j] * std::cos(2 * kPi * (ks[d] * zs + kc[d] * zc)) * gc * g1(zs - c.u3 * zc, c.u2);
            }
        }
        p *= fz * f2;
    }
    return p;
}

double duality_residual(const TimeSimplexPoint& tp, int n_freq, std::uint64_t seed) {
    if (n_freq < 1) throw ConfigError("duality_residual: need at least one frequency");
    auto c = tj_chain(tp);
    auto rng = stream_engine(seed, 0);
    std::normal_distribution<double> g;
    // Frequencies on the scale where each factor is of order one.
    const double sk = 0.5 / (kPi * std::sqrt(tp.v[0])), sm = 0.5 / (kPi * std::sqrt(std::max(c.u1, c.u4)));
    double worst = 0.0;
    for (int f = 0; f < n_freq; ++f) {
        Vec3 k, ks, kc;
        for (int d = 0; d < 3; ++d) {
            k[d] = sk * g(rng);
            ks[d] = sm * g(rng);
            kc[d] = sm * g(rng);
        }
        double a = fourier_product(tp, k, ks, kc), b = space_side_transform(tp, k, ks, kc);
        worst = std::max(worst, std::abs(a - b) / std::abs(a));
    }
    return worst;
}

double b_quadrature_value(const Config3& x0, const TimeSimplexPoint& tp, const LabelSequence& seq, int order) {
    if (seq.size() != 3 || tp.m() != 3) throw DomainError("b_quadrature_value: m = 3 only");
    require_all_active(seq, "b_quadrature_value");
    require_off_diagonal(x0, "b_quadrature_value");
    if (order < 16) throw ConfigError("b_quadrature_value: order must be at least 16");
    auto rc = relative_coords(x0, seq[0].l, seq[0].lp);
    const double a = tp.v[0] + tp.r[0], v1 = tp.v[1], r2 = tp.r[1], v2 = tp.v[2], rb = tp.r_bar();
    const double sig_k = 1.0 / (2 * kPi * std::sqrt(a));
    auto kr = quad::composite(4, order / 4, -9 * sig_k, 9 * sig_k);
    const double sig2 = 1.0 / (2 * kPi * std::sqrt(2 * (v1 + r2))), sig3 = 1.0 / (2 * kPi * std::sqrt(2 * (v2 + rb)));
    double total = 1.0;
    for (int d = 0; d < 3; ++d) {
        double acc = 0.0;
        for (std::size_t i = 0; i < kr.x.size(); ++i)
            for (std::size_t j = 0; j < kr.x.size(); ++j) {
                double ks = kr.x[i], kc = kr.x[j], K = ks + kc / kSqrt2;
                auto h2r = quad::composite(4, order / 4, K / 3 - 9 * sig2, K / 3 + 9 * sig2);
                auto h3r = quad::composite(4, order / 4, K / 3 - 9 * sig3, K / 3 + 9 * sig3);
                double B = 0.0;
                for (std::size_t p = 0; p < h2r.x.size(); ++p) {
                    double h2 = h2r.x[p];
                    double f2 = hatg(v1 + r2, kSqrt2 * h2) * hatg(v1, -ks + kc / kSqrt2 + h2) * hatg(v1 + r2, K - h2);
                    double in3 = 0.0;
                    for (std::size_t q = 0; q < h3r.x.size(); ++q) {
                        double h3 = h3r.x[q];
                        in3 += h3r.w[q] * hatg(v2 + rb, kSqrt2 * h3) * hatg(v2, -K + 2 * h2 + h3) * hatg(v2 + rb, K - h3);
                    }
                    B += h2r.w[p] * f2 * in3;
                }
                double phase = std::cos(2 * kPi * (ks * rc.x_star[d] + kc * rc.x_comp[d]));
                acc += kr.w[i] * kr.w[j] * phase * hatg(a, ks) * hatg(a, kc) * B;
            }
        total *= acc;
    }
    return total * G3(rc.x_rel, tp.v[0]) * reciprocal_root_product(tp) * std::pow(8.0, 2) * G0(tp.v[3] + tp.nu);
}

namespace {

// Scale law on (0, L) with density ∝ s^{1/2} (s + c)^{-3/2}, mixed with the law ∝ s^{-1/2}.
class ScaleLaw {
public:
    ScaleLaw(double c, double L) : c_(c), L_(L), Z_(F(L / c)) {}
    double sample(double u, double pick) const {
        if (pick >= kChainWeight) return L_ * u * u;
        const double target = u * Z_;
        std::uintmax_t iters = 200;
        auto [lo, hi] = boost::math::tools::toms748_solve(
            [&](double ly) { return F(std::exp(ly)) - target; }, -700.0, std::log(L_ / c_),
            [](double a, double b) { return std::abs(b - a) < 1e-12; }, iters);
        return std::min(c_ * std::exp(0.5 * (lo + hi)), L_);
    }
    double density(double s) const {
        return kChainWeight * std::sqrt(s) * std::pow(s + c_, -1.5) / Z_ + (1 - kChainWeight) * 0.5 / std::sqrt(s * L_);
    }

private:
    static constexpr double kChainWeight = 0.8;
    // ∫_0^y x^{1/2} (1 + x)^{-3/2} dx, with the series near 0.
    static double F(double y) {
        if (y < 1e-4) return 2.0 / 3.0 * y * std::sqrt(y) * (1 - 0.9 * y);
        return 2 * std::asinh(std::sqrt(y)) - 2 * std::sqrt(y / (1 + y));
    }
    double c_, L_, Z_;
};

// Sequential importance sampler on {v_0, r_1, v_1, ..., r_m, v_m > 0, sum = t}. Going backward,
// (v_{j-1}, r_j) follows the window factor (4v_{j-1} + 3r_j + 𝐭_{j+1})^{-3/2} r_j^{-1/2} through
// s = 4v_{j-1} + 3r_j and r_j = s w / 3 with w ~ Beta(1/2, 1). v_0 comes from a stratified mixture
// of truncated Lévy laws matched to G_{v_0}(x_rel) for each pair, v_m is the remainder.
class TimeSampler {
public:
    TimeSampler(const Config3& x0, int m, double t, double nu, int strata)
        : m_(m), t_(t), nu_(nu), strata_(std::max(1, strata)) {
        for (auto [l, lp] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
            double a = norm3(relative_coords(x0, l, lp).x_rel);
            scale_.push_back(a);
            mass_.push_back(std::erfc(a / std::sqrt(2 * t)));
        }
    }

    // Returns the importance weight 1/q, or 0 when the draw falls outside the simplex.
    double draw(std::size_t index, std::mt19937_64& rng, TimeSimplexPoint& tp) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        auto open01 = [&] { return std::clamp(unif(rng), 1e-300, 1.0); };
        tp.t = t_;
        tp.nu = nu_;
        tp.v.assign(m_ + 1, 0.0);
        tp.r.assign(m_, 0.0);
        double q = 1.0, used = 0.0;
        // Proposal proxy for 𝐭_{j+1}, with r̄_m replaced by r_m + ν.
        double tnext = 0.0;
        for (int j = m_; j >= 2; --j) {
            ScaleLaw law(j == m_ ? 3 * nu_ : tnext, 4 * t_);
            double s = law.sample(open01(), unif(rng));
            double w = open01();
            w *= w;
            double r = s * w / 3, v = s * (1 - w) / 4;
            tp.r[j - 1] = std::max(r, 1e-300);
            tp.v[j - 1] = std::max(v, 1e-300);
            q *= 12 * law.density(s) * 0.5 / std::sqrt(w) / s;
            used += r + v;
            tnext = j == m_ ? 4 * oplus(v, 3 * (v + r + nu_)) : 4 * oplus(v, tnext + 3 * (v + r));
            if (used >= t_) return 0.0;
        }
        double u = (double(index % strata_) + unif(rng)) / strata_;
        // v_0: three truncated Lévy laws and the uniform law, equal weights.
        int comp = std::min(3, int(u * 4));
        double uc = std::clamp(u * 4 - comp, 1e-300, 1.0);
        double v0;
        if (comp < 3) {
            double a = scale_[comp];
            double e = boost::math::erfc_inv(uc * mass_[comp]);
            v0 = std::min(a * a / (2 * e * e), t_);
        } else {
            v0 = uc * t_;
        }
        double q0 = 0.25 / t_;
        for (int c = 0; c < 3; ++c) {
            double a = scale_[c];
            q0 += 0.25 * a / std::sqrt(2 * kPi) * std::pow(v0, -1.5) * std::exp(-a * a / (2 * v0)) / mass_[c];
        }
        // r_1: r^{-1/2} law mixed with the uniform law.
        double r1 = unif(rng) < 0.7 ? t_ * std::pow(open01(), 2) : t_ * open01();
        double q1 = 0.7 * 0.5 / std::sqrt(r1 * t_) + 0.3 / t_;
        used += v0 + r1;
        if (used >= t_) return 0.0;
        tp.v[0] = v0;
        tp.r[0] = r1;
        tp.v[m_] = t_ - used;
        return 1.0 / (q * q0 * q1);
    }

private:
    int m_;
    double t_, nu_;
    int strata_;
    std::vector<double> scale_, mass_;
};

struct Group {
    LabelSequence seq;
    double multiplicity = 1.0;
};

PathIntegralEstimate run_time_mc(const Config3& x0, int m, const std::vector<Group>& groups, double t, double nu,
                                 const SubMcConfig& cfg, std::uint64_t seed) {
    if (cfg.n_samples < 100) throw ConfigError("SubMcConfig: n_samples must be at least 100");
    TimeSampler sampler(x0, m, t, nu, cfg.strata);
    constexpr std::size_t kBlock = 256;
    const std::size_t n = cfg.n_samples;
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> vals(n);
    parallel_for(n_blocks, resolve_threads(cfg.threads), [&](std::size_t b0, std::size_t b1) {
        TimeSimplexPoint tp;
        for (std::size_t b = b0; b < b1; ++b) {
            auto rng = stream_engine(seed, b);
            for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
                double w = sampler.draw(i, rng, tp);
                vals[i] = 0.0;
                if (w == 0.0) continue;
                double f = 0.0;
                for (const auto& g : groups)
                    f += g.multiplicity * (m >= 3 ? integrand_pointwise(x0, tp, g.seq) : spatial_integral_direct(x0, tp, g.seq));
                vals[i] = w * f;
            }
        }
    });
    auto s = simplex::summarize(vals);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = vals[i] * vals[i];
    double tot = quad::pairwise_sum(vals), tot2 = quad::pairwise_sum(sq);
    PathIntegralEstimate e;
    e.mean = s.mean;
    e.std_error = s.std_error;
    e.n = n;
    e.ess = tot2 > 0.0 ? tot * tot / tot2 : 0.0;
    e.reliable = e.ess >= 100.0;
    return e;
}

}  // namespace

PathIntegralEstimate path_integral_value(const Config3& x0, const LabelSequence& seq, double t, double nu,
                                         const SubMcConfig& cfg) {
    require_positive(t, "t");
    require_positive(nu, "nu");
    auto chk = validate_labels(seq);
    if (!chk.valid) throw StructuralError("path_integral_value: consecutive pairs must differ");
    if (seq.empty()) throw DomainError("path_integral_value: empty sequence");
    if (chk.zero_shortcut) {
        PathIntegralEstimate z;
        z.n = 0;
        return z;
    }
    require_off_diagonal(x0, "path_integral_value");
    return run_time_mc(x0, int(seq.size()), {Group{seq, 1.0}}, t, nu, cfg, cfg.seed);
}

PartialSums partial_sum_QN(const Config3& x0, double t, double nu, int M, const SubMcConfig& cfg) {
    if (M > 8) throw ConfigError("partial_sum_QN: M must not exceed 8");
    if (M < 0) throw ConfigError("partial_sum_QN: M must be nonnegative");
    require_positive(t, "t");
    require_positive(nu, "nu");
    require_off_diagonal(x0, "partial_sum_QN");
    PartialSums out;
    out.S0 = 1.0;
    for (const auto& x : x0) out.S0 *= G3(x, t + nu);
    double cum = out.S0;
    for (int m = 1; m <= M; ++m) {
        auto seqs = enumerate_sequences(m);
        std::vector<Group> groups;
        if (m >= 3) {
            // The closed form depends on the first pair only; each first pair heads 2^{m-1} sequences.
            for (auto [l, lp] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
                LabelSequence s;
                for (const auto& q : seqs)
                    if (q[0].l == l && q[0].lp == lp) {
                        s = q;
                        break;
                    }
                groups.push_back({s, std::ldexp(1.0, m - 1)});
            }
        } else {
            for (auto& s : seqs) groups.push_back({s, 1.0});
        }
        auto e = run_time_mc(x0, m, groups, t, nu, cfg, cfg.seed + 1000003ULL * std::uint64_t(m));
        cum += e.mean;
        out.m.push_back(m);
        out.n_sequences.push_back(seqs.size());
        out.term.push_back(e.mean);
        out.term_error.push_back(e.std_error);
        out.cumulative.push_back(cum);
        out.ratio_vs_1008.push_back(m >= 3 ? e.mean * (m - 1) * (m - 2) / std::pow(1.008, m - 1) : 0.0);
        out.reliable.push_back(e.reliable);
    }
    return out;
}

UEnvelope u_envelope(int m, double t, double nu, std::size_t n, std::uint64_t seed) {
    if (m < 2) throw DomainError("u_envelope: m must be at least 2");
    require_positive(t, "t");
    require_positive(nu, "nu");
    simplex::DirichletMixture flat({std::vector<double>(2 * m + 1, 1.0)}, {1.0}, t);
    UEnvelope env;
    env.n = n;
    env.u1_ratio_min = env.u2_ratio_min = INFINITY;
    env.u1_ratio_max = env.u2_ratio_max = 0.0;
    auto rng = stream_engine(seed, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> x;
    for (std::size_t s = 0; s < n; ++s) {
        flat.sample(0, rng, unif(rng), x);
        x.pop_back();
        bool ok = true;
        for (double xi : x) ok = ok && xi > 0.0;
        if (!ok) continue;
        auto tp = make_time_point(x, t, nu);
        auto c = tj_chain(tp);
        for (int j = 1; j <= m; ++j) env.positive_finite = env.positive_finite && c.t[j] > 0.0 && std::isfinite(c.t[j]);
        env.positive_finite = env.positive_finite && c.u1 > 0.0 && c.u2 > 0.0 && std::isfinite(c.u3);
        env.u1_ratio_min = std::min(env.u1_ratio_min, c.u1 / (t + nu));
        env.u1_ratio_max = std::max(env.u1_ratio_max, c.u1 / (t + nu));
        env.u2_ratio_min = std::min(env.u2_ratio_min, c.u2 / tp.v[0]);
        env.u2_ratio_max = std::max(env.u2_ratio_max, c.u2 / (t + nu));
        env.u3_abs_max = std::max(env.u3_abs_max, std::abs(c.u3));
    }
    return env;
}

}  // namespace bosecrit::sub
