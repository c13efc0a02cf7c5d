#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qglab/quadrature.hpp"

namespace qg {

/// Integro-exponential change of variables built from an odd nondecreasing
/// nonlinearity beta with beta(s)s >= 0:
///
///   psi(u) = int_0^u exp(+m B(s)) ds,   Psi(u) = int_0^u exp(-m B(s)) ds,
///
/// where B(s) = int_0^s beta. psi absorbs a +m*beta(u)|Du|^2 term, Psi a
/// -m*beta(u)|Du|^2 term. Psi saturates at the finite constant c_beta on the
/// nonnegative branch.
///
/// The model nonlinearity is beta(s) = s^k with k odd; a general beta is
/// accepted only together with a caller-declared local Lipschitz bound, since
/// local Lipschitz continuity cannot be verified from a black box.
class Transform {
public:
    static Transform power(double m, int k) {
        if (!(m > 0.0)) throw std::invalid_argument("Transform: m must be > 0");
        if (k < 1 || k % 2 == 0) throw std::invalid_argument("Transform: k must be odd >= 1");
        Transform t;
        t.m_ = m;
        t.k_ = k;
        return t;
    }

    /// General beta under (H_beta); lipschitz_bound is the declared local
    /// Lipschitz constant on the working interval. Oddness, monotonicity and
    /// beta(s)s >= 0 are spot-checked on samples.
    static Transform general(double m, std::function<double(double)> beta,
                             double lipschitz_bound, double sample_range = 8.0) {
        if (!(m > 0.0)) throw std::invalid_argument("Transform: m must be > 0");
        if (!(lipschitz_bound > 0.0))
            throw std::invalid_argument("Transform: Lipschitz bound must be declared positive");
        Transform t;
        t.m_ = m;
        t.k_ = 0;
        t.beta_fn_ = std::move(beta);
        t.lipschitz_ = lipschitz_bound;
        double prev = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 64; ++i) {
            const double s = -sample_range + 2.0 * sample_range * i / 64.0;
            const double b = t.beta_fn_(s);
            if (!std::isfinite(b)) throw std::invalid_argument("Transform: beta not finite");
            if (b * s < -1e-12) throw std::invalid_argument("Transform: beta(s)s >= 0 violated");
            if (std::abs(t.beta_fn_(-s) + b) > 1e-10 * (1.0 + std::abs(b)))
                throw std::invalid_argument("Transform: beta not odd");
            if (b < prev - 1e-12) throw std::invalid_argument("Transform: beta not nondecreasing");
            prev = b;
        }
        return t;
    }

    double m() const { return m_; }
    int k() const { return k_; }
    bool is_power() const { return k_ >= 1; }
    double lipschitz_bound() const { return lipschitz_; }

    double beta(double s) const {
        if (is_power()) {
            double p = s;
            for (int i = 1; i < k_; ++i) p *= s;
            return p;
        }
        return beta_fn_(s);
    }

    /// B(s) = int_0^s beta; even for odd beta.
    double beta_integral(double s) const {
        if (is_power()) return std::pow(std::abs(s), k_ + 1) / (k_ + 1);
        return integrate([this](double t) { return beta_fn_(t); }, 0.0, s);
    }

    double psi_prime(double u) const { return std::exp(m_ * beta_integral(u)); }
    double Psi_prime(double u) const { return std::exp(-m_ * beta_integral(u)); }

    /// v = psi(u); odd and strictly increasing. Throws if the value overflows
    /// double range (use log_psi there).
    double psi(double u) const {
        if (u == 0.0) return 0.0;
        if (u < 0.0) return -psi(-u);
        const double lg = log_psi(u);
        if (lg > 706.0) throw std::overflow_error("psi: value overflows double range");
        return std::exp(lg);
    }

    /// log(psi(u)) for u > 0, evaluated without overflow:
    /// log psi(u) = m B(u) + log int_0^u exp(-m(B(u)-B(t))) dt.
    double log_psi(double u) const {
        if (!(u > 0.0)) throw std::domain_error("log_psi: u must be > 0");
        const double Bu = beta_integral(u);
        const double inner = integrate(
            [this, Bu](double t) { return std::exp(m_ * (beta_integral(t) - Bu)); }, 0.0, u,
            1e-12);
        return m_ * Bu + std::log(inner);
    }

    double Psi(double u) const {
        if (u == 0.0) return 0.0;
        if (u < 0.0) return -Psi(-u);
        return integrate([this](double t) { return Psi_prime(t); }, 0.0, u, 1e-13);
    }

    /// Saturation constant of Psi on the nonnegative branch:
    /// c_beta = lim_{u->inf} Psi(u) = int_0^inf exp(-m B).
    double c_beta() const {
        if (is_power()) return c_beta_closed_form(m_, k_);
        return tail_integral(0.0);
    }

    /// c_beta - Psi(u) for u >= 0, accurate in the deep tail.
    double tail_integral(double u) const {
        const double Bu = beta_integral(u);
        // Convexity of B gives B(u+s)-B(u) >= B(s), so S below caps the tail.
        double S = 3.0;
        while (m_ * (beta_integral(u + S) - Bu) < 75.0 && S < 1e6) S *= 2.0;
        const double scaled = integrate(
            [this, u, Bu](double s) { return std::exp(-m_ * (beta_integral(u + s) - Bu)); }, 0.0,
            S, 1e-12);
        return std::exp(-m_ * Bu) * scaled;
    }

    double log_tail(double u) const {
        const double Bu = beta_integral(u);
        double S = 3.0;
        while (m_ * (beta_integral(u + S) - Bu) < 75.0 && S < 1e6) S *= 2.0;
        const double scaled = integrate(
            [this, u, Bu](double s) { return std::exp(-m_ * (beta_integral(u + s) - Bu)); }, 0.0,
            S, 1e-12);
        return -m_ * Bu + std::log(scaled);
    }

    /// Monotone bracketing inverse of psi with a Newton polish.
    double psi_inv(double v) const {
        if (v == 0.0) return 0.0;
        if (v < 0.0) return -psi_inv(-v);
        if (std::log(v) > 650.0) return log_psi_inv(std::log(v));
        // psi(u) >= u, so the root lies in [0, v]; cap the bracket below the
        // overflow region.
        double hi = v;
        if (is_power()) {
            const double cap = std::pow((k_ + 1) * 700.0 / m_, 1.0 / (k_ + 1));
            hi = std::min(hi, cap);
        }
        double u = solve_increasing([this, v](double x) { return psi(x) - v; }, 0.0, hi);
        for (int it = 0; it < 3; ++it) u -= (psi(u) - v) / psi_prime(u);
        return u;
    }

    /// Inverse of log psi; safe for arguments far beyond double range of psi.
    double log_psi_inv(double log_v) const {
        double hi = 1.0;
        while (log_psi(hi) < log_v && hi < 1e6) hi *= 2.0;
        double u = solve_increasing([this, log_v](double x) { return log_psi(x) - log_v; },
                                    1e-300, hi);
        for (int it = 0; it < 3; ++it) {
            const double lg = log_psi(u);
            // d(log psi)/du = psi'(u)/psi(u) = exp(m B(u) - log psi(u))
            const double d = std::exp(m_ * beta_integral(u) - lg);
            u -= (lg - log_v) / d;
        }
        return u;
    }

    /// Inverse of Psi on the nonnegative branch. Arguments at or above c_beta
    /// are out of range: that is the saturation phenomenon, reported as a
    /// domain_error.
    double Psi_inv(double w) const {
        if (w == 0.0) return 0.0;
        if (w < 0.0) return -Psi_inv(-w);
        const double cb = c_beta();
        if (w >= cb)
            throw std::domain_error("Psi_inv: argument >= c_beta (transform saturation)");
        if (w < 0.9 * cb) {
            double hi = 1.0;
            while (Psi(hi) < w) hi *= 2.0;
            double u = solve_increasing([this, w](double x) { return Psi(x) - w; }, 0.0, hi);
            for (int it = 0; it < 3; ++it) u -= (Psi(u) - w) / Psi_prime(u);
            return u;
        }
        // Near saturation solve on the tail: log_tail(u) = log(cb - w).
        const double target = std::log(cb - w);
        double hi = 1.0;
        while (log_tail(hi) > target && hi < 1e6) hi *= 2.0;
        return solve_increasing([this, target](double x) { return target - log_tail(x); }, 0.0,
                                hi);
    }

    /// g(v) = psi'(psi^{-1}(v)) - 1; nonnegative, even, convex, g(0) = 0.
    double g(double v) const { return psi_prime(psi_inv(v)) - 1.0; }

    /// Independent evaluation of g via its integral form m int_0^v beta(psi^{-1}).
    double g_quadrature(double v) const {
        if (v == 0.0) return 0.0;
        const double a = std::abs(v);
        return m_ * integrate([this](double t) { return beta(psi_inv(t)); }, 0.0, a, 1e-11);
    }

    /// G(w) = 1 - Psi'(Psi^{-1}(w)); positive and nondecreasing on [0, c_beta).
    double G(double w) const { return 1.0 - Psi_prime(Psi_inv(w)); }

    double G_quadrature(double w) const {
        if (w == 0.0) return 0.0;
        return m_ * integrate([this](double t) { return beta(Psi_inv(t)); }, 0.0, w, 1e-11);
    }

    static double c_beta_closed_form(double m, int k) {
        // Gamma-function form of int_0^inf exp(-m t^{k+1}/(k+1)) dt.
        const double kk = k + 1.0;
        return std::tgamma(1.0 / kk) * (1.0 / kk) * std::pow(kk / m, 1.0 / kk);
    }

private:
    template <typename F>
    static double solve_increasing(const F& f, double lo, double hi) {
        // Safeguarded bracketing on an increasing function with
        // f(lo) <= 0 <= f(hi). Secant steps alternate with bisection so the
        // bracket provably halves every other iteration even when f spans
        // hundreds of orders of magnitude.
        double flo = f(lo), fhi = f(hi);
        if (flo > 0.0) return lo;
        if (fhi < 0.0) return hi;
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 240; ++it) {
            double mid;
            if (it % 2 == 0 || fhi == flo) {
                mid = 0.5 * (lo + hi);
            } else {
                mid = lo + (hi - lo) * (-flo) / (fhi - flo);
                if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
            }
            const double fm = f(mid);
            if (fm == 0.0 || hi - lo < 1e-15 * (1.0 + std::abs(mid))) return mid;
            if (fm < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
            x = mid;
        }
        return x;
    }

    double m_ = 1.0;
    int k_ = 1; // 0 marks a general beta
    std::function<double(double)> beta_fn_;
    double lipschitz_ = 0.0;
};

namespace detail {

/// Integral of the transform slope exp(+-m B) over [a, b] by subdivided
/// 5-point Gauss panels: near machine accuracy for the panel widths used by
/// the table and field evaluators.
inline double transform_slope_integral(const Transform& t, double a, double b, bool plus) {
    static constexpr double gx[5] = {-0.906179845938663992797626878299,
                                     -0.538469310105683091036314420700, 0.0,
                                     0.538469310105683091036314420700,
                                     0.906179845938663992797626878299};
    static constexpr double gw[5] = {0.236926885056189087514264040720,
                                     0.478628670499366468041291514836,
                                     0.568888888888888888888888888889,
                                     0.478628670499366468041291514836,
                                     0.236926885056189087514264040720};
    const int panels = 1 + static_cast<int>(std::abs(b - a) / 0.05);
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double pa = a + (b - a) * p / panels;
        const double pb = a + (b - a) * (p + 1) / panels;
        const double c = 0.5 * (pa + pb), hw = 0.5 * (pb - pa);
        double s = 0.0;
        for (int i = 0; i < 5; ++i) {
            const double u = c + hw * gx[i];
            s += gw[i] * (plus ? t.psi_prime(u) : t.Psi_prime(u));
        }
        total += s * hw;
    }
    return total;
}

} // namespace detail

/// Nodewise psi(u) (plus = true) or Psi(u) over a sorted traversal of the
/// node values: prefix integration keeps the absolute error at machine level,
/// which matters when second differences of the result are taken.
template <typename Values>
std::vector<double> transform_values(const Transform& t, const Values& vals, bool plus) {
    const int n = static_cast<int>(vals.size());
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<double> out(n);
    // anchor at 0, integrate outward in both directions
    int first_pos = n;
    for (int j = 0; j < n; ++j)
        if (vals[idx[j]] >= 0.0) {
            first_pos = j;
            break;
        }
    double acc = 0.0;
    double prev = 0.0;
    for (int j = first_pos; j < n; ++j) {
        acc += detail::transform_slope_integral(t, prev, vals[idx[j]], plus);
        prev = vals[idx[j]];
        out[idx[j]] = acc;
    }
    acc = 0.0;
    prev = 0.0;
    for (int j = first_pos - 1; j >= 0; --j) {
        acc -= detail::transform_slope_integral(t, vals[idx[j]], prev, plus);
        prev = vals[idx[j]];
        out[idx[j]] = acc;
    }
    return out;
}

/// Closed-form saturation constant for beta(s)=s^k (Gamma expression).
inline double c_beta(double m, int k) { return Transform::c_beta_closed_form(m, k); }

/// Quadrature cross-check of c_beta, independent of the Gamma function.
inline double c_beta_quadrature(double m, int k) {
    const double T = std::pow((k + 1) * 75.0 / m, 1.0 / (k + 1));
    return integrate(
        [m, k](double t) { return std::exp(-m * std::pow(t, k + 1) / (k + 1)); }, 0.0, T,
        1e-12);
}

/// Cached monotone samples of psi and Psi for fast nodewise inversion:
/// cubic-Hermite inverse interpolation seeds a Newton polish in which the
/// segment integral of the (closed-form) derivative is evaluated by a
/// fixed 5-point Gauss rule.
class TransformTable {
public:
    TransformTable(const Transform& t, double u_max, int samples = 512, double tol = 1e-9)
        : t_(t), tol_(tol) {
        if (samples < 8) throw std::invalid_argument("TransformTable: too few samples");
        u_.resize(samples + 1);
        psi_.resize(samples + 1);
        Psi_.resize(samples + 1);
        for (int i = 0; i <= samples; ++i) {
            const double u = u_max * i / samples;
            u_[i] = u;
            psi_[i] = t.psi(u);
            Psi_[i] = t.Psi(u);
        }
        for (int i = 1; i <= samples; ++i)
            if (!(psi_[i] > psi_[i - 1]) || !(Psi_[i] > Psi_[i - 1]))
                throw std::runtime_error("TransformTable: samples not strictly monotone");
        // Round-trip validation at off-sample points.
        for (int i = 0; i < 17; ++i) {
            const double u = u_max * (i + 0.37) / 17.5;
            if (std::abs(psi_inv(t.psi(u)) - u) > tol_ * (1.0 + u))
                throw std::runtime_error("TransformTable: inversion error above tolerance");
        }
    }

    double u_max() const { return u_.back(); }

    double psi_inv(double v) const { return inv(psi_, v, true); }
    double Psi_inv(double w) const { return inv(Psi_, w, false); }

private:
    double segment_integral(double a, double b, bool plus) const {
        // 5-point Gauss-Legendre on [a, b] applied to the transform slope.
        static constexpr double x[5] = {-0.906179845938663992797626878299,
                                        -0.538469310105683091036314420700, 0.0,
                                        0.538469310105683091036314420700,
                                        0.906179845938663992797626878299};
        static constexpr double w[5] = {0.236926885056189087514264040720,
                                        0.478628670499366468041291514836,
                                        0.568888888888888888888888888889,
                                        0.478628670499366468041291514836,
                                        0.236926885056189087514264040720};
        const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
        double s = 0.0;
        for (int i = 0; i < 5; ++i) {
            const double u = c + hw * x[i];
            s += w[i] * (plus ? t_.psi_prime(u) : t_.Psi_prime(u));
        }
        return s * hw;
    }

    double inv(const std::vector<double>& f, double v, bool plus) const {
        if (v == 0.0) return 0.0;
        const double a = std::abs(v);
        if (a > f.back()) throw std::domain_error("TransformTable: value outside table range");
        auto it = std::lower_bound(f.begin(), f.end(), a);
        size_t i = static_cast<size_t>(it - f.begin());
        if (i == 0) i = 1;
        const double v0 = f[i - 1], v1 = f[i];
        const double u0 = u_[i - 1], u1 = u_[i];
        const double d0 = 1.0 / (plus ? t_.psi_prime(u0) : t_.Psi_prime(u0));
        const double d1 = 1.0 / (plus ? t_.psi_prime(u1) : t_.Psi_prime(u1));
        const double h = v1 - v0, s = (a - v0) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        double u = h00 * u0 + h10 * h * d0 + h01 * u1 + h11 * h * d1;
        u = std::min(std::max(u, u0), u1);
        for (int it2 = 0; it2 < 4; ++it2) {
            const double fv = v0 + segment_integral(u0, u, plus) - a;
            const double dv = plus ? t_.psi_prime(u) : t_.Psi_prime(u);
            const double step = fv / dv;
            u -= step;
            u = std::min(std::max(u, u0), u1);
            if (std::abs(step) <= 1e-15 * (1.0 + std::abs(u))) break;
        }
        return v < 0.0 ? -u : u;
    }

    Transform t_;
    std::vector<double> u_, psi_, Psi_;
    double tol_;
};

} // namespace qg
