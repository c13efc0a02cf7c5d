#pragma once

#include <cmath>
#include <vector>

#include "qglab/transform.hpp"

namespace qg {

// Tail law of the transform: for beta(s)=s^k,
//   psi(w) ~ psi'(w) / (m w^k)  as  w -> inf,
// so log v = m B(w) - log(m w^k) defines the asymptotic inverse w_as(v).
// The same relation with the sign of the exponent flipped governs the Psi
// tail, c_beta - Psi(t) ~ Psi'(t)/(m t^k).

namespace detail {

/// Solves m w^{k+1}/(k+1) - log(m w^k) = L for w > 0 (Newton).
inline double tail_law_inverse(double m, int k, double L) {
    double w = std::pow((k + 1) * std::max(L, 1.0) / m, 1.0 / (k + 1)) + 1.0;
    for (int it = 0; it < 100; ++it) {
        const double f = m * std::pow(w, k + 1) / (k + 1) - std::log(m) - k * std::log(w) - L;
        const double d = m * std::pow(w, k) - k / w;
        const double step = f / d;
        w -= step;
        if (std::abs(step) < 1e-14 * (1.0 + w)) break;
    }
    return w;
}

/// Solves -m t^{k+1}/(k+1) - log(m t^k) = L (decreasing in t), L << 0.
inline double saturation_tail_inverse(double m, int k, double L) {
    // i.e. m t^{k+1}/(k+1) + log(m t^k) = -L
    const double R = -L;
    double t = std::pow((k + 1) * std::max(R, 1.0) / m, 1.0 / (k + 1));
    for (int it = 0; it < 100; ++it) {
        const double f = m * std::pow(t, k + 1) / (k + 1) + std::log(m) + k * std::log(t) - R;
        const double d = m * std::pow(t, k) + k / t;
        const double step = f / d;
        t -= step;
        if (std::abs(step) < 1e-14 * (1.0 + t)) break;
    }
    return t;
}

} // namespace detail

/// Growth laws of a(v) = psi'(psi^{-1}(v)) psi^{-1}(v)/v and of psi^{-1}
/// itself, evaluated in log space on a geometric sequence of v. Ratios are
/// normalized with the exact tail-law inverse so each tends to 1; the
/// constant-free forms a(v)/(m ln v) and psi^{-1}(v)/(ln v)^{1/(k+1)} are
/// reported alongside (they carry the right order but not the constant).
struct AsymptoticsReport {
    double m = 0.0;
    int k = 1;
    std::vector<double> v;
    std::vector<double> ratio_a;      // a(v) / (m w_as^{k+1})
    std::vector<double> ratio_inv;    // psi^{-1}(v) / w_as
    std::vector<double> ratio_tail;   // psi(w) m w^k / psi'(w) at w = psi^{-1}(v)
    std::vector<double> naive_a;      // a(v) / (m ln v)
    std::vector<double> naive_inv;    // psi^{-1}(v) / (ln v)^{1/(k+1)}
    double a_at_origin = 0.0;         // a(v) at v = 1e-3; limit 1 as v -> 0

    bool within_band(double band) const {
        return std::abs(ratio_a.back() - 1.0) <= band &&
               std::abs(ratio_inv.back() - 1.0) <= band &&
               std::abs(ratio_tail.back() - 1.0) <= band;
    }

    /// |ratio - 1| does not increase along the sequence (up to slack).
    bool monotone_approach(double slack = 5e-3) const {
        auto mono = [slack](const std::vector<double>& r) {
            for (size_t i = 1; i < r.size(); ++i)
                if (std::abs(r[i] - 1.0) > std::abs(r[i - 1] - 1.0) + slack) return false;
            return true;
        };
        return mono(ratio_a) && mono(ratio_inv) && mono(ratio_tail);
    }
};

inline AsymptoticsReport asymptotics_report(const Transform& t, double v_min = 1e2,
                                            double v_max = 1e12, int points = 6) {
    if (!t.is_power())
        throw std::invalid_argument("asymptotics_report: requires power-law beta");
    AsymptoticsReport r;
    r.m = t.m();
    r.k = t.k();
    const double lmin = std::log(v_min), lmax = std::log(v_max);
    for (int i = 0; i < points; ++i) {
        const double L = lmin + (lmax - lmin) * i / (points - 1);
        const double v = std::exp(L);
        const double w = t.log_psi_inv(L);
        const double was = detail::tail_law_inverse(r.m, r.k, L);
        // log a(v) = m B(w) + log w - log v
        const double log_a = r.m * t.beta_integral(w) + std::log(w) - L;
        const double log_pred = std::log(r.m) + (r.k + 1) * std::log(was);
        r.v.push_back(v);
        r.ratio_a.push_back(std::exp(log_a - log_pred));
        r.ratio_inv.push_back(w / was);
        // psi(w) m w^k / psi'(w) in log space
        r.ratio_tail.push_back(std::exp(t.log_psi(w) + std::log(r.m) + r.k * std::log(w) -
                                        r.m * t.beta_integral(w)));
        r.naive_a.push_back(std::exp(log_a) / (r.m * L));
        r.naive_inv.push_back(w / std::pow(L, 1.0 / (r.k + 1)));
    }
    {
        const double v0 = 1e-3;
        const double w0 = t.psi_inv(v0);
        r.a_at_origin = t.psi_prime(w0) * w0 / v0;
    }
    return r;
}

/// Hypothesis check for the Vazquez-type strong maximum principle:
/// f(s) = Psi'(t_s) t_s with t_s = Psi^{-1}((1-s) c_beta) must vanish as
/// s -> 0+ and satisfy f(s)/(s ln^2 s) -> 0 at the tail-law rate
/// ~ c_beta (k+1)/(m |ln s|).
struct SmpReport {
    double m = 0.0;
    int k = 1;
    double c_beta = 0.0;
    std::vector<double> s;
    std::vector<double> f;          // Psi'(t_s) t_s
    std::vector<double> quotient;   // f(s) / (s ln^2 s)
    std::vector<double> ratio;      // quotient / tail-law prediction
    double f_at_one = 0.0;          // s = 1 boundary: t_s = 0 forces f = 0

    bool quotient_decays() const {
        for (size_t i = 1; i < quotient.size(); ++i)
            if (!(quotient[i] < quotient[i - 1])) return false;
        return true;
    }
    bool f_decays_to_zero(double floor = 1e-5) const {
        for (size_t i = 1; i < f.size(); ++i)
            if (!(f[i] < f[i - 1])) return false;
        return f.back() < floor;
    }
};

inline SmpReport smp_hypothesis_check(const Transform& t, double s_min = 1e-8,
                                      double s_max = 1e-1, int points = 8) {
    if (!t.is_power()) throw std::invalid_argument("smp_hypothesis_check: power-law beta only");
    SmpReport r;
    r.m = t.m();
    r.k = t.k();
    r.c_beta = t.c_beta();
    const double lmin = std::log(s_max), lmax = std::log(s_min);
    for (int i = 0; i < points; ++i) {
        const double ls = lmin + (lmax - lmin) * i / (points - 1);
        const double s = std::exp(ls);
        // t_s solves tail(t) = s c_beta, in log space.
        const double target = ls + std::log(r.c_beta);
        double hi = 1.0;
        while (t.log_tail(hi) > target && hi < 1e4) hi *= 2.0;
        double lo = 0.0;
        for (int it = 0; it < 120; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (t.log_tail(mid) > target)
                lo = mid;
            else
                hi = mid;
        }
        const double ts = 0.5 * (lo + hi);
        const double log_f = -r.m * t.beta_integral(ts) + std::log(ts);
        const double fq = std::exp(log_f - ls) / (ls * ls);
        const double tas = detail::saturation_tail_inverse(r.m, r.k, target);
        const double pred = r.c_beta * r.m * std::pow(tas, r.k + 1) / (ls * ls);
        r.s.push_back(s);
        r.f.push_back(std::exp(log_f));
        r.quotient.push_back(fq);
        r.ratio.push_back(fq / pred);
    }
    r.f_at_one = t.Psi_prime(0.0) * 0.0;
    return r;
}

} // namespace qg
