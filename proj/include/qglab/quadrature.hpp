#pragma once

#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace qg {

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (QUADPACK dqk15).
inline constexpr double gk_x[8] = {
    0.991455371120812639206854697526, 0.949107912342758524526189684048,
    0.864864423359769072789712788641, 0.741531185599394439863864773281,
    0.586087235467691130294144838259, 0.405845151377397166906606412077,
    0.207784955007898467600689403773, 0.0};
inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename F>
Panel gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - hw * gk_x[i]);
        fv[14 - i] = f(c + hw * gk_x[i]);
    }
    fv[7] = f(c);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 8; ++i) kron += gk_wk[i] * (i == 7 ? fv[7] : fv[i] + fv[14 - i]);
    // Gauss points are the odd-indexed Kronrod points.
    for (int i = 0; i < 4; ++i) {
        const int j = 2 * i + 1;
        gauss += gk_wg[i] * (j == 7 ? fv[7] : fv[j] + fv[14 - j]);
    }
    return {a, b, kron * hw, std::abs(kron - gauss) * hw};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod integral of f over [a, b]: the panel with
/// the largest error estimate is bisected until the summed error drops below
/// rel_tol * |integral|. Throws if the panel budget is exhausted first.
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-12) {
    if (a == b) return 0.0;
    std::priority_queue<detail::Panel> queue;
    queue.push(detail::gk15(f, a, b));
    double total = queue.top().value;
    double err = queue.top().error;
    const int max_panels = 4000;
    for (int it = 0; it < max_panels; ++it) {
        const double tol = std::max(rel_tol * std::abs(total), 1e-300);
        if (err <= tol) return total;
        const detail::Panel worst = queue.top();
        queue.pop();
        const double c = 0.5 * (worst.a + worst.b);
        const detail::Panel left = detail::gk15(f, worst.a, c);
        const detail::Panel right = detail::gk15(f, c, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }
    throw std::runtime_error("integrate: adaptive quadrature did not converge");
}

} // namespace qg
