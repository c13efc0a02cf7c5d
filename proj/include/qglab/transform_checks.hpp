#pragma once

#include <functional>

#include "qglab/operators.hpp"
#include "qglab/transform.hpp"

namespace qg {

/// Axis-aligned discrete Laplacian on interior nodes.
inline ScalarField laplacian_fd(const ScalarField& u) {
    const Grid& g = *u.grid();
    ScalarField out(u.grid(), 0.0);
    for (int node : g.interior()) {
        double s = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const int off = a == 0 ? 1 : g.nx();
            const double h = g.spacing(a);
            s += (u[node + off] - 2.0 * u[node] + u[node - off]) / (h * h);
        }
        out[node] = s;
    }
    return out;
}

struct ConvergenceReport {
    std::vector<double> h;
    std::vector<double> defect;

    std::vector<double> orders() const {
        std::vector<double> o;
        for (size_t i = 1; i < defect.size(); ++i) {
            if (defect[i] <= 0.0 || defect[i - 1] <= 0.0) {
                o.push_back(std::numeric_limits<double>::infinity());
                continue;
            }
            o.push_back(std::log2(defect[i - 1] / defect[i]) /
                        std::log2(h[i - 1] / h[i]));
        }
        return o;
    }

    double min_order() const {
        double m = std::numeric_limits<double>::infinity();
        for (double o : orders()) m = std::min(m, o);
        return m;
    }
};

using FieldFn = std::function<double(double, double)>;

/// Max interior defect of the transformed-Laplacian identity
/// lap(psi(u)) / psi'(u) = lap(u) + m beta(u) |Du|^2 on one grid.
inline double laplacian_identity_defect(const ScalarField& u, const Transform& t) {
    const Grid& g = *u.grid();
    const std::vector<double> vv = transform_values(t, u.values(), true);
    ScalarField v(u.grid(), 0.0);
    for (int n = 0; n < u.size(); ++n) v[n] = vv[n];
    const ScalarField lap_u = laplacian_fd(u);
    const ScalarField lap_v = laplacian_fd(v);
    double worst = 0.0;
    for (int node : g.interior()) {
        double gx, gy;
        fd::centered_gradient(u, node, gx, gy);
        const double q = gx * gx + gy * gy;
        const double lhs = lap_v[node] / t.psi_prime(u[node]);
        const double rhs = lap_u[node] + t.m() * t.beta(u[node]) * q;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

/// Refinement study of the identity defect; no sign condition on u.
inline ConvergenceReport verify_laplacian_identity(const FieldFn& u_fn, GridPtr base,
                                                   int levels, const Transform& t) {
    ConvergenceReport rep;
    GridPtr g = base;
    for (int l = 0; l < levels; ++l) {
        rep.h.push_back(g->hmax());
        rep.defect.push_back(laplacian_identity_defect(ScalarField::from_function(g, u_fn), t));
        g = g->refined();
    }
    return rep;
}

struct SandwichReport {
    std::vector<double> h;
    std::vector<double> violation; // max over nodes, chains, and both operators

    /// Violations follow the O(h) slack model measured on the coarsest level.
    bool slack_linear(double safety = 1.5, double atol = 1e-10) const {
        const double c0 = violation.front() / h.front();
        for (size_t i = 0; i < violation.size(); ++i)
            if (violation[i] > safety * c0 * h[i] + atol) return false;
        return true;
    }
};

/// Nodewise violation of the two inequality chains linking the extremal
/// operator of psi(u) (resp. Psi(u)) to that of u plus the quadratic gradient
/// term. The chain direction flips with the sign of u; both extremal
/// operators are checked.
inline double sandwich_violation(const ScalarField& u, const Transform& t,
                                 const PucciParams& P, int nframes = 2) {
    const Grid& g = *u.grid();
    const std::vector<double> vv = transform_values(t, u.values(), true);
    const std::vector<double> ww = transform_values(t, u.values(), false);
    ScalarField v(u.grid(), 0.0), w(u.grid(), 0.0);
    for (int n = 0; n < u.size(); ++n) {
        v[n] = vv[n];
        w[n] = ww[n];
    }
    double worst = 0.0;
    for (PucciSign sign : {PucciSign::plus, PucciSign::minus}) {
        const ScalarField pu = pucci_fd(u, P, sign, nframes);
        const ScalarField pv = pucci_fd(v, P, sign, nframes);
        const ScalarField pw = pucci_fd(w, P, sign, nframes);
        for (int node : g.interior()) {
            double gx, gy;
            fd::centered_gradient(u, node, gx, gy);
            const double q = gx * gx + gy * gy;
            const double gb = t.m() * t.beta(u[node]) * q; // sign follows beta(u)
            const double mid_v = pv[node] / t.psi_prime(u[node]);
            const double mid_w = pw[node] / t.Psi_prime(u[node]);
            // For u >= 0: pu + lam*gb <= mid_v <= pu + Lam*gb and
            //             pu - Lam*gb <= mid_w <= pu - lam*gb.
            // For u <= 0, gb <= 0 swaps the roles of lam and Lam; min/max of
            // the two candidate bounds covers both cases at once.
            const double lo_v = pu[node] + std::min(P.lam * gb, P.Lam * gb);
            const double hi_v = pu[node] + std::max(P.lam * gb, P.Lam * gb);
            const double lo_w = pu[node] - std::max(P.lam * gb, P.Lam * gb);
            const double hi_w = pu[node] - std::min(P.lam * gb, P.Lam * gb);
            worst = std::max({worst, lo_v - mid_v, mid_v - hi_v, lo_w - mid_w, mid_w - hi_w});
        }
    }
    return worst;
}

inline SandwichReport verify_sandwich(const FieldFn& u_fn, GridPtr base, int levels,
                                      const Transform& t, const PucciParams& P) {
    SandwichReport rep;
    GridPtr g = base;
    for (int l = 0; l < levels; ++l) {
        rep.h.push_back(g->hmax());
        rep.violation.push_back(sandwich_violation(ScalarField::from_function(g, u_fn), t, P));
        g = g->refined();
    }
    return rep;
}

} // namespace qg
