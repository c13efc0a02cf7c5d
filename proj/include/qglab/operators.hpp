#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "qglab/field.hpp"

namespace qg {

/// Ellipticity constants of the extremal operators, 0 < lam <= Lam.
struct PucciParams {
    double lam = 1.0;
    double Lam = 1.0;

    void validate() const {
        if (!(0.0 < lam && lam <= Lam))
            throw std::invalid_argument("PucciParams: need 0 < lam <= Lam");
    }
};

enum class PucciSign { plus, minus };

/// Exact extremal value from the eigenvalues of the Hessian:
/// M+(X) = Lam * sum e+ - lam * sum e-,  M-(X) = lam * sum e+ - Lam * sum e-.
inline double pucci_exact(const std::vector<double>& eigs, const PucciParams& P,
                          PucciSign sign) {
    P.validate();
    double pos = 0.0, neg = 0.0;
    for (double e : eigs) {
        if (!std::isfinite(e)) throw std::invalid_argument("pucci_exact: non-finite eigenvalue");
        if (e > 0.0)
            pos += e;
        else
            neg += -e;
    }
    return sign == PucciSign::plus ? P.Lam * pos - P.lam * neg : P.lam * pos - P.Lam * neg;
}

/// Case tags of the admissible exponent configurations and the resolved
/// intermediate exponent r.
enum class ExponentCase { case_i, case_ii, case_iii };

struct ExponentPlan {
    ExponentCase tag;
    double r; // may be +inf
};

/// Resolves (p, q, q1, m) into a case tag and r:
///   (i)  q = inf, n < p          -> r = p m
///   (ii) n < p <= q < m/(m-1) p  -> r = inf if p = q, else pq/(q-p)
///   (iii) q >= m/(m-1) p         -> r = p m   (ties resolved to (iii))
inline ExponentPlan resolve_exponents(int n, double p, double q, double q1, double m_growth) {
    if (!(m_growth > 1.0)) throw std::invalid_argument("resolve_exponents: need m > 1");
    if (!(p > n)) throw std::invalid_argument("resolve_exponents: need p > n");
    if (!(q1 >= p)) throw std::invalid_argument("resolve_exponents: need q1 >= p");
    if (std::isinf(q)) return {ExponentCase::case_i, p * m_growth};
    if (!(q >= p)) throw std::invalid_argument("resolve_exponents: need p <= q");
    const double threshold = m_growth / (m_growth - 1.0) * p;
    if (q >= threshold) return {ExponentCase::case_iii, p * m_growth};
    if (p == q) return {ExponentCase::case_ii, std::numeric_limits<double>::infinity()};
    return {ExponentCase::case_ii, p * q / (q - p)};
}

/// Full instance of the model Dirichlet problem. The discrete residual is
///
///   R(u) = -M^sign(D^2 u)
///          - sign * [ b(x)|Du| + mu beta(u) <M(x) Du, Du>^{m/2} + lambda c(x) u ]
///          - h(x),
///
/// with beta(s) = s^k, k odd, and u = dirichlet on the boundary, so that for
/// sign = + and lam = Lam = 1 a zero residual is exactly the one-parameter
/// problem -Du'' - b|Du| = lambda c u + mu beta(u)|Du|^2 + h. Subsolutions
/// have R <= 0, supersolutions R >= 0. m_growth = 2 is the quadratic
/// (harmonic map-like) case where the gradient factor is the plain quadratic
/// form.
struct ProblemSpec {
    GridPtr grid;
    PucciSign sign = PucciSign::plus;
    PucciParams pucci{1.0, 1.0};
    ScalarField b;
    ScalarField c;
    ScalarField h;
    double mu = 0.0;
    std::optional<ScalarField> mu_field;
    int k = 1;
    double beta_growth_c = 1.0; // C with |beta(s)| <= C |s|^k
    MatrixField M;
    double m_growth = 2.0;
    double p = 4.0;
    double q = 4.0;  // may be +inf
    double q1 = 4.0; // exponent of b
    ScalarField dirichlet;
    double lambda = 0.0;
    int stencil_frames = 2; // 2D wide-stencil direction sets (1..3)

    static ProblemSpec laplacian(GridPtr grid) {
        ProblemSpec s;
        s.grid = grid;
        s.b = ScalarField(grid, 0.0);
        s.c = ScalarField(grid, 0.0);
        s.h = ScalarField(grid, 0.0);
        s.M = MatrixField::scaled_identity(grid, 1.0);
        s.dirichlet = ScalarField(grid, 0.0);
        const double n = grid->dim();
        s.p = n + 2.0;
        s.q = n + 2.0;
        s.q1 = n + 2.0;
        return s;
    }

    double signum() const { return sign == PucciSign::plus ? 1.0 : -1.0; }

    double mu_at(int node) const { return mu_field ? (*mu_field)[node] : mu; }

    double beta(double s) const {
        double v = s;
        for (int i = 1; i < k; ++i) v *= s;
        return v;
    }
    double beta_prime(double s) const {
        if (k == 1) return 1.0;
        double v = k;
        for (int i = 1; i < k; ++i) v *= s;
        return v;
    }

    void validate() const {
        if (!grid) throw std::invalid_argument("ProblemSpec: missing grid");
        pucci.validate();
        if (k < 1 || k % 2 == 0) throw std::invalid_argument("ProblemSpec: k must be odd >= 1");
        if (!(m_growth > 1.0)) throw std::invalid_argument("ProblemSpec: m_growth must be > 1");
        if (mu < 0.0) throw std::invalid_argument("ProblemSpec: mu must be >= 0");
        for (int n = 0; n < b.size(); ++n)
            if (b[n] < 0.0) throw std::invalid_argument("ProblemSpec: b must be >= 0");
        const int n = grid->dim();
        if (!(p > n && p <= q && p <= q1))
            throw std::invalid_argument("ProblemSpec: need n < p <= q, p <= q1");
        if (stencil_frames < 1 || stencil_frames > 3)
            throw std::invalid_argument("ProblemSpec: stencil_frames in 1..3");
        for (const ScalarField* f : {&b, &c, &h, &dirichlet})
            if (!f->grid() || !f->grid()->same_shape(*grid))
                throw std::invalid_argument("ProblemSpec: coefficient grid mismatch");
    }
};

/// Sparse linearization row: (node, coefficient) pairs.
using StencilRow = std::vector<std::pair<int, double>>;

namespace fd {

struct Direction {
    int dx, dy;
    double len2; // squared physical step length
};

/// Orthogonal direction frames available for the wide-stencil extremal
/// operator. Frame 0 is the axis frame; diagonal and knight-move frames
/// require square cells.
inline std::vector<std::vector<Direction>> frames_for(const Grid& g, int nframes) {
    std::vector<std::vector<Direction>> out;
    const double hx = g.spacing(0);
    if (g.dim() == 1) {
        out.push_back({{1, 0, hx * hx}});
        return out;
    }
    const double hy = g.spacing(1);
    out.push_back({{1, 0, hx * hx}, {0, 1, hy * hy}});
    const bool square = std::abs(hx - hy) <= 1e-12 * (hx + hy);
    if (nframes >= 2 && square) {
        const double d2 = hx * hx + hy * hy;
        out.push_back({{1, 1, d2}, {1, -1, d2}});
    }
    if (nframes >= 3 && square) {
        out.push_back({{2, 1, 4 * hx * hx + hy * hy}, {-1, 2, hx * hx + 4 * hy * hy}});
    }
    return out;
}

inline bool frame_fits(const Grid& g, int node, const std::vector<Direction>& frame) {
    const int i = g.ix(node), j = g.iy(node);
    for (const Direction& d : frame) {
        if (i + d.dx < 0 || i + d.dx >= g.nx() || i - d.dx < 0 || i - d.dx >= g.nx())
            return false;
        if (g.dim() == 2 &&
            (j + d.dy < 0 || j + d.dy >= g.ny() || j - d.dy < 0 || j - d.dy >= g.ny()))
            return false;
    }
    return true;
}

inline double second_difference(const ScalarField& u, int node, const Direction& d) {
    const Grid& g = *u.grid();
    const int off = d.dx + g.nx() * d.dy;
    return (u[node + off] - 2.0 * u[node] + u[node - off]) / d.len2;
}

/// Extremal value at one interior node: minimax over frames of the
/// per-direction lam/Lam-weighted second differences.
inline double pucci_value(const ScalarField& u, int node, const PucciParams& P, PucciSign sign,
                          const std::vector<std::vector<Direction>>& frames) {
    const Grid& g = *u.grid();
    double best = 0.0;
    bool first = true;
    for (const auto& frame : frames) {
        if (!frame_fits(g, node, frame)) continue;
        double s = 0.0;
        for (const Direction& d : frame) {
            const double dd = second_difference(u, node, d);
            if (sign == PucciSign::plus)
                s += dd > 0.0 ? P.Lam * dd : P.lam * dd;
            else
                s += dd > 0.0 ? P.lam * dd : P.Lam * dd;
        }
        if (first || (sign == PucciSign::plus ? s > best : s < best)) {
            best = s;
            first = false;
        }
    }
    return best;
}

/// Active linearization of pucci_value at u: rows such that row * u equals the
/// value. Frame ties resolve to the lowest frame index, coefficient ties to
/// the lam branch.
inline void pucci_row(const ScalarField& u, int node, const PucciParams& P, PucciSign sign,
                      const std::vector<std::vector<Direction>>& frames, StencilRow& row) {
    const Grid& g = *u.grid();
    double best = 0.0;
    int best_frame = -1;
    for (int f = 0; f < static_cast<int>(frames.size()); ++f) {
        if (!frame_fits(g, node, frames[f])) continue;
        double s = 0.0;
        for (const Direction& d : frames[f]) {
            const double dd = second_difference(u, node, d);
            if (sign == PucciSign::plus)
                s += dd > 0.0 ? P.Lam * dd : P.lam * dd;
            else
                s += dd > 0.0 ? P.lam * dd : P.Lam * dd;
        }
        if (best_frame < 0 || (sign == PucciSign::plus ? s > best : s < best)) {
            best = s;
            best_frame = f;
        }
    }
    for (const Direction& d : frames[best_frame]) {
        const double dd = second_difference(u, node, d);
        double a;
        if (sign == PucciSign::plus)
            a = dd > 0.0 ? P.Lam : P.lam;
        else
            a = dd > 0.0 ? P.lam : P.Lam;
        const int off = d.dx + g.nx() * d.dy;
        row.emplace_back(node + off, a / d.len2);
        row.emplace_back(node - off, a / d.len2);
        row.emplace_back(node, -2.0 * a / d.len2);
    }
}

inline void centered_gradient(const ScalarField& u, int node, double& gx, double& gy) {
    const Grid& g = *u.grid();
    gx = (u[node + 1] - u[node - 1]) / (2.0 * g.spacing(0));
    gy = 0.0;
    if (g.dim() == 2) gy = (u[node + g.nx()] - u[node - g.nx()]) / (2.0 * g.spacing(1));
}

/// Monotone one-sided envelope of |du/dx_a|: for direction_sign = +1 the
/// branches are nondecreasing in off-node values, for -1 nonincreasing.
inline double envelope_axis(const ScalarField& u, int node, int axis, int direction_sign) {
    const Grid& g = *u.grid();
    const int off = axis == 0 ? 1 : g.nx();
    const double h = g.spacing(axis);
    double b0, b1;
    if (direction_sign > 0) {
        b0 = (u[node + off] - u[node]) / h;
        b1 = (u[node - off] - u[node]) / h;
    } else {
        b0 = (u[node] - u[node + off]) / h;
        b1 = (u[node] - u[node - off]) / h;
    }
    return std::max({b0, b1, 0.0});
}

/// Whether the centered two-branch form of |Du| keeps the frozen system an
/// M-matrix at this node: the advective coefficient must be dominated by the
/// diffusion off-diagonals, and in 2D those must sit on the axis neighbors.
inline bool centered_gradient_safe(const Grid& g, double b_node, double lam, int nframes) {
    if (g.dim() == 2 && nframes > 1) return false;
    return b_node * g.hmax() <= 1.8 * lam;
}

/// Discrete |Du| used by the residual and all solvers: centered (second
/// order) where that is monotonicity-safe, the one-sided envelope otherwise.
inline double gradient_abs_value(const ScalarField& u, int node, int s_dir, double b_node,
                                 double lam, int nframes) {
    const Grid& g = *u.grid();
    if (centered_gradient_safe(g, b_node, lam, nframes)) {
        double gx, gy;
        centered_gradient(u, node, gx, gy);
        return std::sqrt(gx * gx + gy * gy);
    }
    double s2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double e = envelope_axis(u, node, a, s_dir);
        s2 += e * e;
    }
    return std::sqrt(s2);
}

/// Active linearization of gradient_abs_value: row * u equals the value at u.
/// Branch ties resolve to the lowest branch index; at a zero gradient the row
/// is empty (a valid generalized-Jacobian element of |.| at 0).
inline void gradient_abs_row(const ScalarField& u, int node, int s_dir, double b_node,
                             double lam, int nframes, StencilRow& row) {
    const Grid& g = *u.grid();
    if (centered_gradient_safe(g, b_node, lam, nframes)) {
        double gx, gy;
        centered_gradient(u, node, gx, gy);
        const double mag = std::sqrt(gx * gx + gy * gy);
        if (mag < 1e-300) return;
        const double ex = gx / mag, ey = gy / mag;
        row.emplace_back(node + 1, ex / (2.0 * g.spacing(0)));
        row.emplace_back(node - 1, -ex / (2.0 * g.spacing(0)));
        if (g.dim() == 2) {
            row.emplace_back(node + g.nx(), ey / (2.0 * g.spacing(1)));
            row.emplace_back(node - g.nx(), -ey / (2.0 * g.spacing(1)));
        }
        return;
    }
    std::array<double, 2> env{0.0, 0.0};
    std::array<int, 2> branch{2, 2}; // 0: +off, 1: -off, 2: zero
    double s2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const int off = a == 0 ? 1 : g.nx();
        const double h = g.spacing(a);
        double b0, b1;
        if (s_dir > 0) {
            b0 = (u[node + off] - u[node]) / h;
            b1 = (u[node - off] - u[node]) / h;
        } else {
            b0 = (u[node] - u[node + off]) / h;
            b1 = (u[node] - u[node - off]) / h;
        }
        double e = b0;
        int br = 0;
        if (b1 > e) {
            e = b1;
            br = 1;
        }
        if (0.0 > e) {
            e = 0.0;
            br = 2;
        }
        env[a] = e;
        branch[a] = br;
        s2 += e * e;
    }
    const double mag = std::sqrt(s2);
    if (mag < 1e-300) return;
    for (int a = 0; a < g.dim(); ++a) {
        if (branch[a] == 2 || env[a] == 0.0) continue;
        const int off = a == 0 ? 1 : g.nx();
        const double h = g.spacing(a);
        const double w = env[a] / mag;
        const int nb = branch[a] == 0 ? node + off : node - off;
        if (s_dir > 0) {
            row.emplace_back(nb, w / h);
            row.emplace_back(node, -w / h);
        } else {
            row.emplace_back(node, w / h);
            row.emplace_back(nb, -w / h);
        }
    }
}

} // namespace fd

/// Wide-stencil extremal operator on interior nodes (boundary entries zero).
inline ScalarField pucci_fd(const ScalarField& u, const PucciParams& P, PucciSign sign,
                            int nframes = 2) {
    P.validate();
    const auto frames = fd::frames_for(*u.grid(), nframes);
    ScalarField out(u.grid(), 0.0);
    for (int node : u.grid()->interior())
        out[node] = fd::pucci_value(u, node, P, sign, frames);
    return out;
}

/// Pure one-sided monotone |Du| envelope on interior nodes.
inline ScalarField grad_upwind_abs(const ScalarField& u, int direction_sign) {
    ScalarField out(u.grid(), 0.0);
    const int dim = u.grid()->dim();
    for (int node : u.grid()->interior()) {
        double s2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double e = fd::envelope_axis(u, node, a, direction_sign);
            s2 += e * e;
        }
        out[node] = std::sqrt(s2);
    }
    return out;
}

/// Centered gradient components on interior nodes.
inline std::pair<ScalarField, ScalarField> grad_centered(const ScalarField& u) {
    ScalarField gx(u.grid(), 0.0), gy(u.grid(), 0.0);
    for (int node : u.grid()->interior()) {
        double a, b;
        fd::centered_gradient(u, node, a, b);
        gx[node] = a;
        gy[node] = b;
    }
    return {gx, gy};
}

/// <M(x) Du, Du> with centered gradients, interior nodes.
inline ScalarField quad_form(const ScalarField& u, const MatrixField& M) {
    ScalarField out(u.grid(), 0.0);
    for (int node : u.grid()->interior()) {
        double gx, gy;
        fd::centered_gradient(u, node, gx, gy);
        out[node] = M.quad(node, gx, gy);
    }
    return out;
}

namespace fd {

/// Gradient-nonlinearity factor <M Du, Du>^{m/2} and its value/derivative
/// bundle; m = 2 is the plain quadratic form.
inline double quad_power(double Q, double m_growth) {
    if (m_growth == 2.0) return Q;
    return std::pow(std::max(Q, 0.0), 0.5 * m_growth);
}

inline double quad_power_dQ(double Q, double m_growth) {
    if (m_growth == 2.0) return 1.0;
    if (Q <= 1e-300) return 0.0;
    return 0.5 * m_growth * std::pow(Q, 0.5 * m_growth - 1.0);
}

} // namespace fd

/// Interior residual of the full problem: zero residual characterizes a
/// discrete solution. Throws when u violates the Dirichlet data beyond
/// boundary_tol.
inline ScalarField residual(const ProblemSpec& spec, const ScalarField& u,
                            double boundary_tol = 1e-7) {
    const Grid& g = *spec.grid;
    if (!u.grid() || !u.grid()->same_shape(g))
        throw std::invalid_argument("residual: field grid does not match spec grid");
    for (int node : g.boundary())
        if (std::abs(u[node] - spec.dirichlet[node]) > boundary_tol)
            throw std::invalid_argument("residual: boundary values do not match dirichlet data");
    const auto frames = fd::frames_for(g, spec.stencil_frames);
    const double s = spec.signum();
    ScalarField out(spec.grid, 0.0);
    for (int node : g.interior()) {
        const double puc = fd::pucci_value(u, node, spec.pucci, spec.sign, frames);
        const double grad = fd::gradient_abs_value(u, node, spec.sign == PucciSign::plus ? 1 : -1,
                                                   spec.b[node], spec.pucci.lam,
                                                   spec.stencil_frames);
        double gx, gy;
        fd::centered_gradient(u, node, gx, gy);
        const double Q = spec.M.quad(node, gx, gy);
        out[node] = -puc -
                    s * (spec.b[node] * grad + spec.lambda * spec.c[node] * u[node] +
                         spec.mu_at(node) * spec.beta(u[node]) *
                             fd::quad_power(Q, spec.m_growth)) -
                    spec.h[node];
    }
    return out;
}

inline double residual_sup(const ProblemSpec& spec, const ScalarField& u,
                           double boundary_tol = 1e-7) {
    return sup_norm(residual(spec, u, boundary_tol));
}

} // namespace qg
