#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "qglab/linsolve.hpp"
#include "qglab/operators.hpp"

namespace qg {

struct SolverConfig {
    double tol = 1e-9;            // outer residual sup-norm
    int max_outer = 400;
    double theta = 0.5;           // Picard damping
    double inner_tol = 1e-12;     // frozen-problem residual
    int policy_max_sweeps = 50;
    double armijo_c = 1e-4;
    int max_backtracks = 48;
    double divergence_guard = 1e8;
};

struct SolveReport {
    ScalarField u;
    int iterations = 0;
    std::vector<double> residual_history;
    bool converged = false;
    double final_residual = std::numeric_limits<double>::infinity();
    double sup_u = 0.0;
    double max_iterate_sup = 0.0;   // largest iterate sup-norm seen
    double w2p_surrogate = 0.0;     // second-difference Sobolev surrogate of u
    std::string method;
    std::string failure;            // empty when converged
};

/// Deterministic RNG: raw mt19937_64 bits mapped to [0,1) doubles, so the
/// stream does not depend on library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

private:
    std::mt19937_64 eng_;
};

/// Discrete W^{2,p} stand-in: ||u||_p + ||Du||_p + ||axis second differences||_p.
inline double w2p_surrogate(const ScalarField& u, double p) {
    const Grid& g = *u.grid();
    ScalarField gmag(u.grid(), 0.0), d2(u.grid(), 0.0);
    for (int node : g.interior()) {
        double gx, gy;
        fd::centered_gradient(u, node, gx, gy);
        gmag[node] = std::sqrt(gx * gx + gy * gy);
        double s2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const int off = a == 0 ? 1 : g.nx();
            const double h = g.spacing(a);
            const double dd = (u[node + off] - 2.0 * u[node] + u[node - off]) / (h * h);
            s2 += dd * dd;
        }
        d2[node] = std::sqrt(s2);
    }
    return lp_norm(u, p) + lp_norm(gmag, p) + lp_norm(d2, p);
}

/// Discrete W^{1,r} stand-in; r may be +inf.
inline double w1r_surrogate(const ScalarField& u, double r) {
    ScalarField gmag(u.grid(), 0.0);
    for (int node : u.grid()->interior()) {
        double gx, gy;
        fd::centered_gradient(u, node, gx, gy);
        gmag[node] = std::sqrt(gx * gx + gy * gy);
    }
    if (std::isinf(r)) return sup_norm(u) + sup_norm(gmag);
    return lp_norm(u, r) + lp_norm(gmag, r);
}

namespace detail {

/// Linearization rows of the frozen operator L(u) = M^s(D^2 u) + s b |Du| at
/// the current iterate; row * u reproduces the nonlinear value exactly.
inline void frozen_rows(const ProblemSpec& spec, const ScalarField& u, int node,
                        const std::vector<std::vector<fd::Direction>>& frames,
                        StencilRow& row) {
    row.clear();
    fd::pucci_row(u, node, spec.pucci, spec.sign, frames, row);
    if (spec.b[node] != 0.0) {
        StencilRow grow;
        fd::gradient_abs_row(u, node, spec.sign == PucciSign::plus ? 1 : -1, spec.b[node],
                             spec.pucci.lam, spec.stencil_frames, grow);
        const double sb = spec.signum() * spec.b[node];
        for (auto& [col, w] : grow) row.emplace_back(col, sb * w);
    }
}

inline double frozen_value(const ProblemSpec& spec, const ScalarField& u, int node,
                           const std::vector<std::vector<fd::Direction>>& frames) {
    const double puc = fd::pucci_value(u, node, spec.pucci, spec.sign, frames);
    double gv = 0.0;
    if (spec.b[node] != 0.0)
        gv = fd::gradient_abs_value(u, node, spec.sign == PucciSign::plus ? 1 : -1,
                                    spec.b[node], spec.pucci.lam, spec.stencil_frames);
    return puc + spec.signum() * spec.b[node] * gv;
}

} // namespace detail

/// Solves the frozen problem M^s(D^2 u) + s b(x)|Du| = rhs in the interior,
/// u = dirichlet on the boundary, by Howard policy iteration: each policy
/// (direction frame, lam/Lam branch, gradient branch per node) yields a
/// linear M-matrix system solved directly.
inline ScalarField solve_frozen(const ProblemSpec& spec, const ScalarField& rhs,
                                const ScalarField& dirichlet,
                                const SolverConfig& config = {}) {
    const Grid& g = *spec.grid;
    const auto frames = fd::frames_for(g, spec.stencil_frames);
    const int ni = static_cast<int>(g.interior().size());

    ScalarField u(spec.grid, 0.0);
    for (int node : g.boundary()) u[node] = dirichlet[node];

    // Roundoff floor of the nonlinear defect: second differences amplify
    // relative errors by Lam/h^2, the gradient term by b/h.
    const double hmin = g.dim() == 2 ? std::min(g.spacing(0), g.spacing(1)) : g.spacing(0);
    const double data_scale = 1.0 + sup_norm(rhs) + sup_norm(dirichlet);
    const double op_scale =
        2.0 * g.dim() * spec.pucci.Lam / (hmin * hmin) + sup_norm(spec.b) / hmin;
    const double floor =
        64.0 * std::numeric_limits<double>::epsilon() * data_scale * (1.0 + op_scale);
    StencilRow row;
    ScalarField prev = u;
    for (int sweep = 0; sweep < config.policy_max_sweeps; ++sweep) {
        InteriorSystem sys(ni);
        for (int node : g.interior()) {
            const int i = g.interior_offset(node);
            detail::frozen_rows(spec, u, node, frames, row);
            sys.rhs(i) = -rhs[node];
            for (const auto& [col, w] : row) {
                const int j = g.interior_offset(col);
                if (j >= 0)
                    sys.add(i, j, -w);
                else
                    sys.rhs(i) += w * dirichlet[col];
            }
        }
        std::vector<double> x;
        if (!sys.solve(x))
            throw std::runtime_error("solve_frozen: singular policy system");
        prev = u;
        for (int node : g.interior()) u[node] = x[g.interior_offset(node)];

        double defect = 0.0;
        for (int node : g.interior())
            defect = std::max(defect,
                              std::abs(detail::frozen_value(spec, u, node, frames) - rhs[node]));
        if (defect <= std::max(config.inner_tol, floor)) return u;
        // Stagnant iterate means the policy reached its fixed point and the
        // residual floor is pure roundoff.
        if (sweep > 0 && sup_norm(u - prev) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                                   (1.0 + sup_norm(u)))
            return u;
    }
    throw std::runtime_error("solve_frozen: policy iteration exceeded max sweeps");
}

namespace detail {

/// Right-hand side of the frozen problem with the zero-order and gradient
/// nonlinearities evaluated at v.
inline ScalarField picard_rhs(const ProblemSpec& spec, const ScalarField& v) {
    const double s = spec.signum();
    ScalarField rhs(spec.grid, 0.0);
    for (int node : spec.grid->interior()) {
        double gx, gy;
        fd::centered_gradient(v, node, gx, gy);
        const double Q = spec.M.quad(node, gx, gy);
        rhs[node] = -s * (spec.mu_at(node) * spec.beta(v[node]) *
                              fd::quad_power(Q, spec.m_growth) +
                          spec.lambda * spec.c[node] * v[node]) -
                    spec.h[node];
    }
    return rhs;
}

inline void fill_report_tail(const ProblemSpec& spec, SolveReport& rep) {
    rep.sup_u = sup_norm(rep.u);
    rep.w2p_surrogate = w2p_surrogate(rep.u, spec.p);
}

/// One row of the semismooth Jacobian of the residual at u, emitted as
/// (column node, value) pairs via add(). Ties in the minimax terms resolve to
/// the lowest index, so the Jacobian is deterministic.
template <typename AddFn>
void jacobian_row(const ProblemSpec& spec, const ScalarField& u,
                  const std::vector<std::vector<fd::Direction>>& frames, int node,
                  StencilRow& scratch, AddFn&& add) {
    const Grid& g = *spec.grid;
    const double s = spec.signum();
    scratch.clear();
    fd::pucci_row(u, node, spec.pucci, spec.sign, frames, scratch);
    for (const auto& [col, w] : scratch) add(col, -w);
    if (spec.b[node] != 0.0) {
        scratch.clear();
        fd::gradient_abs_row(u, node, spec.sign == PucciSign::plus ? 1 : -1, spec.b[node],
                             spec.pucci.lam, spec.stencil_frames, scratch);
        for (const auto& [col, w] : scratch) add(col, -s * spec.b[node] * w);
    }
    double gx, gy;
    fd::centered_gradient(u, node, gx, gy);
    const double Q = spec.M.quad(node, gx, gy);
    const double mu_i = spec.mu_at(node);
    add(node, -s * (spec.lambda * spec.c[node] +
                    mu_i * spec.beta_prime(u[node]) * fd::quad_power(Q, spec.m_growth)));
    if (mu_i != 0.0 && spec.beta(u[node]) != 0.0) {
        const double outer = -s * mu_i * spec.beta(u[node]) * fd::quad_power_dQ(Q, spec.m_growth);
        double mx, my;
        spec.M.apply(node, gx, gy, mx, my);
        add(node + 1, outer * mx / g.spacing(0));
        add(node - 1, -outer * mx / g.spacing(0));
        if (g.dim() == 2) {
            add(node + g.nx(), outer * my / g.spacing(1));
            add(node - g.nx(), -outer * my / g.spacing(1));
        }
    }
}

} // namespace detail

/// Damped fixed-point iteration u <- (1-theta) u + theta T(u), where T(v)
/// solves the frozen problem with the nonlinearity evaluated at v. The
/// undamped candidate is accepted whenever it already meets the tolerance.
inline SolveReport picard_solve(const ProblemSpec& spec, const SolverConfig& config = {}) {
    spec.validate();
    SolveReport rep;
    rep.method = "picard";

    ScalarField v(spec.grid, 0.0);
    for (int node : spec.grid->boundary()) v[node] = spec.dirichlet[node];
    double theta = config.theta;
    double prev_res = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= config.max_outer; ++it) {
        ScalarField w = solve_frozen(spec, detail::picard_rhs(spec, v), spec.dirichlet, config);
        double rw = residual_sup(spec, w);
        if (rw <= config.tol) {
            rep.u = w;
            rep.iterations = it;
            rep.converged = true;
            rep.final_residual = rw;
            rep.residual_history.push_back(rw);
            rep.max_iterate_sup = std::max(rep.max_iterate_sup, sup_norm(w));
            detail::fill_report_tail(spec, rep);
            return rep;
        }
        ScalarField next = v;
        for (int node : spec.grid->interior())
            next[node] = (1.0 - theta) * v[node] + theta * w[node];
        double r = residual_sup(spec, next);
        while (r > prev_res && theta > 1.0 / 64.0) {
            theta *= 0.5;
            for (int node : spec.grid->interior())
                next[node] = (1.0 - theta) * v[node] + theta * w[node];
            r = residual_sup(spec, next);
        }
        if (r < 0.25 * prev_res) theta = std::min(config.theta, 1.5 * theta);

        v = next;
        prev_res = r;
        rep.residual_history.push_back(r);
        rep.max_iterate_sup = std::max(rep.max_iterate_sup, sup_norm(v));
        if (!std::isfinite(r) || sup_norm(v) > config.divergence_guard) {
            rep.u = v;
            rep.iterations = it;
            rep.final_residual = r;
            rep.failure = "diverged";
            detail::fill_report_tail(spec, rep);
            return rep;
        }
        if (r <= config.tol) {
            rep.u = v;
            rep.iterations = it;
            rep.converged = true;
            rep.final_residual = r;
            detail::fill_report_tail(spec, rep);
            return rep;
        }
    }
    rep.u = v;
    rep.iterations = config.max_outer;
    rep.final_residual = prev_res;
    rep.failure = "max_iterations";
    detail::fill_report_tail(spec, rep);
    return rep;
}

/// Semismooth Newton on the full residual: exact derivatives of the smooth
/// terms, active-branch selection (lowest index at ties) for the minimax
/// Pucci and gradient terms, Armijo backtracking on ||R||^2.
inline SolveReport newton_solve(const ProblemSpec& spec, const ScalarField& initial,
                                const SolverConfig& config = {}) {
    spec.validate();
    const Grid& g = *spec.grid;
    const auto frames = fd::frames_for(g, spec.stencil_frames);
    const int ni = static_cast<int>(g.interior().size());

    SolveReport rep;
    rep.method = "newton";
    ScalarField u = initial;
    for (int node : g.boundary()) u[node] = spec.dirichlet[node];

    ScalarField R = residual(spec, u);
    double rsup = sup_norm(R);
    rep.residual_history.push_back(rsup);
    if (rsup <= config.tol) {
        rep.u = u;
        rep.converged = true;
        rep.final_residual = rsup;
        detail::fill_report_tail(spec, rep);
        return rep;
    }

    auto phi = [&](const ScalarField& r) {
        double p2 = 0.0;
        for (int node : g.interior()) p2 += r[node] * r[node];
        return p2;
    };

    StencilRow row;
    for (int it = 1; it <= config.max_outer; ++it) {
        InteriorSystem sys(ni);
        for (int node : g.interior()) {
            const int i = g.interior_offset(node);
            detail::jacobian_row(spec, u, frames, node, row, [&](int col, double w) {
                const int j = g.interior_offset(col);
                if (j >= 0) sys.add(i, j, w);
            });
            sys.rhs(i) = -R[node];
        }

        std::vector<double> d;
        if (!sys.solve(d)) {
            rep.u = u;
            rep.iterations = it;
            rep.final_residual = rsup;
            rep.failure = "singular_jacobian";
            detail::fill_report_tail(spec, rep);
            return rep;
        }

        const double phi0 = phi(R);
        double t = 1.0;
        ScalarField trial = u;
        ScalarField Rt = R;
        bool accepted = false;
        for (int bt = 0; bt < config.max_backtracks; ++bt) {
            for (int node : g.interior())
                trial[node] = u[node] + t * d[g.interior_offset(node)];
            Rt = residual(spec, trial);
            if (phi(Rt) <= (1.0 - config.armijo_c * t) * phi0 && std::isfinite(phi(Rt))) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            rep.u = u;
            rep.iterations = it;
            rep.final_residual = rsup;
            rep.failure = "line_search_stall";
            detail::fill_report_tail(spec, rep);
            return rep;
        }
        u = trial;
        R = Rt;
        rsup = sup_norm(R);
        rep.residual_history.push_back(rsup);
        rep.max_iterate_sup = std::max(rep.max_iterate_sup, sup_norm(u));
        if (rsup <= config.tol) {
            rep.u = u;
            rep.iterations = it;
            rep.converged = true;
            rep.final_residual = rsup;
            detail::fill_report_tail(spec, rep);
            return rep;
        }
        if (sup_norm(u) > config.divergence_guard) {
            rep.u = u;
            rep.iterations = it;
            rep.final_residual = rsup;
            rep.failure = "diverged";
            detail::fill_report_tail(spec, rep);
            return rep;
        }
    }
    rep.u = u;
    rep.iterations = config.max_outer;
    rep.final_residual = rsup;
    rep.failure = "max_iterations";
    detail::fill_report_tail(spec, rep);
    return rep;
}

/// Numerical surrogates for the embedding and inner-solver stability
/// constants. These are probe-set maxima, reproducible for a fixed seed, and
/// are labeled surrogates: they are not the functional-analytic constants.
struct ConstantEstimates {
    double C1 = 0.0;     // sup-norm vs W^{1,r} surrogate
    double Ctilde = 0.0; // frozen-solver W^{2,p} amplification
    double D = 0.0;      // W^{2,p} -> W^{1,r} surrogate ratio
    int probes = 0;
};

inline ConstantEstimates estimate_constants(GridPtr grid, const PucciParams& P,
                                            const ScalarField& b, double p, double r,
                                            std::uint64_t seed = 0, int random_probes = 3) {
    ConstantEstimates est;
    const Grid& g = *grid;
    auto hat = [&](double x, int axis) {
        return (x - g.lo(axis)) / (g.hi(axis) - g.lo(axis));
    };
    std::vector<ScalarField> probes;
    auto push_fn = [&](auto&& f) {
        probes.push_back(ScalarField::from_function(
            grid, [&](double x, double y) { return f(hat(x, 0), g.dim() == 2 ? hat(y, 1) : 0.5); }));
    };
    const double pi = 3.14159265358979323846;
    push_fn([&](double x, double y) { return x * (1 - x) * (g.dim() == 2 ? y * (1 - y) * 16 : 4); });
    push_fn([&](double x, double y) {
        return std::sin(pi * x) * (g.dim() == 2 ? std::sin(pi * y) : 1.0);
    });
    push_fn([&](double x, double y) {
        return std::sin(2 * pi * x) * x * (1 - x) * (g.dim() == 2 ? std::cos(pi * y) : 1.0);
    });
    push_fn([&](double x, double y) {
        return std::exp(x) * x * (1 - x) * (g.dim() == 2 ? y * (1 - y) : 1.0);
    });
    Rng rng(seed);
    for (int rp = 0; rp < random_probes; ++rp) {
        ScalarField f(grid, 0.0);
        for (int node : g.interior()) f[node] = rng.uniform(-1.0, 1.0);
        // two smoothing passes keep the surrogate derivatives sane
        for (int pass = 0; pass < 2; ++pass) {
            ScalarField sfld = f;
            for (int node : g.interior()) {
                double acc = f[node], cnt = 1.0;
                acc += f[node - 1] + f[node + 1];
                cnt += 2.0;
                if (g.dim() == 2) {
                    acc += f[node - g.nx()] + f[node + g.nx()];
                    cnt += 2.0;
                }
                sfld[node] = acc / cnt;
            }
            f = sfld;
        }
        probes.push_back(f);
    }
    for (const ScalarField& f : probes) {
        const double w1 = w1r_surrogate(f, r);
        const double w2 = w2p_surrogate(f, p);
        if (w1 > 0.0) est.C1 = std::max(est.C1, sup_norm(f) / w1);
        if (w2 > 0.0) est.D = std::max(est.D, w1 / w2);
    }
    // Frozen-solver stability on probe right-hand sides.
    ProblemSpec spec = ProblemSpec::laplacian(grid);
    spec.pucci = P;
    spec.b = b;
    spec.p = p;
    spec.q = std::max(p, r);
    spec.q1 = std::max(p, r);
    for (const ScalarField& f : probes) {
        ScalarField rhs(grid, 0.0);
        for (int node : g.interior()) rhs[node] = -std::abs(f[node]) - 0.25;
        const ScalarField u = solve_frozen(spec, rhs, spec.dirichlet);
        const double denom = lp_norm(rhs, p);
        if (denom > 0.0) est.Ctilde = std::max(est.Ctilde, w2p_surrogate(u, p) / denom);
    }
    est.probes = static_cast<int>(probes.size());
    return est;
}

/// Explicit smallness-condition evaluation: a pure report.
struct SmallnessReport {
    double eps1 = 0.0;
    double C1 = 0.0, Ctilde = 0.0, D = 0.0;
    double coeff_lhs = 0.0, coeff_rhs = 0.0; // zero-order coefficient condition
    bool coeff_ok = false;
    double data_lhs = 0.0, data_rhs = 0.0;   // data-size condition
    bool data_ok = false;
    double data_norm = 0.0;                  // ||h||_p + boundary-data surrogate
    double radius = 0.0;                     // predicted invariant-ball radius
    bool pass() const { return coeff_ok && data_ok; }
};

inline SmallnessReport smallness_check(const ProblemSpec& spec,
                                       const ConstantEstimates& cst) {
    SmallnessReport r;
    r.C1 = cst.C1;
    r.Ctilde = cst.Ctilde;
    r.D = cst.D;
    const double mk = spec.m_growth + spec.k;
    r.eps1 = std::pow(3.0 * cst.Ctilde * cst.D, -mk);

    // || lambda c ||_{L^q} < eps1^{1/(m+k)} / (C1 |Omega|^{(q-p)/(pq)})
    ScalarField lc = spec.c;
    lc *= spec.lambda;
    r.coeff_lhs = std::isinf(spec.q) ? sup_norm(lc) : lp_norm(lc, spec.q);
    const double vol_exp = std::isinf(spec.q) ? 1.0 / spec.p
                                              : (spec.q - spec.p) / (spec.p * spec.q);
    const double vol_factor = std::pow(spec.grid->domain_volume(), vol_exp);
    r.coeff_rhs = std::pow(r.eps1, 1.0 / mk) / (cst.C1 * vol_factor);
    r.coeff_ok = r.coeff_lhs < r.coeff_rhs;

    // mu_sup * C_beta * C1^k * (||h||_p + ||psi||-surrogate)^{m+k-1} < eps1
    double mu_sup = spec.mu;
    if (spec.mu_field) mu_sup = sup_norm(*spec.mu_field);
    r.data_norm = lp_norm(spec.h, spec.p) + w2p_surrogate(spec.dirichlet, spec.p);
    r.data_lhs = mu_sup * spec.beta_growth_c * std::pow(cst.C1, spec.k) *
                 std::pow(r.data_norm, mk - 1.0);
    r.data_rhs = r.eps1;
    r.data_ok = r.data_lhs < r.data_rhs;

    r.radius = 3.0 * cst.Ctilde * cst.D * r.data_norm;
    return r;
}

} // namespace qg
