#pragma once

#include <functional>
#include <optional>
#include <string>

#include "qglab/checks.hpp"
#include "qglab/spectral.hpp"

namespace qg {

struct BranchPoint {
    double lambda = 0.0;
    ScalarField u;
    double sup = 0.0;
    double min_value = 0.0;
    int newton_iters = 0;
    double tangent_dlambda = 0.0; // lambda component of the unit secant tangent
    bool fold_flag = false;
    double sensitivity = 0.0; // ||du/dlambda||_inf at the point
};

struct Branch {
    std::vector<BranchPoint> points;
    std::optional<std::size_t> fold_index;
    std::optional<double> lambda_bar;         // max lambda over points, set at a fold
    std::optional<double> lambda_bar_refined; // parabola vertex through the fold
    std::string stop_reason;

    double max_lambda() const {
        double m = 0.0;
        for (const auto& p : points) m = std::max(m, p.lambda);
        return m;
    }
    /// Lower sub-branch: up to and including the fold point.
    std::size_t lower_end() const { return fold_index ? *fold_index + 1 : points.size(); }
};

struct ContinuationConfig {
    SolverConfig solver;
    double ds0 = 1e-2;
    double ds_min = 1e-7;
    double ds_max = 0.2;
    int max_steps = 3000;
    int corrector_max = 10;
    double sup_guard = 80.0;    // stop when the branch sup-norm passes this
    double lambda_stop = 0.0;   // stop when lambda drops below this after the fold
    double fold_sensitivity_factor = 5.0;
};

/// Base-problem solve at lambda = 0. With a nonnegative source the discrete
/// maximum principle forces a nonnegative solution; a violation is reported
/// as a failure, not asserted silently.
inline SolveReport solve_p0(const ProblemSpec& spec, const SolverConfig& config = {}) {
    ProblemSpec s0 = spec;
    s0.lambda = 0.0;
    SolveReport rep = picard_solve(s0, config);
    if (!rep.converged) rep = newton_solve(s0, rep.u, config);
    if (rep.converged && min_value(spec.h) >= 0.0 && min_value(rep.u) < -100.0 * config.tol)
        rep.failure = "negative_u0";
    return rep;
}

namespace detail {

inline ScalarField lambda_derivative(const ProblemSpec& spec, const ScalarField& u) {
    // dR/dlambda = -sign * c * u on interior nodes
    ScalarField out(spec.grid, 0.0);
    const double s = spec.signum();
    for (int node : spec.grid->interior()) out[node] = -s * spec.c[node] * u[node];
    return out;
}

/// ||du/dlambda||_inf from the natural-parameter sensitivity system
/// J (du/dlambda) = -dR/dlambda; infinity when J is singular (at a fold).
inline double fold_sensitivity(const ProblemSpec& spec, const ScalarField& u) {
    const Grid& g = *spec.grid;
    const auto frames = fd::frames_for(g, spec.stencil_frames);
    const int ni = static_cast<int>(g.interior().size());
    InteriorSystem sys(ni);
    StencilRow row;
    const ScalarField rl = lambda_derivative(spec, u);
    for (int node : g.interior()) {
        const int i = g.interior_offset(node);
        jacobian_row(spec, u, frames, node, row, [&](int col, double w) {
            const int j = g.interior_offset(col);
            if (j >= 0) sys.add(i, j, w);
        });
        sys.rhs(i) = -rl[node];
    }
    std::vector<double> z;
    if (!sys.solve(z)) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (double v : z) m = std::max(m, std::abs(v));
    return m;
}

} // namespace detail

/// Minimal-branch sweep on an ascending lambda grid: predictor = previous
/// solution, corrector = semismooth Newton. Corrector failure is the fold
/// signal, not an error.
inline Branch natural_sweep(const ProblemSpec& spec, const ScalarField& u0,
                            const std::vector<double>& lambda_grid,
                            const ContinuationConfig& config = {},
                            const EigenPair* pair = nullptr) {
    Branch br;
    ProblemSpec cur = spec;
    cur.lambda = lambda_grid.at(0);
    {
        BranchPoint p;
        p.lambda = cur.lambda;
        p.u = u0;
        p.sup = sup_norm(u0);
        p.min_value = min_value(u0);
        p.tangent_dlambda = 1.0;
        p.sensitivity = detail::fold_sensitivity(cur, u0);
        br.points.push_back(std::move(p));
    }
    for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
        cur.lambda = lambda_grid[i];
        SolveReport rep = newton_solve(cur, br.points.back().u, config.solver);
        if (!rep.converged) {
            br.stop_reason = "corrector_failed";
            return br;
        }
        if (rep.sup_u > config.sup_guard) {
            br.stop_reason = "divergence_guard";
            return br;
        }
        if (pair) {
            const StrictOrder o = strictly_below(br.points.back().u, rep.u, *pair);
            if (!o.holds) {
                br.stop_reason = "ordering_lost";
                return br;
            }
        }
        BranchPoint p;
        p.lambda = cur.lambda;
        p.u = rep.u;
        p.sup = rep.sup_u;
        p.min_value = min_value(rep.u);
        p.newton_iters = rep.iterations;
        p.tangent_dlambda = 1.0;
        p.sensitivity = detail::fold_sensitivity(cur, rep.u);
        br.points.push_back(std::move(p));
    }
    br.stop_reason = "grid_exhausted";
    return br;
}

/// Pseudo-arclength continuation through the fold: secant-tangent predictor,
/// bordered semismooth-Newton corrector with adaptive step length. The fold
/// is flagged where the lambda component of the tangent changes sign and the
/// natural-parameter sensitivity spikes (two independent signals).
inline Branch arclength_continue(const ProblemSpec& spec, const Branch& seed,
                                 const ContinuationConfig& config = {}) {
    if (seed.points.size() < 2)
        throw std::invalid_argument("arclength_continue: need at least two seed points");
    Branch br = seed;
    const Grid& g = *spec.grid;
    const auto frames = fd::frames_for(g, spec.stencil_frames);
    const int ni = static_cast<int>(g.interior().size());
    const double base_sens = std::max(1.0, br.points.front().sensitivity);

    // Fold-detection state: last point whose tangent clearly advanced in
    // lambda, and the pending turning-point candidate.
    std::ptrdiff_t last_advancing = -1;
    std::ptrdiff_t pending_cand = -1;
    double pending_spike = 0.0;

    double ds = config.ds0;
    for (int step = 0; step < config.max_steps; ++step) {
        const BranchPoint& pA = br.points[br.points.size() - 2];
        const BranchPoint& pB = br.points.back();
        // Metric weights from the last accepted point.
        const double su = std::max(1.0, pB.sup);
        const double sl = std::max(1.0, std::abs(pB.lambda));
        const double wu = 1.0 / (static_cast<double>(ni) * su * su);
        const double wl = 1.0 / (sl * sl);
        // Unit secant tangent.
        std::vector<double> tu(ni);
        double norm2 = 0.0;
        for (int node : g.interior()) {
            const int i = g.interior_offset(node);
            tu[i] = pB.u[node] - pA.u[node];
            norm2 += wu * tu[i] * tu[i];
        }
        double tl = pB.lambda - pA.lambda;
        norm2 += wl * tl * tl;
        const double nrm = std::sqrt(norm2);
        if (!(nrm > 0.0)) {
            br.stop_reason = "stagnant_tangent";
            break;
        }
        for (double& v : tu) v /= nrm;
        tl /= nrm;

        bool accepted = false;
        while (!accepted) {
            // Predictor.
            ScalarField u = pB.u;
            double lam = pB.lambda + ds * tl;
            for (int node : g.interior())
                u[node] = pB.u[node] + ds * tu[g.interior_offset(node)];

            ProblemSpec cur = spec;
            int iters = 0;
            bool ok = false;
            for (; iters < config.corrector_max; ++iters) {
                cur.lambda = lam;
                const ScalarField R = residual(cur, u);
                double constraint = -ds;
                for (int node : g.interior())
                    constraint +=
                        wu * tu[g.interior_offset(node)] * (u[node] - pB.u[node]);
                constraint += wl * tl * (lam - pB.lambda);
                if (sup_norm(R) <= config.solver.tol && std::abs(constraint) <= 1e-11) {
                    ok = true;
                    break;
                }
                // Bordered system [J dR/dl; tangent] on (du, dlambda).
                InteriorSystem sys(ni + 1);
                StencilRow row;
                const ScalarField rl = detail::lambda_derivative(cur, u);
                for (int node : g.interior()) {
                    const int i = g.interior_offset(node);
                    detail::jacobian_row(cur, u, frames, node, row, [&](int col, double w) {
                        const int j = g.interior_offset(col);
                        if (j >= 0) sys.add(i, j, w);
                    });
                    sys.add(i, ni, rl[node]);
                    sys.rhs(i) = -R[node];
                    sys.add(ni, i, wu * tu[i]);
                }
                sys.add(ni, ni, wl * tl);
                sys.rhs(ni) = -constraint;
                std::vector<double> d;
                if (!sys.solve(d)) break;
                // damped update: halve the step while the residual grows
                const double res_before = std::max(sup_norm(R), std::abs(constraint));
                double t = 1.0;
                ScalarField u_try = u;
                double lam_try = lam;
                for (int bt = 0; bt < 4; ++bt) {
                    for (int node : g.interior())
                        u_try[node] = u[node] + t * d[g.interior_offset(node)];
                    lam_try = lam + t * d[ni];
                    cur.lambda = lam_try;
                    const double rnew = sup_norm(residual(cur, u_try, 1e30));
                    if (rnew <= std::max(2.0 * res_before, 10.0 * config.solver.tol) ||
                        t <= 0.125)
                        break;
                    t *= 0.5;
                }
                u = u_try;
                lam = lam_try;
                if (!std::isfinite(lam) || sup_norm(u) > 10.0 * config.sup_guard) break;
            }
            if (ok) {
                cur.lambda = lam;
                BranchPoint p;
                p.lambda = lam;
                p.u = u;
                p.sup = sup_norm(u);
                p.min_value = min_value(u);
                p.newton_iters = iters;
                p.tangent_dlambda = tl;
                p.sensitivity = detail::fold_sensitivity(cur, u);
                // Short steps near ill-conditioned points keep the corrector
                // on its own branch.
                const double cap = p.sensitivity > 5.0 * base_sens ? 0.25 * config.ds_max
                                                                   : config.ds_max;
                br.points.push_back(std::move(p));
                accepted = true;
                if (iters <= 3) ds = std::min(cap, 1.5 * ds);
                ds = std::min(ds, cap);
            } else {
                ds *= 0.5;
                if (ds < config.ds_min) {
                    br.stop_reason = "step_underflow";
                    return br;
                }
            }
        }

        // Fold detection, two independent signals. Signal one: the tangent's
        // lambda component was clearly positive and has become clearly
        // negative (possibly over several near-zero steps at a gentle
        // traversal). Signal two: the natural-parameter sensitivity spikes in
        // the turning window. The flag is committed only once lambda has
        // retreated from the window maximum, which rules out vertical
        // asymptotes where lambda merely stalls.
        const std::size_t n = br.points.size();
        if (!br.fold_index && n >= 2) {
            const double tl_new = br.points[n - 1].tangent_dlambda;
            if (tl_new > 0.02 && pending_cand < 0) last_advancing = n - 1;
            if (tl_new < -0.02 && last_advancing >= 0 && pending_cand < 0) {
                pending_cand = std::max<std::ptrdiff_t>(0, last_advancing - 3);
                pending_spike = 0.0;
                for (std::size_t i = static_cast<std::size_t>(pending_cand); i < n; ++i) {
                    if (br.points[i].lambda > br.points[pending_cand].lambda)
                        pending_cand = static_cast<std::ptrdiff_t>(i);
                    pending_spike = std::max(pending_spike, br.points[i].sensitivity);
                }
            }
            if (pending_cand >= 0) {
                const std::size_t cand = static_cast<std::size_t>(pending_cand);
                pending_spike = std::max(pending_spike, br.points[n - 1].sensitivity);
                const double lmax = br.points[cand].lambda;
                const bool retreated =
                    br.points[n - 1].lambda < lmax - 0.005 * std::max(1.0, std::abs(lmax));
                const bool spiked = pending_spike > config.fold_sensitivity_factor * base_sens ||
                                    std::isinf(pending_spike);
                if (retreated && spiked) {
                    br.fold_index = cand;
                    br.points[cand].fold_flag = true;
                    br.lambda_bar = br.max_lambda();
                    // Parabola vertex through (s, lambda) around the fold.
                    if (cand >= 1 && cand + 1 < n) {
                        const double l0 = br.points[cand - 1].lambda;
                        const double l1 = br.points[cand].lambda;
                        const double l2 = br.points[cand + 1].lambda;
                        const double den = l0 - 2.0 * l1 + l2;
                        if (std::abs(den) > 1e-300) {
                            const double off = 0.5 * (l0 - l2) / den;
                            br.lambda_bar_refined = l1 - 0.25 * (l0 - l2) * off;
                        }
                    }
                }
            }
        }

        const BranchPoint& last = br.points.back();
        if (last.sup > config.sup_guard) {
            br.stop_reason = "divergence_guard";
            return br;
        }
        if (br.fold_index && last.lambda < config.lambda_stop) {
            br.stop_reason = "lambda_stop";
            return br;
        }
        if (last.lambda < -1e-9) {
            br.stop_reason = "lambda_negative";
            return br;
        }
    }
    br.stop_reason = "max_steps";
    return br;
}

/// Corrects a solution at an exact lambda from a bracketing pair of branch
/// points on the requested sub-branch (lower: before the fold, upper: after).
inline std::optional<SolveReport> solution_at_lambda(const ProblemSpec& spec,
                                                     const Branch& br, double lam, bool upper,
                                                     const SolverConfig& config = {}) {
    if (!br.fold_index && upper) return std::nullopt;
    const std::size_t lo = upper ? *br.fold_index : 0;
    const std::size_t hi = upper ? br.points.size() : br.lower_end();
    for (std::size_t i = lo; i + 1 < hi; ++i) {
        const BranchPoint& a = br.points[i];
        const BranchPoint& b = br.points[i + 1];
        const double l0 = std::min(a.lambda, b.lambda), l1 = std::max(a.lambda, b.lambda);
        if (lam < l0 || lam > l1) continue;
        const double t = (l1 - l0) > 0.0 ? (lam - a.lambda) / (b.lambda - a.lambda) : 0.5;
        ScalarField seed = a.u;
        for (int n = 0; n < seed.size(); ++n) seed[n] = (1.0 - t) * a.u[n] + t * b.u[n];
        ProblemSpec cur = spec;
        cur.lambda = lam;
        SolveReport rep = newton_solve(cur, seed, config);
        if (rep.converged) return rep;
    }
    return std::nullopt;
}

/// Fixed multi-start protocol for nonexistence probes; versioned so that "no
/// solution found under protocol" is reproducible.
struct MultiStartProtocol {
    std::vector<double> phi1_multipliers{0.5, 2.0, 8.0, 24.0};
    bool include_zero = true;
    bool include_u0 = true;
    int max_newton_iters = 80;
    double nonneg_tol = 1e-8;
    std::string version = "msp-1";
};

struct MultiStartOutcome {
    double lambda = 0.0;
    int starts = 0;
    int converged = 0;
    int nonnegative_found = 0;
    double best_min_value = 0.0; // min value of the "most nonnegative" solution found
    std::vector<ScalarField> solutions;
};

inline MultiStartOutcome multi_start_solve(const ProblemSpec& spec, double lam,
                                           const ScalarField* u0, const EigenPair* pair,
                                           const MultiStartProtocol& protocol,
                                           const SolverConfig& base_config) {
    MultiStartOutcome out;
    out.lambda = lam;
    out.best_min_value = -std::numeric_limits<double>::infinity();
    SolverConfig config = base_config;
    config.max_outer = protocol.max_newton_iters;
    ProblemSpec cur = spec;
    cur.lambda = lam;
    std::vector<ScalarField> starts;
    if (protocol.include_zero) starts.emplace_back(spec.grid, 0.0);
    if (protocol.include_u0 && u0) starts.push_back(*u0);
    if (pair)
        for (double mlt : protocol.phi1_multipliers) starts.push_back(mlt * pair->phi1);
    for (ScalarField& s0 : starts) {
        ++out.starts;
        SolveReport rep = newton_solve(cur, s0, config);
        if (!rep.converged) continue;
        ++out.converged;
        const double mv = min_value(rep.u);
        out.best_min_value = std::max(out.best_min_value, mv);
        if (mv >= -protocol.nonneg_tol) ++out.nonnegative_found;
        out.solutions.push_back(rep.u);
    }
    return out;
}

/// Shift probe: raises the source by a multiples of the weight c and records
/// where multi-start solving stops finding solutions. The empirical threshold
/// is reported; failure beyond it should be monotone in a.
struct ShiftProbeReport {
    double lambda = 0.0;
    std::vector<double> a;
    std::vector<int> found;
    std::optional<double> threshold; // smallest a with no solution found onward
    bool failure_monotone = true;
};

inline ShiftProbeReport nonexistence_shift_probe(const ProblemSpec& spec, double lam,
                                                 const std::vector<double>& a_grid,
                                                 const ScalarField* u0, const EigenPair* pair,
                                                 const MultiStartProtocol& protocol,
                                                 const SolverConfig& config) {
    ShiftProbeReport rep;
    rep.lambda = lam;
    std::optional<ScalarField> prev_solution;
    for (double a : a_grid) {
        ProblemSpec cur = spec;
        cur.lambda = lam;
        for (int n = 0; n < cur.h.size(); ++n) cur.h[n] = spec.h[n] + a * spec.c[n];
        MultiStartOutcome out = multi_start_solve(cur, lam, u0, pair, protocol, config);
        // Warm start from the previous shift keeps the probe fair: existence
        // is tested with the best available seed, not just cold starts.
        if (prev_solution) {
            SolverConfig c2 = config;
            c2.max_outer = protocol.max_newton_iters;
            SolveReport warm = newton_solve(cur, *prev_solution, c2);
            if (warm.converged) {
                ++out.converged;
                out.solutions.push_back(warm.u);
            }
        }
        const bool found = out.converged > 0;
        rep.a.push_back(a);
        rep.found.push_back(found ? 1 : 0);
        if (found)
            prev_solution = out.solutions.front();
        else if (!rep.threshold)
            rep.threshold = a;
    }
    bool seen_fail = false;
    for (int f : rep.found) {
        if (!f) seen_fail = true;
        if (f && seen_fail) {
            rep.failure_monotone = false;
            rep.threshold.reset();
        }
    }
    return rep;
}

/// Builds a strict subsolution below a given supersolution via the truncated
/// auxiliary problem: a constant-source linear solve pins the truncation
/// level, then a damped fixed-point iteration solves the truncated equation.
/// The result solves the original equation with the source replaced by
/// -h^- - 1, hence its residual is <= -1: a strict subsolution.
struct StrictSubsolution {
    ScalarField v;
    Classification cls;
    double truncation_level = 0.0;
    double gradient_bound = 0.0; // A = sup |D gamma|
    double min_gap_to_super = 0.0;
};

inline StrictSubsolution strict_subsolution_builder(const ProblemSpec& spec,
                                                    const ScalarField& gamma,
                                                    const SolverConfig& config = {},
                                                    double truncation_level = 0.0) {
    const Classification cg = classify(spec, gamma, 100.0 * config.tol);
    if (!cg.is_super)
        throw std::invalid_argument("strict_subsolution_builder: gamma is not a supersolution");
    const Grid& g = *spec.grid;

    double A = 0.0;
    for (int node : g.interior()) {
        double gx, gy;
        fd::centered_gradient(gamma, node, gx, gy);
        A = std::max(A, std::sqrt(gx * gx + gy * gy));
    }
    double level = truncation_level;
    if (level <= 0.0) level = 2.0 * (neg_part_sup(gamma) + 1.0);
    if (level <= neg_part_sup(gamma))
        throw std::invalid_argument(
            "strict_subsolution_builder: truncation level below the supersolution bound");

    // Auxiliary constant-source problem (paper orientation):
    //   -lap v = -lambda c k - mu beta(k) A^2 - h^- - 1, v = 0 on the boundary,
    // realized through the frozen solver as lap v = (that source, negated).
    ProblemSpec lin = spec;
    lin.b = ScalarField(spec.grid, 0.0);
    ScalarField rhs(spec.grid, 0.0);
    for (int node : g.interior())
        rhs[node] = spec.lambda * spec.c[node] * level +
                    spec.mu_at(node) * spec.beta(level) * A * A +
                    std::max(-spec.h[node], 0.0) + 1.0;
    const ScalarField zero_bc(spec.grid, 0.0);
    ScalarField alpha = solve_frozen(lin, rhs, zero_bc, config);

    // Truncated equation solved by damped fixed-point iteration: the
    // truncation clamps the zero-order argument at -level from below.
    auto trunc = [level](double v) { return v <= -level ? -level : v; };
    ProblemSpec mod = spec;
    for (int node = 0; node < mod.h.size(); ++node)
        mod.h[node] = -std::max(-spec.h[node], 0.0) - 1.0;
    ScalarField v = alpha;
    const double s = spec.signum();
    double theta = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < config.max_outer; ++it) {
        ScalarField frozen(spec.grid, 0.0);
        for (int node : g.interior()) {
            double gx, gy;
            fd::centered_gradient(v, node, gx, gy);
            const double Q = spec.M.quad(node, gx, gy);
            frozen[node] = -s * (spec.mu_at(node) * spec.beta(trunc(v[node])) *
                                     fd::quad_power(Q, spec.m_growth) +
                                 spec.lambda * spec.c[node] * trunc(v[node])) -
                           mod.h[node];
        }
        ScalarField w = solve_frozen(spec, frozen, zero_bc, config);
        ScalarField next = v;
        for (int node : g.interior())
            next[node] = (1.0 - theta) * v[node] + theta * w[node];
        double diff = sup_norm(next - v);
        v = next;
        if (diff > prev && theta > 0.125) theta *= 0.5;
        prev = diff;
        if (diff <= config.tol) break;
    }
    if (min_value(v) <= -level)
        throw std::runtime_error(
            "strict_subsolution_builder: iterate hit the truncation level; raise it");

    StrictSubsolution out;
    out.v = v;
    out.truncation_level = level;
    out.gradient_bound = A;
    out.cls = classify(spec, v, 100.0 * config.tol);
    out.min_gap_to_super = std::numeric_limits<double>::infinity();
    for (int n = 0; n < v.size(); ++n)
        out.min_gap_to_super = std::min(out.min_gap_to_super, gamma[n] - v[n]);
    return out;
}

/// Numerical verification of the full multiplicity picture on a computed
/// branch: ordering chain u0 << u1 << u2 at sampled lambdas, monotone lower
/// branch, branch limits as lambda -> 0, and multi-start nonexistence above
/// the fold.
struct MultiplicityReport {
    double lambda_bar = 0.0;
    struct ChainSample {
        double lambda = 0.0;
        double eps01 = 0.0, eps12 = 0.0;
        double sup1 = 0.0, sup2 = 0.0;
        bool ok = false;
    };
    std::vector<ChainSample> chain;
    bool chain_ok = false;
    bool lower_monotone = false;
    std::vector<double> approach_lambdas;
    std::vector<double> approach_gaps; // sup(u1 - u0)
    bool approach_ok = false;
    double final_gap = 0.0;
    bool upper_grows = false;
    std::vector<MultiStartOutcome> nonexistence;
    bool nonexistence_ok = false;
    std::string protocol_version;
    std::vector<std::string> failures;

    bool pass() const {
        return chain_ok && lower_monotone && approach_ok && upper_grows && nonexistence_ok;
    }
};

inline MultiplicityReport verify_multiplicity_picture(const ProblemSpec& spec, const Branch& br,
                                        const ScalarField& u0, const EigenPair& pair,
                                        const MultiStartProtocol& protocol = {},
                                        const SolverConfig& config = {},
                                        double chain_eps_floor = 1e-6,
                                        double approach_target = 1e-4) {
    MultiplicityReport rep;
    rep.protocol_version = protocol.version;
    if (!br.fold_index) {
        rep.failures.push_back("no fold on branch");
        return rep;
    }
    rep.lambda_bar = *br.lambda_bar;

    // Range covered by the upper sub-branch.
    double upper_min = rep.lambda_bar;
    for (std::size_t i = *br.fold_index; i < br.points.size(); ++i)
        upper_min = std::min(upper_min, br.points[i].lambda);

    // Five sampled lambdas, geometric from 0.75 lambda_bar toward 0, clamped
    // to the window both sub-branches cover.
    const double s_hi = 0.75 * rep.lambda_bar;
    const double s_lo = std::max(0.0625 * rep.lambda_bar, 1.03 * upper_min);
    std::vector<double> samples;
    for (int i = 0; i < 5; ++i)
        samples.push_back(s_hi * std::pow(s_lo / s_hi, i / 4.0));

    rep.chain_ok = true;
    std::vector<std::pair<double, ScalarField>> lower_samples;
    for (double lam : samples) {
        MultiplicityReport::ChainSample cs;
        cs.lambda = lam;
        auto s1 = solution_at_lambda(spec, br, lam, false, config);
        auto s2 = solution_at_lambda(spec, br, lam, true, config);
        if (!s1 || !s2) {
            rep.chain_ok = false;
            rep.failures.push_back("chain sample missing at lambda=" + std::to_string(lam));
            rep.chain.push_back(cs);
            continue;
        }
        cs.sup1 = s1->sup_u;
        cs.sup2 = s2->sup_u;
        const StrictOrder o01 = strictly_below(u0, s1->u, pair);
        const StrictOrder o12 = strictly_below(s1->u, s2->u, pair);
        cs.eps01 = o01.epsilon;
        cs.eps12 = o12.epsilon;
        cs.ok = o01.epsilon > chain_eps_floor && o12.epsilon > chain_eps_floor;
        if (!cs.ok) {
            rep.chain_ok = false;
            rep.failures.push_back("ordering chain failed at lambda=" + std::to_string(lam));
        }
        rep.chain.push_back(cs);
        lower_samples.emplace_back(lam, s1->u);
    }

    rep.lower_monotone = true;
    std::sort(lower_samples.begin(), lower_samples.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i + 1 < lower_samples.size(); ++i) {
        const StrictOrder o =
            strictly_below(lower_samples[i].second, lower_samples[i + 1].second, pair);
        if (!(o.epsilon > 0.0)) {
            rep.lower_monotone = false;
            rep.failures.push_back("lower branch not <<-monotone between lambda=" +
                                   std::to_string(lower_samples[i].first) + " and " +
                                   std::to_string(lower_samples[i + 1].first));
        }
    }

    // Lower-branch limit: sup(u1 - u0) decreases to below the target along a
    // geometric lambda sequence accumulating at 0.
    rep.approach_ok = true;
    {
        ScalarField prev_u = u0;
        double lam = 0.5 * rep.lambda_bar;
        double prev_gap = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 14 && lam > 1e-12; ++j, lam *= 0.5) {
            ProblemSpec cur = spec;
            cur.lambda = lam;
            auto s1 = solution_at_lambda(spec, br, lam, false, config);
            ScalarField seed = s1 ? s1->u : prev_u;
            SolveReport r = newton_solve(cur, seed, config);
            if (!r.converged) {
                rep.approach_ok = false;
                rep.failures.push_back("lower-branch solve failed at lambda=" +
                                       std::to_string(lam));
                break;
            }
            const double gap = sup_norm(r.u - u0);
            rep.approach_lambdas.push_back(lam);
            rep.approach_gaps.push_back(gap);
            if (gap > prev_gap + 1e-12) {
                rep.approach_ok = false;
                rep.failures.push_back("gap to the base solution not decreasing at lambda=" +
                                       std::to_string(lam));
            }
            prev_gap = gap;
            prev_u = r.u;
            if (gap < approach_target) break;
        }
        rep.final_gap = rep.approach_gaps.empty() ? 1e300 : rep.approach_gaps.back();
        if (rep.final_gap >= approach_target) {
            rep.approach_ok = false;
            rep.failures.push_back("gap to the base solution did not reach the target");
        }
    }

    // Upper branch grows as lambda decreases past the fold.
    {
        rep.upper_grows = true;
        double last_sup = 0.0, last_lam = rep.lambda_bar;
        bool have = false;
        for (std::size_t i = *br.fold_index; i < br.points.size(); ++i) {
            const BranchPoint& p = br.points[i];
            if (have && p.lambda < last_lam - 1e-12 && p.sup < last_sup - 1e-9) {
                rep.upper_grows = false;
                rep.failures.push_back("upper-branch sup-norm not increasing toward lambda=0");
                break;
            }
            last_sup = std::max(last_sup, p.sup);
            last_lam = p.lambda;
            have = true;
        }
    }

    rep.nonexistence_ok = true;
    for (double f : {1.1, 1.5}) {
        MultiStartOutcome out =
            multi_start_solve(spec, f * rep.lambda_bar, &u0, &pair, protocol, config);
        if (out.nonnegative_found > 0) {
            rep.nonexistence_ok = false;
            rep.failures.push_back("nonnegative solution found at lambda=" +
                                   std::to_string(f * rep.lambda_bar));
        }
        rep.nonexistence.push_back(std::move(out));
    }
    return rep;
}

/// Branch CSV: index, lambda, sup_norm, min_value, newton_iters,
/// tangent_dlambda, fold_flag.
inline void write_branch_csv(const Branch& br, std::ostream& os) {
    os << "index,lambda,sup_norm,min_value,newton_iters,tangent_dlambda,fold_flag\n";
    for (std::size_t i = 0; i < br.points.size(); ++i) {
        const BranchPoint& p = br.points[i];
        os << i << ',' << detail::fmt17(p.lambda) << ',' << detail::fmt17(p.sup) << ','
           << detail::fmt17(p.min_value) << ',' << p.newton_iters << ','
           << detail::fmt17(p.tangent_dlambda) << ',' << (p.fold_flag ? 1 : 0) << '\n';
    }
}

} // namespace qg
