// Command-line driver: reproducible experiments over the solver, transform
// checks, qualitative estimates, eigenproblem, and continuation.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "qglab/continuation.hpp"
#include "qglab/spec_io.hpp"
#include "qglab/transform_checks.hpp"
#include "qglab/transform_reports.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoConvergence = 2;
constexpr int kExitCheckViolation = 3;
constexpr int kExitBadInput = 4;

struct CommonOpts {
    std::string spec_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int refine = 1;
    double tol = 1e-9;
    int max_iter = 400;
    double theta = 0.5;
    double lambda_max = 0.0;
    std::string protocol = "msp-1";
};

qg::SolverConfig solver_config(const CommonOpts& o) {
    qg::SolverConfig c;
    c.tol = o.tol;
    c.max_outer = o.max_iter;
    c.theta = o.theta;
    return c;
}

void write_json(const ordered_json& j, const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << j.dump(2) << "\n";
}

ordered_json solve_report_json(const qg::SolveReport& rep) {
    ordered_json j;
    j["method"] = rep.method;
    j["converged"] = rep.converged;
    j["iterations"] = rep.iterations;
    j["final_residual"] = rep.final_residual;
    j["sup_u"] = rep.sup_u;
    j["max_iterate_sup"] = rep.max_iterate_sup;
    j["w2p_surrogate"] = rep.w2p_surrogate;
    j["residual_history"] = rep.residual_history;
    if (!rep.failure.empty()) j["failure"] = rep.failure;
    return j;
}

ordered_json smallness_json(const qg::SmallnessReport& s) {
    ordered_json j;
    j["eps1"] = s.eps1;
    j["constants"] = {{"C1", s.C1}, {"Ctilde", s.Ctilde}, {"D", s.D}};
    j["constants_note"] = "probe-set surrogates, not functional-analytic constants";
    j["coeff_condition"] = {{"lhs", s.coeff_lhs}, {"rhs", s.coeff_rhs}, {"ok", s.coeff_ok}};
    j["data_condition"] = {{"lhs", s.data_lhs}, {"rhs", s.data_rhs}, {"ok", s.data_ok}};
    j["data_norm"] = s.data_norm;
    j["predicted_radius"] = s.radius;
    j["pass"] = s.pass();
    return j;
}

qg::ProblemSpec refine_spec(const qg::ProblemSpec& spec) {
    // node counts n -> 2n-1 nest the grids; coefficient fields are resampled
    // by injection on shared nodes and midpoint averages between them
    qg::GridPtr fine = spec.grid->refined();
    qg::ProblemSpec out = spec;
    out.grid = fine;
    auto lift = [&](const qg::ScalarField& f) {
        qg::ScalarField g(fine, 0.0);
        const int nx = spec.grid->nx();
        for (int node = 0; node < fine->node_count(); ++node) {
            const int i = fine->ix(node), jj = fine->iy(node);
            auto coarse = [&](int ci, int cj) { return f[spec.grid->index(ci, cj)]; };
            const bool ei = i % 2 == 0, ej = jj % 2 == 0;
            if (ei && ej)
                g[node] = coarse(i / 2, jj / 2);
            else if (!ei && ej)
                g[node] = 0.5 * (coarse(i / 2, jj / 2) + coarse(i / 2 + 1, jj / 2));
            else if (ei && !ej)
                g[node] = 0.5 * (coarse(i / 2, jj / 2) + coarse(i / 2, jj / 2 + 1));
            else
                g[node] = 0.25 * (coarse(i / 2, jj / 2) + coarse(i / 2 + 1, jj / 2) +
                                  coarse(i / 2, jj / 2 + 1) + coarse(i / 2 + 1, jj / 2 + 1));
        }
        return g;
    };
    out.b = lift(spec.b);
    out.c = lift(spec.c);
    out.h = lift(spec.h);
    out.dirichlet = lift(spec.dirichlet);
    if (spec.mu_field) out.mu_field = lift(*spec.mu_field);
    if (spec.M.mu1() != spec.M.mu2())
        throw std::invalid_argument("refine: varying matrix fields are not resampled");
    out.M = qg::MatrixField::scaled_identity(fine, spec.M.mu1());
    return out;
}

int cmd_solve(const CommonOpts& o) {
    qg::ProblemSpec spec = qg::spec_io::load_spec(o.spec_path);
    const qg::SolverConfig cfg = solver_config(o);
    ordered_json levels = ordered_json::array();
    qg::SolveReport rep;
    std::optional<qg::ScalarField> prev;
    for (int level = 0; level < std::max(1, o.refine); ++level) {
        if (level > 0) spec = refine_spec(spec);
        rep = qg::picard_solve(spec, cfg);
        if (!rep.converged) {
            qg::SolveReport nrep = qg::newton_solve(spec, rep.u, cfg);
            if (nrep.converged) rep = std::move(nrep);
        }
        ordered_json lvl = solve_report_json(rep);
        lvl["nodes"] = spec.grid->node_count();
        if (prev) {
            // coarse nodes are shared with the fine grid: node (i,j) -> (2i,2j)
            double diff = 0.0;
            const qg::Grid& cg = *prev->grid();
            for (int node = 0; node < cg.node_count(); ++node) {
                const int fnode = spec.grid->index(2 * cg.ix(node), 2 * cg.iy(node));
                diff = std::max(diff, std::abs((*prev)[node] - rep.u[fnode]));
            }
            lvl["sup_diff_to_previous_level"] = diff;
        }
        levels.push_back(lvl);
        prev = rep.u;
        if (!rep.converged) break;
    }
    const auto plan = qg::resolve_exponents(spec.grid->dim(), spec.p, spec.q, spec.q1,
                                            spec.m_growth);
    const auto cst = qg::estimate_constants(spec.grid, spec.pucci, spec.b, spec.p,
                                            std::isinf(plan.r) ? 2.0 * spec.p : plan.r, o.seed);
    ordered_json j;
    j["spec"] = o.spec_path;
    j["seed"] = o.seed;
    j["solve"] = levels.back();
    if (levels.size() > 1) j["levels"] = levels;
    j["smallness"] = smallness_json(qg::smallness_check(spec, cst));
    write_json(j, fs::path(o.out_dir) / "solve_report.json");
    qg::write_csv(rep.u, (fs::path(o.out_dir) / "solution.csv").string());
    return rep.converged ? kExitOk : kExitNoConvergence;
}

int cmd_transform_check(const CommonOpts& o) {
    const qg::ProblemSpec spec = qg::spec_io::load_spec(o.spec_path);
    const int levels = std::max(2, o.refine);
    std::vector<double> ms;
    if (spec.mu > 0.0) {
        ms.push_back(spec.mu / spec.pucci.Lam);
        if (spec.pucci.lam != spec.pucci.Lam) ms.push_back(spec.mu / spec.pucci.lam);
    } else {
        ms.push_back(1.0);
    }
    const std::vector<qg::FieldFn> fields = {
        [](double x, double) { return x * (1.0 - x); },
        [](double x, double) { return std::sin(2.0 * 3.14159265358979323846 * x); },
        [](double x, double y) { return 0.5 * std::sin(3.0 * x) + 0.1 * y; },
    };
    bool ok = true;
    ordered_json j;
    j["spec"] = o.spec_path;
    j["k"] = spec.k;
    ordered_json runs = ordered_json::array();
    for (double m : ms) {
        const qg::Transform t = qg::Transform::power(m, spec.k);
        ordered_json r;
        r["m"] = m;
        const double cb_closed = qg::c_beta(m, spec.k);
        const double cb_quad = qg::c_beta_quadrature(m, spec.k);
        r["c_beta"] = {{"closed_form", cb_closed},
                       {"quadrature", cb_quad},
                       {"agree", std::abs(cb_closed - cb_quad) <= 1e-8}};
        ok = ok && std::abs(cb_closed - cb_quad) <= 1e-8;
        {
            double worst = 0.0;
            for (double u : {0.25, 1.0, 2.5, -1.5})
                worst = std::max(worst, std::abs(t.psi_inv(t.psi(u)) - u));
            r["round_trip_error"] = worst;
            ok = ok && worst <= 1e-8;
        }
        {
            double worst = 0.0;
            for (double v : {0.5, 1.0, 3.0})
                worst = std::max(worst, std::abs(t.g(v) - t.g_quadrature(v)));
            r["g_two_way_error"] = worst;
            ok = ok && worst <= 1e-8;
        }
        ordered_json idents = ordered_json::array();
        for (const auto& fn : fields) {
            const auto li = qg::verify_laplacian_identity(fn, spec.grid, levels, t);
            const auto sw = qg::verify_sandwich(fn, spec.grid, levels, t, spec.pucci);
            ordered_json e;
            e["identity_defects"] = li.defect;
            e["identity_order"] = li.min_order();
            e["sandwich_violations"] = sw.violation;
            e["sandwich_slack_linear"] = sw.slack_linear();
            const bool pass = li.min_order() >= 1.8 && sw.slack_linear();
            e["pass"] = pass;
            ok = ok && pass;
            idents.push_back(e);
        }
        r["identities"] = idents;
        const auto ar = qg::asymptotics_report(t);
        r["asymptotics"] = {{"v", ar.v},
                            {"ratio_a", ar.ratio_a},
                            {"ratio_inv", ar.ratio_inv},
                            {"ratio_tail", ar.ratio_tail},
                            {"naive_a", ar.naive_a},
                            {"naive_inv", ar.naive_inv},
                            {"a_at_origin", ar.a_at_origin},
                            {"within_5pct", ar.within_band(0.05)}};
        ok = ok && ar.within_band(0.05) && std::abs(ar.a_at_origin - 1.0) < 0.02;
        const auto sr = qg::smp_hypothesis_check(t);
        r["smp_hypothesis"] = {{"s", sr.s},
                               {"quotient", sr.quotient},
                               {"ratio", sr.ratio},
                               {"f", sr.f},
                               {"quotient_decays", sr.quotient_decays()},
                               {"f_to_zero", sr.f_decays_to_zero()}};
        ok = ok && sr.quotient_decays() && sr.f_decays_to_zero();
        runs.push_back(r);
    }
    j["runs"] = runs;
    j["pass"] = ok;
    write_json(j, fs::path(o.out_dir) / "transform_report.json");
    return ok ? kExitOk : kExitCheckViolation;
}

int cmd_abp(const CommonOpts& o) {
    const qg::ProblemSpec spec = qg::spec_io::load_spec(o.spec_path);
    const qg::SolverConfig cfg = solver_config(o);
    qg::SolveReport rep = qg::picard_solve(spec, cfg);
    if (!rep.converged) return kExitNoConvergence;
    const qg::Classification cls = qg::classify(spec, rep.u, 10.0 * cfg.tol);
    const double fnorm = qg::f_plus_norm_on_positive_set(rep.u, spec.h, spec.p);
    const qg::AbpResult abp = qg::abp_check(rep.u, fnorm, qg::boundary_max(rep.u));
    ordered_json j;
    j["spec"] = o.spec_path;
    j["classification"] = qg::to_string(cls.verdict);
    j["f_plus_norm"] = abp.f_norm;
    j["interior_excess"] = abp.interior_excess;
    j["admissible_c"] = abp.admissible_c;
    j["hard_violation"] = abp.hard_violation;
    j["pass"] = abp.pass;
    write_json(j, fs::path(o.out_dir) / "abp_report.json");
    return abp.hard_violation ? kExitCheckViolation : kExitOk;
}

int cmd_compare(const CommonOpts& o) {
    const qg::ProblemSpec spec = qg::spec_io::load_spec(o.spec_path);
    const qg::SolverConfig cfg = solver_config(o);
    const double s = 0.25 * (1.0 + qg::sup_norm(spec.h));
    qg::ProblemSpec lo = spec, hi = spec;
    for (int n = 0; n < spec.h.size(); ++n) {
        lo.h[n] = spec.h[n] - s;
        hi.h[n] = spec.h[n] + s;
    }
    const qg::SolveReport ra = qg::picard_solve(lo, cfg);
    const qg::SolveReport ru = qg::picard_solve(hi, cfg);
    if (!ra.converged || !ru.converged) return kExitNoConvergence;
    const qg::ComparisonResult cmp =
        qg::comparison_check(spec, ra.u, ru.u, spec.M.mu2(), 1e-10, 10.0 * cfg.tol + 2.0 * s);
    ordered_json j;
    j["spec"] = o.spec_path;
    j["shift"] = s;
    j["mu2"] = spec.M.mu2();
    j["ordered"] = cmp.ordered;
    j["min_gap"] = cmp.min_gap;
    write_json(j, fs::path(o.out_dir) / "compare_report.json");
    return cmp.ordered ? kExitOk : kExitCheckViolation;
}

int cmd_sweep(const CommonOpts& o) {
    const qg::ProblemSpec spec = qg::spec_io::load_spec(o.spec_path);
    const qg::SolverConfig cfg = solver_config(o);
    const double lmax = o.lambda_max > 0.0 ? o.lambda_max : 1.0;
    auto lambda_grid = [&](int pts) {
        std::vector<double> l;
        for (int i = 0; i < pts; ++i) l.push_back(lmax * i / (pts - 1));
        return l;
    };
    const std::vector<double> shifts{0.0, 0.25, 0.5, 1.0};
    ordered_json j;
    j["spec"] = o.spec_path;
    j["lambda_max"] = lmax;
    double bound_coarse = 0.0;
    bool have = false;
    bool ok = true;
    for (int pts : {5, 9}) {
        std::vector<std::string> rejected;
        const auto probes =
            qg::supersolution_probes(spec, lambda_grid(pts), shifts, cfg, &rejected);
        const auto rep = qg::lower_bound_sweep(probes, lmax);
        ordered_json r;
        r["lambda_points"] = pts;
        r["lambdas"] = rep.lambdas;
        r["neg_part_sup"] = rep.stat;
        r["uniform_bound"] = rep.uniform_bound;
        r["probes"] = rep.probes;
        r["rejected"] = rejected;
        j[pts == 5 ? "coarse" : "fine"] = r;
        if (rep.probes == 0) return kExitNoConvergence;
        if (!have) {
            bound_coarse = rep.uniform_bound;
            have = true;
        } else {
            const double rel = std::abs(rep.uniform_bound - bound_coarse) /
                               std::max(1e-12, bound_coarse);
            j["bound_drift"] = rel;
            ok = rel <= 0.10;
        }
    }
    j["pass"] = ok;
    write_json(j, fs::path(o.out_dir) / "sweep_report.json");
    return ok ? kExitOk : kExitCheckViolation;
}

int cmd_eigen(const CommonOpts& o) {
    const qg::ProblemSpec spec = qg::spec_io::load_spec(o.spec_path);
    qg::EigenPair pair;
    try {
        pair = qg::principal_eigenpair(spec.grid, spec.c);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "eigen: " << ex.what() << "\n";
        return kExitBadInput;
    }
    ordered_json j;
    j["spec"] = o.spec_path;
    j["gamma1"] = pair.gamma1;
    j["residual_norm"] = pair.residual_norm;
    j["iterations"] = pair.iterations;
    write_json(j, fs::path(o.out_dir) / "eigen_report.json");
    qg::write_csv(pair.phi1, (fs::path(o.out_dir) / "eigen.csv").string());
    return kExitOk;
}

int cmd_bifurcate(const CommonOpts& o) {
    const qg::ProblemSpec spec = qg::spec_io::load_spec(o.spec_path);
    qg::ContinuationConfig cc;
    cc.solver = solver_config(o);
    cc.sup_guard = 40.0;
    const qg::SolveReport r0 = qg::solve_p0(spec, cc.solver);
    if (!r0.converged) return kExitNoConvergence;

    qg::EigenPair pair;
    bool have_pair = false;
    if (qg::sup_norm(spec.c) > 0.0 && qg::min_value(spec.c) >= 0.0) {
        pair = qg::principal_eigenpair(spec.grid, spec.c);
        have_pair = true;
    }
    const double lmax_guess =
        o.lambda_max > 0.0 ? o.lambda_max : (have_pair ? 2.0 * pair.gamma1 : 20.0);
    const double dl = 0.01 * lmax_guess;
    qg::Branch seed = qg::natural_sweep(spec, r0.u, {0.0, dl, 2.0 * dl}, cc);
    if (seed.points.size() < 2) return kExitNoConvergence;
    qg::Branch br = qg::arclength_continue(spec, seed, cc);

    ordered_json j;
    j["spec"] = o.spec_path;
    j["points"] = br.points.size();
    j["stop_reason"] = br.stop_reason;
    if (br.fold_index) {
        j["fold_index"] = *br.fold_index;
        j["lambda_bar"] = *br.lambda_bar;
        if (br.lambda_bar_refined) j["lambda_bar_refined"] = *br.lambda_bar_refined;
    } else {
        j["fold_index"] = nullptr;
        j["lambda_bar"] = nullptr;
    }
    int code = kExitOk;
    if (br.fold_index && have_pair) {
        qg::MultiStartProtocol protocol;
        protocol.version = o.protocol;
        const auto rep = qg::verify_multiplicity_picture(spec, br, r0.u, pair, protocol, cc.solver);
        ordered_json v;
        v["lambda_bar"] = rep.lambda_bar;
        v["chain_ok"] = rep.chain_ok;
        v["lower_monotone"] = rep.lower_monotone;
        v["approach_ok"] = rep.approach_ok;
        v["final_gap"] = rep.final_gap;
        v["upper_grows"] = rep.upper_grows;
        v["nonexistence_ok"] = rep.nonexistence_ok;
        v["protocol"] = rep.protocol_version;
        v["failures"] = rep.failures;
        v["pass"] = rep.pass();
        ordered_json chain = ordered_json::array();
        for (const auto& cs : rep.chain)
            chain.push_back({{"lambda", cs.lambda},
                             {"eps01", cs.eps01},
                             {"eps12", cs.eps12},
                             {"sup1", cs.sup1},
                             {"sup2", cs.sup2},
                             {"ok", cs.ok}});
        v["chain"] = chain;
        j["multiplicity_checks"] = v;
        if (!rep.pass()) code = kExitCheckViolation;
    }
    write_json(j, fs::path(o.out_dir) / "bifurcate_report.json");
    std::ofstream os(fs::path(o.out_dir) / "branch.csv");
    qg::write_branch_csv(br, os);
    return code;
}

int cmd_report(const CommonOpts& o) {
    const qg::ProblemSpec spec = qg::spec_io::load_spec(o.spec_path);
    const qg::SolverConfig cfg = solver_config(o);
    ordered_json j;
    j["spec"] = o.spec_path;
    j["seed"] = o.seed;
    qg::SolveReport rep = qg::picard_solve(spec, cfg);
    j["solve"] = solve_report_json(rep);
    const auto plan =
        qg::resolve_exponents(spec.grid->dim(), spec.p, spec.q, spec.q1, spec.m_growth);
    j["exponents"] = {{"case", plan.tag == qg::ExponentCase::case_i
                                   ? "i"
                                   : (plan.tag == qg::ExponentCase::case_ii ? "ii" : "iii")},
                      {"r", std::isinf(plan.r) ? ordered_json("inf") : ordered_json(plan.r)}};
    const auto cst = qg::estimate_constants(spec.grid, spec.pucci, spec.b, spec.p,
                                            std::isinf(plan.r) ? 2.0 * spec.p : plan.r, o.seed);
    j["smallness"] = smallness_json(qg::smallness_check(spec, cst));
    if (qg::sup_norm(spec.c) > 0.0 && qg::min_value(spec.c) >= 0.0) {
        const auto pair = qg::principal_eigenpair(spec.grid, spec.c);
        j["eigen"] = {{"gamma1", pair.gamma1}, {"residual_norm", pair.residual_norm}};
    }
    write_json(j, fs::path(o.out_dir) / "report.json");
    return rep.converged ? kExitOk : kExitNoConvergence;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qglab: numerical laboratory for elliptic problems with quadratic gradient "
                 "nonlinearities"};
    app.require_subcommand(1);

    CommonOpts o;
    const auto add_common = [&](CLI::App* sub, bool needs_spec = true) {
        if (needs_spec) sub->add_option("--spec,spec", o.spec_path, "problem spec JSON")->required();
        sub->add_option("--out", o.out_dir, "output directory");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--refine", o.refine, "refinement levels");
        sub->add_option("--tol", o.tol, "solver residual tolerance");
        sub->add_option("--max-iter", o.max_iter, "max outer iterations");
        sub->add_option("--theta", o.theta, "fixed-point damping");
        sub->add_option("--lambda-max", o.lambda_max, "parameter sweep upper bound");
        sub->add_option("--protocol", o.protocol, "multi-start protocol version");
    };

    add_common(app.add_subcommand("solve", "solve the problem and report"));
    add_common(app.add_subcommand("transform-check", "variable-change identity checks"));
    add_common(app.add_subcommand("abp", "maximum-bound check on a solved instance"));
    add_common(app.add_subcommand("compare", "ordered sub/supersolution pair check"));
    add_common(app.add_subcommand("sweep", "uniform lower-bound sweep over lambda"));
    add_common(app.add_subcommand("eigen", "principal weighted eigenpair"));
    add_common(app.add_subcommand("bifurcate", "continuation with fold detection"));
    add_common(app.add_subcommand("report", "aggregate report"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitBadInput;
    }

    try {
        fs::create_directories(o.out_dir);
        if (app.got_subcommand("solve")) return cmd_solve(o);
        if (app.got_subcommand("transform-check")) return cmd_transform_check(o);
        if (app.got_subcommand("abp")) return cmd_abp(o);
        if (app.got_subcommand("compare")) return cmd_compare(o);
        if (app.got_subcommand("sweep")) return cmd_sweep(o);
        if (app.got_subcommand("eigen")) return cmd_eigen(o);
        if (app.got_subcommand("bifurcate")) return cmd_bifurcate(o);
        if (app.got_subcommand("report")) return cmd_report(o);
    } catch (const qg::SpecError& e) {
        std::cerr << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    }
    return kExitBadInput;
}
