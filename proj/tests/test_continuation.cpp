#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qglab/continuation.hpp"

using namespace qg;

namespace {
ProblemSpec model_spec(GridPtr g, double mu) {
    auto spec = ProblemSpec::laplacian(g);
    spec.c = ScalarField(g, 1.0);
    spec.h = ScalarField(g, 1.0);
    spec.mu = mu;
    spec.k = 1;
    return spec;
}
} // namespace

TEST_CASE("base-problem solve") {
    auto g = Grid::interval(49, 0.0, 1.0);
    SECTION("zero source gives the zero solution") {
        auto rep = solve_p0(model_spec(g, 0.05));
        REQUIRE(rep.converged);
        auto spec0 = model_spec(g, 0.05);
        spec0.h = ScalarField(g, 0.0);
        auto rep0 = solve_p0(spec0);
        REQUIRE(rep0.converged);
        CHECK(sup_norm(rep0.u) == 0.0);
    }
    SECTION("explicit parabola without the gradient term") {
        auto spec = model_spec(g, 0.0);
        spec.h = ScalarField(g, 2.0); // -u'' = 2
        auto rep = solve_p0(spec);
        REQUIRE(rep.converged);
        auto exact = ScalarField::from_function(g, [](double x, double) { return x * (1 - x); });
        CHECK(sup_norm(rep.u - exact) <= 1e-12);
    }
    SECTION("small quadratic term is a small perturbation of the linear solve") {
        auto spec = model_spec(g, 0.01);
        spec.h = ScalarField(g, 0.5);
        auto rep = solve_p0(spec);
        REQUIRE(rep.converged);
        CHECK(interior_min(rep.u) > 0.0);
        auto lin = spec;
        lin.mu = 0.0;
        auto rl = solve_p0(lin);
        REQUIRE(rl.converged);
        const double hn = sup_norm(spec.h);
        CHECK(sup_norm(rep.u - rl.u) <= 0.05 * spec.mu * hn * hn + 1e-9);
    }
}

TEST_CASE("natural sweep on the linear problem follows the closed form") {
    auto g = Grid::interval(129, 0.0, 1.0);
    auto spec = model_spec(g, 0.0);
    auto r0 = solve_p0(spec);
    REQUIRE(r0.converged);
    ContinuationConfig cc;
    cc.sup_guard = 30.0;
    std::vector<double> grid;
    for (double l = 0.0; l <= 9.0; l += 0.5) grid.push_back(l);
    auto pair = principal_eigenpair(g, spec.c);
    Branch br = natural_sweep(spec, r0.u, grid, cc, &pair);
    REQUIRE(br.points.size() >= 17); // reaches at least lambda = 8
    for (const auto& p : br.points) {
        if (p.lambda == 0.0) continue;
        CHECK(p.sup == Catch::Approx(oracle::linear_branch_sup(p.lambda)).epsilon(5e-3));
    }
    CHECK(!br.fold_index.has_value());
    // divergence near the principal eigenvalue ends the sweep
    CHECK((br.stop_reason == "divergence_guard" || br.stop_reason == "corrector_failed" ||
           br.stop_reason == "grid_exhausted"));
}

TEST_CASE("arclength continuation through the fold on a coarse model") {
    auto g = Grid::interval(41, 0.0, 1.0);
    auto spec = model_spec(g, 0.05);
    auto r0 = solve_p0(spec);
    REQUIRE(r0.converged);
    ContinuationConfig cc;
    cc.sup_guard = 40.0;
    cc.ds0 = 0.02;
    Branch seed = natural_sweep(spec, r0.u, {0.0, 0.1, 0.2}, cc);
    REQUIRE(seed.points.size() == 3);
    Branch br = arclength_continue(spec, seed, cc);
    REQUIRE(br.fold_index.has_value());
    const double lbar = *br.lambda_bar;
    CHECK(lbar > 0.0);
    CHECK(lbar < oracle::kPi * oracle::kPi); // no nonnegative solutions past gamma_1
    CHECK(br.points[*br.fold_index].fold_flag);
    SECTION("upper-branch points dominate lower-branch points at equal lambda") {
        auto lo = solution_at_lambda(spec, br, 0.5 * lbar, false);
        auto hi = solution_at_lambda(spec, br, 0.5 * lbar, true);
        REQUIRE(lo.has_value());
        REQUIRE(hi.has_value());
        CHECK(hi->sup_u > lo->sup_u);
    }
    SECTION("branch residuals stay within tolerance") {
        ProblemSpec cur = spec;
        for (size_t i = 0; i < br.points.size(); i += 7) {
            cur.lambda = br.points[i].lambda;
            CHECK(residual_sup(cur, br.points[i].u) <= 10.0 * cc.solver.tol);
        }
    }
}

TEST_CASE("no fold is reported on the linear problem") {
    auto g = Grid::interval(65, 0.0, 1.0);
    auto spec = model_spec(g, 0.0);
    auto r0 = solve_p0(spec);
    REQUIRE(r0.converged);
    ContinuationConfig cc;
    cc.sup_guard = 25.0;
    Branch seed = natural_sweep(spec, r0.u, {0.0, 0.1, 0.2}, cc);
    Branch br = arclength_continue(spec, seed, cc);
    CHECK(!br.fold_index.has_value());
    CHECK(br.stop_reason == "divergence_guard");
}

TEST_CASE("strict subsolution builder") {
    auto g = Grid::interval(49, 0.0, 1.0);
    SECTION("linear case: output sits below the exact solution") {
        auto spec = model_spec(g, 0.0);
        spec.lambda = 0.0;
        spec.h = ScalarField(g, 2.0);
        auto rep = picard_solve(spec);
        REQUIRE(rep.converged);
        auto out = strict_subsolution_builder(spec, rep.u);
        CHECK(out.cls.is_sub);
        CHECK(out.cls.verdict == Verdict::subsolution);
        CHECK(out.min_gap_to_super >= 0.0);
        CHECK(boundary_max(out.v) == 0.0);
        CHECK(out.cls.residual_max <= -0.9); // strict margin from the source drop
    }
    SECTION("model case with quadratic term") {
        auto spec = model_spec(g, 0.05);
        spec.lambda = 0.4;
        auto rep = picard_solve(spec);
        REQUIRE(rep.converged);
        auto out = strict_subsolution_builder(spec, rep.u);
        CHECK(out.cls.is_sub);
        CHECK(out.min_gap_to_super >= -1e-12);
        CHECK(out.truncation_level > 0.0);
    }
    SECTION("truncation level below the supersolution bound is rejected") {
        auto spec = model_spec(g, 0.0);
        spec.h = ScalarField::from_function(g, [](double x, double) { return -2.0 + x; });
        auto rep = picard_solve(spec);
        REQUIRE(rep.converged);
        CHECK(neg_part_sup(rep.u) > 0.0);
        CHECK_THROWS_AS(
            strict_subsolution_builder(spec, rep.u, SolverConfig{}, 0.5 * neg_part_sup(rep.u)),
            std::invalid_argument);
    }
    SECTION("a non-supersolution input is rejected") {
        auto spec = model_spec(g, 0.0);
        ScalarField junk(g, 0.0);
        for (int n : g->interior()) junk[n] = -1.0;
        CHECK_THROWS_AS(strict_subsolution_builder(spec, junk), std::invalid_argument);
    }
}

TEST_CASE("shift probe: the quadratic term is what breaks solvability") {
    auto g = Grid::interval(33, 0.0, 1.0);
    MultiStartProtocol protocol;
    SolverConfig cfg;
    auto pair = principal_eigenpair(g, ScalarField(g, 1.0));
    SECTION("linear problem is solvable for every shift") {
        auto spec = model_spec(g, 0.0);
        auto r0 = solve_p0(spec);
        REQUIRE(r0.converged);
        auto rep = nonexistence_shift_probe(spec, 1.0, {0.0, 2.0, 8.0, 32.0, 128.0}, &r0.u,
                                            &pair, protocol, cfg);
        for (int f : rep.found) CHECK(f == 1);
        CHECK(!rep.threshold.has_value());
    }
    SECTION("quadratic term produces a finite threshold") {
        auto spec = model_spec(g, 0.05);
        auto r0 = solve_p0(spec);
        REQUIRE(r0.converged);
        auto rep = nonexistence_shift_probe(spec, 1.0, {0.0, 5.0, 20.0, 80.0, 320.0, 1280.0},
                                            &r0.u, &pair, protocol, cfg);
        CHECK(rep.found.front() == 1); // base case reproduced
        CHECK(rep.threshold.has_value());
        CHECK(rep.failure_monotone);
    }
}
