#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "qglab/field.hpp"
#include "qglab/solver.hpp"

using namespace qg;

TEST_CASE("grid construction and index sets") {
    auto g = Grid::interval(5, 0.0, 1.0);
    CHECK(g->spacing(0) == Catch::Approx(0.25));
    CHECK(g->interior().size() == 3);
    CHECK(g->boundary().size() == 2);

    auto g2 = Grid::rectangle(4, 4, 0.0, 1.0, 0.0, 1.0);
    CHECK(g2->interior().size() == 4);
    CHECK(g2->boundary().size() == 12);
    CHECK(g2->node_count() == 16);

    // interior and boundary cover all nodes and are disjoint
    std::vector<int> seen(g2->node_count(), 0);
    for (int n : g2->interior()) ++seen[n];
    for (int n : g2->boundary()) ++seen[n];
    for (int s : seen) CHECK(s == 1);

    CHECK_THROWS_AS(Grid::interval(2, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid::interval(5, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid::interval(5, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("discrete norms") {
    auto g = Grid::interval(129, 0.0, 1.0);
    const double h = g->spacing(0);

    ScalarField one(g, 1.0);
    CHECK(std::abs(lp_norm(one, 3.0) - 1.0) <= 2.0 * h);
    ScalarField zero(g, 0.0);
    CHECK(sup_norm(zero) == 0.0);
    CHECK(lp_norm(zero, 2.0) == 0.0);
    CHECK(boundary_max(zero) == 0.0);

    auto id = ScalarField::from_function(g, [](double x, double) { return x; });
    CHECK(std::abs(lp_norm(id, 2.0) - 1.0 / std::sqrt(3.0)) <= 2.0 * h);

    CHECK_THROWS_AS(lp_norm(one, 0.5), std::invalid_argument);
    CHECK(lp_norm(id, std::numeric_limits<double>::infinity()) == sup_norm(id));
}

TEST_CASE("norm monotonicity and triangle inequality") {
    auto g = Grid::interval(33, 0.0, 2.0);
    Rng rng(11);
    ScalarField f(g), gfld(g);
    for (int n = 0; n < f.size(); ++n) {
        f[n] = rng.uniform(-1.0, 1.0);
        gfld[n] = f[n] + (f[n] >= 0 ? rng.uniform() : -rng.uniform());
    }
    for (double p : {1.0, 2.0, 5.0}) CHECK(lp_norm(f, p) <= lp_norm(gfld, p) + 1e-14);
    CHECK(sup_norm(f + gfld) <= sup_norm(f) + sup_norm(gfld) + 1e-14);
}

TEST_CASE("lp norm converges at first order or better under refinement") {
    auto smooth = [](double x, double) { return std::sin(3.0 * x) + 0.5 * x * x; };
    double exact = 0.0;
    {
        // very fine reference
        auto gf = Grid::interval(4097, 0.0, 1.0);
        exact = lp_norm(ScalarField::from_function(gf, smooth), 2.0);
    }
    std::vector<double> errs;
    for (int n : {33, 65, 129}) {
        auto g = Grid::interval(n, 0.0, 1.0);
        errs.push_back(std::abs(lp_norm(ScalarField::from_function(g, smooth), 2.0) - exact));
    }
    CHECK(errs[1] <= 0.6 * errs[0]);
    CHECK(errs[2] <= 0.6 * errs[1]);
}

TEST_CASE("matrix field bounds are validated") {
    auto g = Grid::rectangle(5, 5, 0.0, 1.0, 0.0, 1.0);
    std::vector<double> ent(3 * g->node_count());
    for (int n = 0; n < g->node_count(); ++n) {
        ent[3 * n + 0] = 2.0;
        ent[3 * n + 1] = 0.5;
        ent[3 * n + 2] = 1.0;
    }
    // eigenvalues of [[2, .5], [.5, 1]] are 1.5 +- sqrt(0.5)
    CHECK_THROWS_AS(MatrixField::from_entries(g, ent, 1.0, 2.0), std::invalid_argument);
    auto M = MatrixField::from_entries(g, ent, 0.7, 2.3);
    CHECK(M.quad(g->index(2, 2), 1.0, 1.0) == Catch::Approx(2.0 + 2.0 * 0.5 + 1.0));
    CHECK_THROWS_AS(MatrixField::scaled_identity(g, -1.0), std::invalid_argument);
}

TEST_CASE("csv round trip is exact and deterministic") {
    auto g = Grid::rectangle(4, 3, 0.0, 1.0, -1.0, 2.0);
    auto f = ScalarField::from_function(
        g, [](double x, double y) { return std::sin(x) * 1e-7 + y / 3.0; });
    std::ostringstream a, b;
    write_csv(f, a);
    write_csv(f, b);
    CHECK(a.str() == b.str());
    std::istringstream in(a.str());
    ScalarField back = read_csv(g, in);
    for (int n = 0; n < f.size(); ++n) CHECK(back[n] == f[n]);
}

TEST_CASE("field validation rejects non-finite values") {
    auto g = Grid::interval(5, 0.0, 1.0);
    std::vector<double> vals(5, 1.0);
    vals[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ScalarField(g, vals), std::invalid_argument);
}
