#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qglab/spectral.hpp"

using namespace qg;

TEST_CASE("principal eigenpair of the weighted problem") {
    SECTION("classical pair on the unit interval") {
        std::vector<double> errs;
        for (int n : {33, 65, 129, 257}) {
            auto g = Grid::interval(n, 0.0, 1.0);
            auto pair = principal_eigenpair(g, ScalarField(g, 1.0));
            errs.push_back(std::abs(pair.gamma1 - oracle::kPi * oracle::kPi));
            if (n == 257) {
                CHECK(errs.back() <= 0.005 * oracle::kPi * oracle::kPi);
                // eigenvector close to sin(pi x), normalized to sup 1
                for (int node : g->interior())
                    CHECK(pair.phi1[node] ==
                          Catch::Approx(std::sin(oracle::kPi * g->x(node))).margin(5e-4));
            }
            CHECK(pair.residual_norm <= 1e-7 * pair.gamma1);
            CHECK(boundary_max(pair.phi1) == 0.0);
            CHECK(interior_min(pair.phi1) > 0.0);
            CHECK(sup_norm(pair.phi1) == Catch::Approx(1.0));
        }
        CHECK(oracle::order(errs[0], errs[1]) >= 1.8);
        CHECK(oracle::order(errs[1], errs[2]) >= 1.8);
    }
    SECTION("weight scaling") {
        auto g = Grid::interval(65, 0.0, 1.0);
        auto p1 = principal_eigenpair(g, ScalarField(g, 1.0));
        auto p4 = principal_eigenpair(g, ScalarField(g, 4.0));
        CHECK(p4.gamma1 == Catch::Approx(p1.gamma1 / 4.0).epsilon(1e-10));
    }
    SECTION("indicator weight against the dense oracle") {
        auto g = Grid::interval(33, 0.0, 1.0);
        auto c = ScalarField::from_function(
            g, [](double x, double) { return x < 0.5 ? 1.0 : 0.0; });
        auto pair = principal_eigenpair(g, c);
        const double dense = oracle::dense_principal_eigenvalue(g, c);
        CHECK(std::abs(pair.gamma1 - dense) <= 1e-6);
        CHECK(pair.gamma1 > oracle::kPi * oracle::kPi); // smaller weight, larger eigenvalue
    }
    SECTION("Rayleigh quotient consistency") {
        auto g = Grid::interval(49, 0.0, 1.0);
        auto c = ScalarField::from_function(g, [](double x, double) { return 1.0 + x; });
        auto pair = principal_eigenpair(g, c);
        double num = 0.0, den = 0.0;
        const auto lap = [&](int node) {
            const double h = g->spacing(0);
            return -(pair.phi1[node + 1] - 2.0 * pair.phi1[node] + pair.phi1[node - 1]) /
                   (h * h);
        };
        for (int node : g->interior()) {
            num += pair.phi1[node] * lap(node);
            den += pair.phi1[node] * c[node] * pair.phi1[node];
        }
        CHECK(num / den == Catch::Approx(pair.gamma1).epsilon(1e-9));
    }
    SECTION("eigenvalue decreases when the weight increases pointwise") {
        auto g = Grid::interval(65, 0.0, 1.0);
        auto small = ScalarField(g, 1.0);
        auto big = ScalarField::from_function(
            g, [](double x, double) { return 1.0 + (x > 0.3 && x < 0.7 ? 2.0 : 0.0); });
        CHECK(principal_eigenpair(g, big).gamma1 < principal_eigenpair(g, small).gamma1);
    }
    SECTION("degenerate weights are rejected") {
        auto g = Grid::interval(17, 0.0, 1.0);
        CHECK_THROWS_AS(principal_eigenpair(g, ScalarField(g, 0.0)), std::invalid_argument);
        CHECK_THROWS_AS(principal_eigenpair(g, ScalarField(g, -1.0)), std::invalid_argument);
    }
}

TEST_CASE("strong ordering built on the eigenfunction") {
    auto g = Grid::interval(257, 0.0, 1.0);
    auto pair = principal_eigenpair(g, ScalarField(g, 1.0));
    SECTION("equal fields are not strictly ordered") {
        auto u = ScalarField::from_function(g, [](double x, double) { return x * (1 - x); });
        auto r = strictly_below(u, u, pair);
        CHECK(!r.holds);
        CHECK(r.epsilon == 0.0);
    }
    SECTION("adding the eigenfunction gives exactly epsilon 1") {
        ScalarField u(g, 0.0);
        auto r = strictly_below(u, u + pair.phi1, pair);
        CHECK(r.holds);
        CHECK(r.epsilon == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("parabola against the sine profile") {
        ScalarField u(g, 0.0);
        auto v = ScalarField::from_function(g, [](double x, double) { return x * (1 - x); });
        auto r = strictly_below(u, v, pair);
        CHECK(r.holds);
        // the ratio x(1-x)/sin(pi x) decreases from 1/pi at the endpoints to
        // its minimum 1/4 at the center
        CHECK(r.epsilon == Catch::Approx(0.25).epsilon(0.01));
        double endpoint_ratio = (v[1] - u[1]) / pair.phi1[1];
        CHECK(endpoint_ratio == Catch::Approx(1.0 / oracle::kPi).epsilon(0.02));
    }
    SECTION("invariance under a common shift") {
        auto w = ScalarField::from_function(g, [](double x, double) { return std::sin(2 * x); });
        ScalarField u(g, 0.0);
        auto v = 0.5 * pair.phi1;
        auto r0 = strictly_below(u, v, pair);
        auto r1 = strictly_below(u + w, v + w, pair);
        CHECK(r0.epsilon == Catch::Approx(r1.epsilon).margin(1e-11));
    }
    SECTION("boundary mismatch is an error") {
        ScalarField u(g, 0.0), v(g, 0.0);
        v[0] = 0.1;
        CHECK_THROWS_AS(strictly_below(u, v, pair), std::invalid_argument);
    }
}

TEST_CASE("indicator weight sits between the full- and half-domain eigenvalues") {
    auto g = Grid::interval(129, 0.0, 1.0);
    auto c = ScalarField::from_function(g, [](double x, double) { return x < 0.5 ? 1.0 : 0.0; });
    const double gamma = principal_eigenpair(g, c).gamma1;
    CHECK(gamma > oracle::kPi * oracle::kPi);
    CHECK(gamma < 4.0 * oracle::kPi * oracle::kPi); // half-interval Dirichlet value
}
