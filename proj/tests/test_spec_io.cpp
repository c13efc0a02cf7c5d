#include <catch2/catch_amalgamated.hpp>

#include "qglab/spec_io.hpp"

using namespace qg;
using nlohmann::json;

TEST_CASE("problem spec parsing") {
    const json j = json::parse(R"json({
      "grid": {"dim": 1, "counts": [33], "extents": [[0.0, 1.0]]},
      "sign": "+",
      "pucci": {"lam": 1.0, "Lam": 2.0},
      "b": "1 + x", "c": 1.0, "h": "sin(pi*x)",
      "mu": 0.1, "k": 1,
      "m_growth": 2.0, "p": 3.0, "q": "inf", "q1": 3.0,
      "lambda": 0.5, "stencil_frames": 1
    })json");
    const ProblemSpec spec = spec_io::parse_spec(j);
    CHECK(spec.grid->nx() == 33);
    CHECK(spec.pucci.Lam == 2.0);
    CHECK(spec.b[16] == Catch::Approx(1.5));
    CHECK(spec.h[16] == Catch::Approx(1.0));
    CHECK(std::isinf(spec.q));
    CHECK(spec.lambda == 0.5);
}

TEST_CASE("spec errors carry the offending key") {
    auto expect_key = [](const std::string& text, const std::string& key) {
        try {
            spec_io::parse_spec(json::parse(text));
            FAIL("expected SpecError");
        } catch (const SpecError& e) {
            CHECK(e.key == key);
        }
    };
    const std::string g9 = R"json("grid": {"dim": 1, "counts": [9], "extents": [[0,1]]})json";
    expect_key(R"json({"grid": {"dim": 1, "counts": [2], "extents": [[0,1]]}})json", "grid");
    expect_key(R"json({"grid": {"dim": 1, "counts": [9]}})json", "grid.extents");
    expect_key("{" + g9 + R"json(, "h": "frob(x)"})json", "h");
    expect_key("{" + g9 + R"json(, "sign": "?"})json", "sign");
    expect_key("{" + g9 + R"json(, "k": 2})json", "<spec>");
    expect_key("{" + g9 + R"json(, "b": "-1"})json", "<spec>");
}

TEST_CASE("matrix entries with bounds") {
    const json j = json::parse(R"json({
      "grid": {"dim": 2, "counts": [5, 5], "extents": [[0,1],[0,1]]},
      "matrix": {"mu1": 0.5, "mu2": 2.5, "entries": ["2", "0.25", "1"]},
      "p": 4.0, "q": 4.0, "q1": 4.0
    })json");
    const ProblemSpec spec = spec_io::parse_spec(j);
    CHECK(spec.M.mu2() == 2.5);
    CHECK(spec.M.quad(12, 1.0, 0.0) == Catch::Approx(2.0));
}

TEST_CASE("csv-backed coefficient fields") {
    auto g = Grid::interval(9, 0.0, 1.0);
    auto f = ScalarField::from_function(g, [](double x, double) { return x * x; });
    const std::string path = "/tmp/qglab_spec_io_field.csv";
    write_csv(f, path);
    json j = json::parse(R"json({
      "grid": {"dim": 1, "counts": [9], "extents": [[0.0, 1.0]]},
      "p": 3.0, "q": 3.0, "q1": 3.0
    })json");
    j["h"] = {{"csv", path}};
    const ProblemSpec spec = spec_io::parse_spec(j);
    for (int n = 0; n < spec.h.size(); ++n) CHECK(spec.h[n] == f[n]);
}
