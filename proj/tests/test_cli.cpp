#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("QGLAB_BIN");
    REQUIRE(b != nullptr);
    return b;
}

int run(const std::string& args) {
    const std::string cmd = bin() + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path sandbox() {
    const fs::path d = fs::temp_directory_path() / "qglab_cli_test";
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

const char* kLinearSpec = R"({
  "grid": {"dim": 1, "counts": [65], "extents": [[0.0, 1.0]]},
  "pucci": {"lam": 1.0, "Lam": 1.0},
  "b": 0.0, "c": 1.0, "h": 1.0,
  "mu": 0.0, "k": 1,
  "p": 3.0, "q": 3.0, "q1": 3.0,
  "lambda": 1.0
})";

} // namespace

TEST_CASE("cli basics") {
    const fs::path dir = sandbox();
    write(dir / "linear.json", kLinearSpec);

    SECTION("solve succeeds and writes artifacts") {
        const fs::path out = dir / "out_solve";
        CHECK(run("solve --spec " + (dir / "linear.json").string() + " --out " + out.string()) ==
              0);
        CHECK(fs::exists(out / "solution.csv"));
        CHECK(fs::exists(out / "solve_report.json"));
    }
    SECTION("unknown subcommand exits 4") { CHECK(run("frobnicate") == 4); }
    SECTION("missing spec file exits 4") {
        CHECK(run("solve --spec " + (dir / "nope.json").string()) == 4);
    }
    SECTION("malformed json exits 4") {
        write(dir / "broken.json", "{ not json");
        CHECK(run("solve --spec " + (dir / "broken.json").string()) == 4);
    }
    SECTION("bad key exits 4") {
        write(dir / "badkey.json", R"({"grid": {"dim": 1, "counts": [2], "extents": [[0,1]]}})");
        CHECK(run("solve --spec " + (dir / "badkey.json").string()) == 4);
    }
    SECTION("eigen requires a nontrivial weight") {
        write(dir / "noc.json",
              R"({"grid": {"dim": 1, "counts": [33], "extents": [[0,1]]}, "c": 0.0})");
        CHECK(run("eigen --spec " + (dir / "noc.json").string() + " --out " +
                  (dir / "out_noc").string()) == 4);
    }
    SECTION("eigen on the unit weight") {
        const fs::path out = dir / "out_eig";
        CHECK(run("eigen --spec " + (dir / "linear.json").string() + " --out " + out.string()) ==
              0);
        const std::string rep = slurp(out / "eigen_report.json");
        CHECK(rep.find("9.86") != std::string::npos); // gamma_1 near pi^2
    }
}

TEST_CASE("cli determinism: identical runs are byte-identical") {
    const fs::path dir = sandbox();
    write(dir / "det.json", kLinearSpec);
    const fs::path o1 = dir / "det1", o2 = dir / "det2";
    for (const auto& out : {o1, o2}) {
        REQUIRE(run("solve --spec " + (dir / "det.json").string() + " --out " + out.string() +
                    " --seed 7") == 0);
        REQUIRE(run("eigen --spec " + (dir / "det.json").string() + " --out " + out.string() +
                    " --seed 7") == 0);
    }
    CHECK(slurp(o1 / "solution.csv") == slurp(o2 / "solution.csv"));
    CHECK(slurp(o1 / "solve_report.json") == slurp(o2 / "solve_report.json"));
    CHECK(slurp(o1 / "eigen.csv") == slurp(o2 / "eigen.csv"));
    CHECK(slurp(o1 / "eigen_report.json") == slurp(o2 / "eigen_report.json"));
}

TEST_CASE("cli compare and abp") {
    const fs::path dir = sandbox();
    write(dir / "model.json", R"({
      "grid": {"dim": 1, "counts": [49], "extents": [[0.0, 1.0]]},
      "c": 1.0, "h": 1.0, "mu": 0.05, "k": 1,
      "p": 3.0, "q": 3.0, "q1": 3.0, "lambda": 0.3
    })");
    CHECK(run("compare --spec " + (dir / "model.json").string() + " --out " +
              (dir / "out_cmp").string()) == 0);
    CHECK(run("abp --spec " + (dir / "model.json").string() + " --out " +
              (dir / "out_abp").string()) == 0);
}

TEST_CASE("cli transform-check, sweep, report") {
    const fs::path dir = sandbox();
    write(dir / "tmodel.json", R"({
      "grid": {"dim": 1, "counts": [33], "extents": [[0.0, 1.0]]},
      "c": 1.0, "h": "1 - 4*x", "mu": 0.05, "k": 1,
      "p": 3.0, "q": 3.0, "q1": 3.0
    })");
    SECTION("transform-check emits a passing report") {
        const fs::path out = dir / "out_tc";
        CHECK(run("transform-check --spec " + (dir / "tmodel.json").string() + " --out " +
                  out.string() + " --refine 3") == 0);
        const std::string rep = slurp(out / "transform_report.json");
        CHECK(rep.find("\"pass\": true") != std::string::npos);
    }
    SECTION("sweep is stable under lambda-grid halving") {
        const fs::path out = dir / "out_sw";
        CHECK(run("sweep --spec " + (dir / "tmodel.json").string() + " --out " + out.string() +
                  " --lambda-max 1.0") == 0);
        CHECK(fs::exists(out / "sweep_report.json"));
    }
    SECTION("report aggregates") {
        const fs::path out = dir / "out_rep";
        CHECK(run("report --spec " + (dir / "tmodel.json").string() + " --out " +
                  out.string()) == 0);
        CHECK(fs::exists(out / "report.json"));
    }
}

TEST_CASE("cli bifurcate") {
    const fs::path dir = sandbox();
    SECTION("linear problem: clean exit, empty fold field") {
        write(dir / "blin.json", R"({
          "grid": {"dim": 1, "counts": [33], "extents": [[0.0, 1.0]]},
          "c": 1.0, "h": 1.0, "mu": 0.0, "k": 1,
          "p": 3.0, "q": 3.0, "q1": 3.0
        })");
        const fs::path out = dir / "out_blin";
        CHECK(run("bifurcate --spec " + (dir / "blin.json").string() + " --out " +
                  out.string()) == 0);
        const std::string rep = slurp(out / "bifurcate_report.json");
        CHECK(rep.find("\"lambda_bar\": null") != std::string::npos);
        CHECK(fs::exists(out / "branch.csv"));
    }
    SECTION("small-coefficient model: fold found, checks pass") {
        write(dir / "bmodel.json", R"({
          "grid": {"dim": 1, "counts": [49], "extents": [[0.0, 1.0]]},
          "c": 1.0, "h": 1.0, "mu": 0.002, "k": 1,
          "p": 3.0, "q": 3.0, "q1": 3.0
        })");
        const fs::path out = dir / "out_bm";
        CHECK(run("bifurcate --spec " + (dir / "bmodel.json").string() + " --out " +
                  out.string()) == 0);
        const std::string rep = slurp(out / "bifurcate_report.json");
        CHECK(rep.find("\"pass\": true") != std::string::npos);
        const std::string branch = slurp(out / "branch.csv");
        CHECK(branch.find(",1\n") != std::string::npos); // fold flag column set
    }
}
