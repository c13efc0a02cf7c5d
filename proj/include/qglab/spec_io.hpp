#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "qglab/expr.hpp"
#include "qglab/operators.hpp"

namespace qg {

/// Malformed problem-spec input; key names the offending entry.
struct SpecError : std::runtime_error {
    std::string key;
    SpecError(std::string key_, const std::string& what)
        : std::runtime_error("spec error at '" + key_ + "': " + what), key(std::move(key_)) {}
};

namespace spec_io {

using nlohmann::json;

inline const json& require(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw SpecError(path.empty() ? key : path + "." + key, "missing entry");
    return *it;
}

inline double number(const json& j, const std::string& path) {
    if (j.is_string() && j.get<std::string>() == "inf")
        return std::numeric_limits<double>::infinity();
    if (!j.is_number()) throw SpecError(path, "expected a number");
    return j.get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback,
                        const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    return number(*it, path.empty() ? key : path + "." + key);
}

/// Coefficient field: a number (constant), an expression string, or
/// {"csv": path}.
inline ScalarField field(const json& j, GridPtr grid, const std::string& path) {
    try {
        if (j.is_number()) return ScalarField(grid, j.get<double>());
        if (j.is_string()) {
            const Expr e = Expr::parse(j.get<std::string>());
            return ScalarField::from_function(
                grid, [&e](double x, double y) { return e.eval(x, y); });
        }
        if (j.is_object() && j.contains("csv"))
            return read_csv(grid, j.at("csv").get<std::string>());
    } catch (const SpecError&) {
        throw;
    } catch (const std::exception& ex) {
        throw SpecError(path, ex.what());
    }
    throw SpecError(path, "expected a number, expression string, or {\"csv\": path}");
}

inline GridPtr parse_grid(const json& j) {
    const int dim = static_cast<int>(number(require(j, "dim", "grid"), "grid.dim"));
    const json& counts = require(j, "counts", "grid");
    const json& extents = require(j, "extents", "grid");
    if (!counts.is_array() || static_cast<int>(counts.size()) != dim)
        throw SpecError("grid.counts", "expected an array of length dim");
    if (!extents.is_array() || static_cast<int>(extents.size()) != dim)
        throw SpecError("grid.extents", "expected an array of [lo, hi] pairs, one per axis");
    std::array<int, 2> n{3, 1};
    std::array<std::array<double, 2>, 2> ext{{{0.0, 1.0}, {0.0, 1.0}}};
    for (int a = 0; a < dim; ++a) {
        n[a] = counts[a].get<int>();
        if (!extents[a].is_array() || extents[a].size() != 2)
            throw SpecError("grid.extents", "each extent must be [lo, hi]");
        ext[a] = {extents[a][0].get<double>(), extents[a][1].get<double>()};
    }
    try {
        return Grid::make(dim, n, ext);
    } catch (const std::exception& ex) {
        throw SpecError("grid", ex.what());
    }
}

inline ProblemSpec parse_spec(const json& j) {
    ProblemSpec spec;
    spec.grid = parse_grid(require(j, "grid", ""));
    if (j.contains("sign")) {
        const std::string s = j.at("sign").get<std::string>();
        if (s == "+")
            spec.sign = PucciSign::plus;
        else if (s == "-")
            spec.sign = PucciSign::minus;
        else
            throw SpecError("sign", "expected \"+\" or \"-\"");
    }
    if (j.contains("pucci")) {
        const json& p = j.at("pucci");
        spec.pucci.lam = number(require(p, "lam", "pucci"), "pucci.lam");
        spec.pucci.Lam = number(require(p, "Lam", "pucci"), "pucci.Lam");
    }
    spec.b = j.contains("b") ? field(j.at("b"), spec.grid, "b") : ScalarField(spec.grid, 0.0);
    spec.c = j.contains("c") ? field(j.at("c"), spec.grid, "c") : ScalarField(spec.grid, 0.0);
    spec.h = j.contains("h") ? field(j.at("h"), spec.grid, "h") : ScalarField(spec.grid, 0.0);
    spec.mu = number_or(j, "mu", 0.0, "");
    if (j.contains("mu_field")) spec.mu_field = field(j.at("mu_field"), spec.grid, "mu_field");
    if (j.contains("k")) {
        if (!j.at("k").is_number_integer()) throw SpecError("k", "expected an odd integer");
        spec.k = j.at("k").get<int>();
    }
    spec.beta_growth_c = number_or(j, "beta_growth_c", 1.0, "");
    double mscale = 1.0, mu1 = 1.0, mu2 = 1.0;
    if (j.contains("matrix")) {
        const json& m = j.at("matrix");
        mscale = number_or(m, "scale", 1.0, "matrix");
        mu1 = number_or(m, "mu1", mscale, "matrix");
        mu2 = number_or(m, "mu2", mscale, "matrix");
        if (m.contains("entries")) {
            const json& e = m.at("entries");
            const int per = spec.grid->dim() == 2 ? 3 : 1;
            if (!e.is_array() || static_cast<int>(e.size()) != per)
                throw SpecError("matrix.entries",
                                "expected " + std::to_string(per) + " expressions");
            std::vector<double> entries(static_cast<size_t>(per) * spec.grid->node_count());
            for (int c0 = 0; c0 < per; ++c0) {
                const ScalarField f =
                    field(e[c0], spec.grid, "matrix.entries[" + std::to_string(c0) + "]");
                for (int node = 0; node < spec.grid->node_count(); ++node)
                    entries[static_cast<size_t>(per) * node + c0] = f[node];
            }
            try {
                spec.M = MatrixField::from_entries(spec.grid, std::move(entries), mu1, mu2);
            } catch (const std::exception& ex) {
                throw SpecError("matrix.entries", ex.what());
            }
            mscale = 0.0; // entries already set
        }
    }
    if (spec.M.grid() == nullptr)
        spec.M = MatrixField::scaled_identity(spec.grid, mscale > 0.0 ? mscale : 1.0);
    spec.m_growth = number_or(j, "m_growth", 2.0, "");
    const double n = spec.grid->dim();
    spec.p = number_or(j, "p", n + 2.0, "");
    spec.q = j.contains("q") ? number(j.at("q"), "q") : spec.p;
    spec.q1 = number_or(j, "q1", std::isinf(spec.q) ? spec.p : spec.q, "");
    spec.dirichlet = j.contains("dirichlet") ? field(j.at("dirichlet"), spec.grid, "dirichlet")
                                             : ScalarField(spec.grid, 0.0);
    spec.lambda = number_or(j, "lambda", 0.0, "");
    if (j.contains("stencil_frames")) spec.stencil_frames = j.at("stencil_frames").get<int>();
    try {
        spec.validate();
    } catch (const std::exception& ex) {
        throw SpecError("<spec>", ex.what());
    }
    return spec;
}

inline ProblemSpec load_spec(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw SpecError("<file>", "cannot open " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const std::exception& ex) {
        throw SpecError("<json>", ex.what());
    }
    return parse_spec(j);
}

} // namespace spec_io

} // namespace qg
