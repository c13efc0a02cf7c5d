#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "qglab/grid.hpp"

namespace qg {

/// Real values attached to every node of a grid. Value semantics; the grid is
/// shared immutable state.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)), v_(static_cast<size_t>(grid_->node_count()), fill) {}

    ScalarField(GridPtr grid, std::vector<double> values)
        : grid_(std::move(grid)), v_(std::move(values)) {
        if (static_cast<int>(v_.size()) != grid_->node_count())
            throw std::invalid_argument("ScalarField: value count does not match grid");
        validate_finite();
    }

    static ScalarField from_function(GridPtr grid,
                                     const std::function<double(double, double)>& f) {
        ScalarField out(grid);
        for (int n = 0; n < grid->node_count(); ++n)
            out.v_[n] = f(grid->x(n), grid->y(n));
        out.validate_finite();
        return out;
    }

    const GridPtr& grid() const { return grid_; }
    int size() const { return static_cast<int>(v_.size()); }
    double operator[](int node) const { return v_[node]; }
    double& operator[](int node) { return v_[node]; }
    const std::vector<double>& values() const { return v_; }

    void validate_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) throw std::invalid_argument("ScalarField: non-finite value");
    }

    bool compatible(const ScalarField& o) const {
        return grid_ && o.grid_ && grid_->same_shape(*o.grid_);
    }

    ScalarField& operator+=(const ScalarField& o) {
        for (size_t n = 0; n < v_.size(); ++n) v_[n] += o.v_[n];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        for (size_t n = 0; n < v_.size(); ++n) v_[n] -= o.v_[n];
        return *this;
    }
    ScalarField& operator*=(double s) {
        for (double& x : v_) x *= s;
        return *this;
    }

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
    friend ScalarField operator*(ScalarField a, double s) { return a *= s; }

private:
    GridPtr grid_;
    std::vector<double> v_;
};

inline double sup_norm(const ScalarField& f) {
    double m = 0.0;
    for (int n = 0; n < f.size(); ++n) m = std::max(m, std::abs(f[n]));
    return m;
}

/// Discrete L^p norm: full-node Riemann sum (sum h^dim |f|^p)^(1/p).
inline double lp_norm(const ScalarField& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) return sup_norm(f);
    const double w = f.grid()->cell_volume();
    double s = 0.0;
    for (int n = 0; n < f.size(); ++n) s += w * std::pow(std::abs(f[n]), p);
    return std::pow(s, 1.0 / p);
}

inline double boundary_max(const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (int n : f.grid()->boundary()) m = std::max(m, f[n]);
    return m;
}

inline double min_value(const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (int n = 0; n < f.size(); ++n) m = std::min(m, f[n]);
    return m;
}

inline double max_value(const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < f.size(); ++n) m = std::max(m, f[n]);
    return m;
}

inline double interior_max(const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (int n : f.grid()->interior()) m = std::max(m, f[n]);
    return m;
}

inline double interior_min(const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (int n : f.grid()->interior()) m = std::min(m, f[n]);
    return m;
}

/// sup of the negative part u^- = max(0, -u).
inline double neg_part_sup(const ScalarField& f) {
    double m = 0.0;
    for (int n = 0; n < f.size(); ++n) m = std::max(m, -f[n]);
    return m;
}

/// Symmetric matrix coefficient field M(x) with uniform bounds
/// mu1 I <= M(x) <= mu2 I. In 1D the matrix is a scalar per node.
class MatrixField {
public:
    MatrixField() = default;

    /// M(x) = scale * I everywhere.
    static MatrixField scaled_identity(GridPtr grid, double scale) {
        if (!(scale > 0.0)) throw std::invalid_argument("MatrixField: scale must be > 0");
        MatrixField m;
        m.grid_ = std::move(grid);
        m.mu1_ = m.mu2_ = scale;
        const int n = m.grid_->node_count();
        if (m.grid_->dim() == 1) {
            m.a_.assign(static_cast<size_t>(n), scale);
        } else {
            m.a_.resize(3 * static_cast<size_t>(n));
            for (int node = 0; node < n; ++node) {
                m.a_[3 * node + 0] = scale;
                m.a_[3 * node + 1] = 0.0;
                m.a_[3 * node + 2] = scale;
            }
        }
        return m;
    }

    /// 2D nodewise entries (a11, a12, a22); validates mu1 I <= M <= mu2 I via
    /// the closed-form eigenvalues of the symmetric 2x2 matrix.
    static MatrixField from_entries(GridPtr grid, std::vector<double> entries, double mu1,
                                    double mu2) {
        if (!(0.0 < mu1 && mu1 <= mu2))
            throw std::invalid_argument("MatrixField: need 0 < mu1 <= mu2");
        MatrixField m;
        m.grid_ = std::move(grid);
        m.mu1_ = mu1;
        m.mu2_ = mu2;
        m.a_ = std::move(entries);
        const int n = m.grid_->node_count();
        const double slack = 1e-12 * (1.0 + mu2);
        if (m.grid_->dim() == 1) {
            if (static_cast<int>(m.a_.size()) != n)
                throw std::invalid_argument("MatrixField: entry count mismatch");
            for (double a : m.a_)
                if (a < mu1 - slack || a > mu2 + slack)
                    throw std::invalid_argument("MatrixField: value outside [mu1, mu2]");
        } else {
            if (static_cast<int>(m.a_.size()) != 3 * n)
                throw std::invalid_argument("MatrixField: entry count mismatch");
            for (int node = 0; node < n; ++node) {
                const double a11 = m.a_[3 * node], a12 = m.a_[3 * node + 1],
                             a22 = m.a_[3 * node + 2];
                const double mean = 0.5 * (a11 + a22);
                const double rad = std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + a12 * a12);
                if (mean - rad < mu1 - slack || mean + rad > mu2 + slack)
                    throw std::invalid_argument("MatrixField: eigenvalue outside [mu1, mu2]");
            }
        }
        return m;
    }

    const GridPtr& grid() const { return grid_; }
    double mu1() const { return mu1_; }
    double mu2() const { return mu2_; }

    /// <M(node) p, p> for p = (px, py).
    double quad(int node, double px, double py) const {
        if (grid_->dim() == 1) return a_[node] * px * px;
        const double a11 = a_[3 * node], a12 = a_[3 * node + 1], a22 = a_[3 * node + 2];
        return a11 * px * px + 2.0 * a12 * px * py + a22 * py * py;
    }

    /// M(node) * p.
    void apply(int node, double px, double py, double& ox, double& oy) const {
        if (grid_->dim() == 1) {
            ox = a_[node] * px;
            oy = 0.0;
            return;
        }
        const double a11 = a_[3 * node], a12 = a_[3 * node + 1], a22 = a_[3 * node + 2];
        ox = a11 * px + a12 * py;
        oy = a12 * px + a22 * py;
    }

private:
    GridPtr grid_;
    std::vector<double> a_;
    double mu1_ = 1.0, mu2_ = 1.0;
};

namespace detail {
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
} // namespace detail

/// Flat CSV, one row per node: x[,y],value. 17 significant digits so repeated
/// runs are byte-identical.
inline void write_csv(const ScalarField& f, std::ostream& os) {
    const Grid& g = *f.grid();
    os << (g.dim() == 2 ? "x,y,value\n" : "x,value\n");
    for (int n = 0; n < g.node_count(); ++n) {
        os << detail::fmt17(g.x(n));
        if (g.dim() == 2) os << ',' << detail::fmt17(g.y(n));
        os << ',' << detail::fmt17(f[n]) << '\n';
    }
}

inline void write_csv(const ScalarField& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_csv: cannot open " + path);
    write_csv(f, os);
}

/// Reads a field written by write_csv back onto a matching grid. Coordinates
/// are checked against the grid nodes.
inline ScalarField read_csv(GridPtr grid, std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty input");
    ScalarField out(grid);
    const Grid& g = *grid;
    for (int n = 0; n < g.node_count(); ++n) {
        if (!std::getline(is, line))
            throw std::runtime_error("read_csv: fewer rows than grid nodes");
        std::istringstream ss(line);
        std::string tok;
        std::vector<double> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(std::stod(tok));
        if (static_cast<int>(cols.size()) != g.dim() + 1)
            throw std::runtime_error("read_csv: wrong column count");
        const double tol = 1e-9 * (1.0 + std::abs(g.x(n)) + std::abs(g.y(n)));
        if (std::abs(cols[0] - g.x(n)) > tol ||
            (g.dim() == 2 && std::abs(cols[1] - g.y(n)) > tol))
            throw std::runtime_error("read_csv: node coordinates do not match grid");
        out[n] = cols.back();
    }
    out.validate_finite();
    return out;
}

inline ScalarField read_csv(GridPtr grid, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_csv: cannot open " + path);
    return read_csv(std::move(grid), is);
}

} // namespace qg
