#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace qg {

/// Uniform structured mesh on an interval (1D) or axis-aligned rectangle (2D).
///
/// Nodes are numbered lexicographically, i + nx*j. Every node is either
/// interior or boundary; the two index sets are precomputed and disjoint.
class Grid {
public:
    static std::shared_ptr<const Grid> make(int dim,
                                            std::array<int, 2> counts,
                                            std::array<std::array<double, 2>, 2> extents) {
        if (dim != 1 && dim != 2)
            throw std::invalid_argument("Grid: dim must be 1 or 2");
        for (int a = 0; a < dim; ++a) {
            if (counts[a] < 3)
                throw std::invalid_argument("Grid: node count per axis must be >= 3");
            if (!(extents[a][1] > extents[a][0]) || !std::isfinite(extents[a][0]) ||
                !std::isfinite(extents[a][1]))
                throw std::invalid_argument("Grid: degenerate extent");
        }
        return std::shared_ptr<const Grid>(new Grid(dim, counts, extents));
    }

    /// 1D convenience: n nodes on [a, b].
    static std::shared_ptr<const Grid> interval(int n, double a, double b) {
        return make(1, {n, 1}, {{{a, b}, {0.0, 1.0}}});
    }

    /// 2D convenience: nx-by-ny nodes on [ax,bx] x [ay,by].
    static std::shared_ptr<const Grid> rectangle(int nx, int ny, double ax, double bx,
                                                 double ay, double by) {
        return make(2, {nx, ny}, {{{ax, bx}, {ay, by}}});
    }

    int dim() const { return dim_; }
    int nx() const { return n_[0]; }
    int ny() const { return dim_ == 2 ? n_[1] : 1; }
    int node_count() const { return n_[0] * ny(); }
    double spacing(int axis) const { return h_[axis]; }
    double hmax() const { return dim_ == 2 ? std::max(h_[0], h_[1]) : h_[0]; }
    double lo(int axis) const { return ext_[axis][0]; }
    double hi(int axis) const { return ext_[axis][1]; }
    /// Cell volume h^dim used by the discrete L^p norms.
    double cell_volume() const { return dim_ == 2 ? h_[0] * h_[1] : h_[0]; }
    double domain_volume() const {
        double v = ext_[0][1] - ext_[0][0];
        if (dim_ == 2) v *= ext_[1][1] - ext_[1][0];
        return v;
    }

    int index(int i, int j = 0) const { return i + n_[0] * j; }
    int ix(int node) const { return node % n_[0]; }
    int iy(int node) const { return node / n_[0]; }
    double x(int node) const { return ext_[0][0] + h_[0] * ix(node); }
    double y(int node) const { return dim_ == 2 ? ext_[1][0] + h_[1] * iy(node) : 0.0; }

    bool is_boundary(int node) const {
        const int i = ix(node);
        if (i == 0 || i == n_[0] - 1) return true;
        if (dim_ == 2) {
            const int j = iy(node);
            if (j == 0 || j == n_[1] - 1) return true;
        }
        return false;
    }

    const std::vector<int>& interior() const { return interior_; }
    const std::vector<int>& boundary() const { return boundary_; }

    /// Position of a node in the interior ordering, -1 for boundary nodes.
    int interior_offset(int node) const { return interior_pos_[node]; }

    bool same_shape(const Grid& o) const {
        return dim_ == o.dim_ && n_ == o.n_ && ext_ == o.ext_;
    }

    /// Grid with node counts doubled-ish (n -> 2n-1) on the same extents,
    /// so that every node of this grid is also a node of the refined one.
    std::shared_ptr<const Grid> refined() const {
        std::array<int, 2> c = {2 * n_[0] - 1, dim_ == 2 ? 2 * n_[1] - 1 : 1};
        return make(dim_, c, ext_);
    }

private:
    Grid(int dim, std::array<int, 2> counts, std::array<std::array<double, 2>, 2> extents)
        : dim_(dim), n_(counts), ext_(extents) {
        if (dim_ == 1) n_[1] = 1;
        h_[0] = (ext_[0][1] - ext_[0][0]) / (n_[0] - 1);
        h_[1] = dim_ == 2 ? (ext_[1][1] - ext_[1][0]) / (n_[1] - 1) : 1.0;
        const int total = node_count();
        interior_pos_.assign(total, -1);
        for (int node = 0; node < total; ++node) {
            if (is_boundary(node)) {
                boundary_.push_back(node);
            } else {
                interior_pos_[node] = static_cast<int>(interior_.size());
                interior_.push_back(node);
            }
        }
    }

    int dim_;
    std::array<int, 2> n_;
    std::array<std::array<double, 2>, 2> ext_;
    std::array<double, 2> h_{};
    std::vector<int> interior_;
    std::vector<int> boundary_;
    std::vector<int> interior_pos_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int dim, std::array<int, 2> counts,
                         std::array<std::array<double, 2>, 2> extents) {
    return Grid::make(dim, counts, extents);
}

} // namespace qg
