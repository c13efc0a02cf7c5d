#pragma once

#include <Eigen/Dense>

#include "qglab/linsolve.hpp"
#include "qglab/operators.hpp"

namespace qg {

/// Principal pair of the weighted eigenproblem -lap(phi) = gamma c(x) phi
/// with zero Dirichlet data; phi is normalized to sup-norm 1 with positive
/// sign at the interior maximum.
struct EigenPair {
    double gamma1 = 0.0;
    ScalarField phi1;
    double residual_norm = 0.0;
    int iterations = 0;
};

namespace detail {

inline std::vector<Eigen::Triplet<double>> neg_laplacian_triplets(const Grid& g) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int node : g.interior()) {
        const int i = g.interior_offset(node);
        double diag = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const int off = a == 0 ? 1 : g.nx();
            const double w = 1.0 / (g.spacing(a) * g.spacing(a));
            diag += 2.0 * w;
            for (int nb : {node + off, node - off}) {
                const int j = g.interior_offset(nb);
                if (j >= 0) trip.emplace_back(i, j, -w);
            }
        }
        trip.emplace_back(i, i, diag);
    }
    return trip;
}

} // namespace detail

inline EigenPair principal_eigenpair(GridPtr grid, const ScalarField& c, double tol = 1e-11,
                                     int max_iter = 5000) {
    const Grid& g = *grid;
    double csup = 0.0;
    for (int n = 0; n < c.size(); ++n) {
        if (c[n] < 0.0) throw std::invalid_argument("principal_eigenpair: c must be >= 0");
        csup = std::max(csup, c[n]);
    }
    if (csup == 0.0)
        throw std::invalid_argument("principal_eigenpair: c identically zero, no eigenproblem");

    const int ni = static_cast<int>(g.interior().size());
    const auto trip = detail::neg_laplacian_triplets(g);
    Eigen::SparseMatrix<double> A(ni, ni);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    InteriorFactorization lu(ni, trip);

    Eigen::VectorXd cw(ni);
    for (int node : g.interior()) cw[g.interior_offset(node)] = c[node];

    Eigen::VectorXd phi = Eigen::VectorXd::Ones(ni);
    double gamma = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        Eigen::VectorXd rhs = cw.cwiseProduct(phi);
        Eigen::VectorXd z = lu.solve(rhs);
        const double zmax = z.cwiseAbs().maxCoeff();
        if (!(zmax > 0.0))
            throw std::runtime_error("principal_eigenpair: iteration collapsed to zero");
        z /= zmax;
        const double denom = z.dot(cw.cwiseProduct(z));
        if (!(denom > 0.0))
            throw std::runtime_error("principal_eigenpair: degenerate Rayleigh quotient");
        const double gamma_new = z.dot(A * z) / denom;
        const double step = (z - phi).cwiseAbs().maxCoeff();
        phi = z;
        if (it > 0 && std::abs(gamma_new - gamma) <= tol * std::abs(gamma_new) && step <= 1e3 * tol) {
            gamma = gamma_new;
            break;
        }
        gamma = gamma_new;
    }
    if (it == max_iter) throw std::runtime_error("principal_eigenpair: iteration stalled");

    // Positive orientation and sup normalization.
    int argmax = 0;
    for (int i = 1; i < ni; ++i)
        if (std::abs(phi[i]) > std::abs(phi[argmax])) argmax = i;
    if (phi[argmax] < 0.0) phi = -phi;
    phi /= phi.cwiseAbs().maxCoeff();

    EigenPair pair;
    pair.gamma1 = gamma;
    pair.iterations = it + 1;
    pair.phi1 = ScalarField(grid, 0.0);
    for (int node : g.interior()) pair.phi1[node] = phi[g.interior_offset(node)];
    Eigen::VectorXd res = A * phi - gamma * cw.cwiseProduct(phi);
    pair.residual_norm = res.cwiseAbs().maxCoeff();
    for (int node : g.interior())
        if (!(pair.phi1[node] > 0.0))
            throw std::runtime_error("principal_eigenpair: eigenvector not interior-positive");
    return pair;
}

/// Strong ordering test: holds iff v - u >= eps * phi1 with eps above the
/// strictness tolerance; u and v must agree on the boundary.
struct StrictOrder {
    bool holds = false;
    double epsilon = 0.0;
};

inline StrictOrder strictly_below(const ScalarField& u, const ScalarField& v,
                                  const EigenPair& pair, double strict_tol = 0.0,
                                  double boundary_tol = 1e-9) {
    const Grid& g = *pair.phi1.grid();
    if (!u.grid()->same_shape(g) || !v.grid()->same_shape(g))
        throw std::invalid_argument("strictly_below: grid mismatch");
    for (int node : g.boundary())
        if (std::abs(u[node] - v[node]) > boundary_tol)
            throw std::invalid_argument("strictly_below: boundary values differ");
    StrictOrder r;
    r.epsilon = std::numeric_limits<double>::infinity();
    for (int node : g.interior())
        r.epsilon = std::min(r.epsilon, (v[node] - u[node]) / pair.phi1[node]);
    r.holds = r.epsilon > strict_tol;
    return r;
}

} // namespace qg
