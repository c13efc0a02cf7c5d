#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <stdexcept>
#include <vector>

#include "qglab/field.hpp"

namespace qg {

/// Sparse direct solve on interior unknowns (Eigen SparseLU).
class InteriorSystem {
public:
    explicit InteriorSystem(int n) : n_(n), rhs_(Eigen::VectorXd::Zero(n)) {}

    void add(int row, int col, double v) { trip_.emplace_back(row, col, v); }
    double& rhs(int row) { return rhs_[row]; }

    /// Factorizes and solves; returns false on a singular matrix.
    bool solve(std::vector<double>& out) {
        Eigen::SparseMatrix<double> A(n_, n_);
        A.setFromTriplets(trip_.begin(), trip_.end());
        A.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.analyzePattern(A);
        lu.factorize(A);
        if (lu.info() != Eigen::Success) return false;
        Eigen::VectorXd x = lu.solve(rhs_);
        if (lu.info() != Eigen::Success) return false;
        out.assign(x.data(), x.data() + n_);
        for (double v : out)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    int n_;
    std::vector<Eigen::Triplet<double>> trip_;
    Eigen::VectorXd rhs_;
};

/// Reusable factorization of a fixed interior matrix (for power iteration).
class InteriorFactorization {
public:
    InteriorFactorization(int n, const std::vector<Eigen::Triplet<double>>& trip) {
        Eigen::SparseMatrix<double> A(n, n);
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        lu_.analyzePattern(A);
        lu_.factorize(A);
        if (lu_.info() != Eigen::Success)
            throw std::runtime_error("InteriorFactorization: singular matrix");
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        Eigen::VectorXd x = lu_.solve(b);
        if (lu_.info() != Eigen::Success)
            throw std::runtime_error("InteriorFactorization: solve failed");
        return x;
    }

private:
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

} // namespace qg
