#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gsw::linalg {

// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Symmetric matrix with mirrored writes: set() stores both (i,j) and (j,i),
// so A(i,j) == A(j,i) holds exactly by construction.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t order, double fill = 0.0)
        : order_(order), data_(order * order, fill) {}

    double operator()(std::size_t i, std::size_t j) const { return data_[i * order_ + j]; }

    void set(std::size_t i, std::size_t j, double v) {
        data_[i * order_ + j] = v;
        data_[j * order_ + i] = v;
    }

    void add(std::size_t i, std::size_t j, double v) { set(i, j, (*this)(i, j) + v); }

    std::size_t order() const { return order_; }

    static SymmetricMatrix identity(std::size_t order) {
        SymmetricMatrix a(order);
        for (std::size_t i = 0; i < order; ++i) a.set(i, i, 1.0);
        return a;
    }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < order_; ++i) t += (*this)(i, i);
        return t;
    }

private:
    std::size_t order_ = 0;
    std::vector<double> data_;
};

// Lower-triangular Cholesky factor L with L*L^T equal to the factored matrix.
// Diagonal entries are strictly positive.
class CholeskyFactor {
public:
    CholeskyFactor() = default;
    explicit CholeskyFactor(std::size_t order) : order_(order), lower_(order * order, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return lower_[i * order_ + j]; }
    double at(std::size_t i, std::size_t j) const { return lower_[i * order_ + j]; }

    std::size_t order() const { return order_; }

    // In-place rank-1 update: factor of A + v v^T. O(order^2).
    void update(std::span<const double> v);

    // In-place rank-1 downdate: factor of A - v v^T. O(order^2). Throws
    // DowndateBreaksPd when a hyperbolic rotation would produce a
    // non-positive diagonal; the factor is left unmodified in that case.
    void downdate(std::span<const double> v);

    // Computes (L L^T)^{-1} b via forward and backward substitution. O(order^2).
    void solve_in_place(std::span<double> b) const;

    // y = L (L^T x), i.e. multiplies by the factored matrix without forming it.
    void multiply(std::span<const double> x, std::span<double> y) const;

    // Reconstructs L L^T.
    SymmetricMatrix reconstruct() const;

private:
    std::size_t order_ = 0;
    std::vector<double> lower_;
};

struct Spectrum {
    std::vector<double> eigenvalues;  // sorted descending
    Matrix eigenvectors;              // orthonormal columns, column k pairs with eigenvalue k
};

// Cholesky factorization of a symmetric positive definite matrix. O(order^3).
// Throws NotPositiveDefinite when a pivot falls below 1e-12 times the largest
// diagonal entry.
CholeskyFactor cholesky_factor(const SymmetricMatrix& a);

// Solves (L L^T) x = b. Throws DimensionMismatch when sizes disagree.
std::vector<double> chol_solve(const CholeskyFactor& factor, std::span<const double> b);

// Value-returning counterparts of the in-place rank-1 routines.
CholeskyFactor chol_update(const CholeskyFactor& factor, std::span<const double> v);
CholeskyFactor chol_downdate(const CholeskyFactor& factor, std::span<const double> v);

// Full spectrum of a symmetric matrix via cyclic Jacobi rotations. Converged
// when every off-diagonal magnitude drops below 1e-11 * ||A||_F; throws
// NoConvergence after 100 sweeps.
Spectrum sym_eigen(const SymmetricMatrix& a);

// Largest eigenvalue, a convenience wrapper over sym_eigen.
double max_eigenvalue(const SymmetricMatrix& a);

// Solves a general square system by Gaussian elimination with partial
// pivoting. Reference-path use only; throws SingularSystem.
std::vector<double> solve_dense(Matrix a, std::vector<double> b);

}  // namespace gsw::linalg
