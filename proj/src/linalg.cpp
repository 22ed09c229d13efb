#include "gsw/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gsw/errors.hpp"

namespace gsw::linalg {

namespace {

double frobenius_norm(const SymmetricMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.order(); ++i)
        for (std::size_t j = 0; j < a.order(); ++j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace

void CholeskyFactor::update(std::span<const double> v) {
    if (v.size() != order_) throw DimensionMismatch("rank-1 update: vector length != factor order");
    std::vector<double> x(v.begin(), v.end());
    for (std::size_t k = 0; k < order_; ++k) {
        double lkk = at(k, k);
        double r = std::sqrt(lkk * lkk + x[k] * x[k]);
        double c = r / lkk;
        double s = x[k] / lkk;
        at(k, k) = r;
        for (std::size_t i = k + 1; i < order_; ++i) {
            at(i, k) = (at(i, k) + s * x[i]) / c;
            x[i] = c * x[i] - s * at(i, k);
        }
    }
}

void CholeskyFactor::downdate(std::span<const double> v) {
    if (v.size() != order_) throw DimensionMismatch("rank-1 downdate: vector length != factor order");
    std::vector<double> x(v.begin(), v.end());
    std::vector<double> saved = lower_;
    for (std::size_t k = 0; k < order_; ++k) {
        double lkk = at(k, k);
        double r2 = (lkk - x[k]) * (lkk + x[k]);
        if (!(r2 > 1e-12 * lkk * lkk)) {
            lower_ = std::move(saved);
            throw DowndateBreaksPd("rank-1 downdate would lose positive definiteness");
        }
        double r = std::sqrt(r2);
        double c = r / lkk;
        double s = x[k] / lkk;
        at(k, k) = r;
        for (std::size_t i = k + 1; i < order_; ++i) {
            at(i, k) = (at(i, k) - s * x[i]) / c;
            x[i] = c * x[i] - s * at(i, k);
        }
    }
}

void CholeskyFactor::solve_in_place(std::span<double> b) const {
    if (b.size() != order_) throw DimensionMismatch("triangular solve: vector length != factor order");
    const double* l = lower_.data();
    // Forward: L y = b.
    for (std::size_t i = 0; i < order_; ++i) {
        double s = b[i];
        const double* row = l + i * order_;
        for (std::size_t j = 0; j < i; ++j) s -= row[j] * b[j];
        b[i] = s / row[i];
    }
    // Backward: L^T x = y.
    for (std::size_t ii = order_; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < order_; ++j) s -= l[j * order_ + ii] * b[j];
        b[ii] = s / l[ii * order_ + ii];
    }
}

void CholeskyFactor::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != order_ || y.size() != order_)
        throw DimensionMismatch("factor multiply: vector length != factor order");
    const double* l = lower_.data();
    // t = L^T x.
    std::vector<double> t(order_, 0.0);
    for (std::size_t i = 0; i < order_; ++i) {
        const double* row = l + i * order_;
        double xi = x[i];
        for (std::size_t j = 0; j <= i; ++j) t[j] += row[j] * xi;
    }
    // y = L t.
    for (std::size_t i = 0; i < order_; ++i) {
        const double* row = l + i * order_;
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += row[j] * t[j];
        y[i] = s;
    }
}

SymmetricMatrix CholeskyFactor::reconstruct() const {
    SymmetricMatrix a(order_);
    for (std::size_t i = 0; i < order_; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += at(i, k) * at(j, k);
            a.set(i, j, s);
        }
    }
    return a;
}

CholeskyFactor cholesky_factor(const SymmetricMatrix& a) {
    const std::size_t n = a.order();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
    const double pivot_tol = 1e-12 * max_diag;

    CholeskyFactor f(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= f.at(i, k) * f.at(j, k);
            if (i == j) {
                if (!(s > pivot_tol))
                    throw NotPositiveDefinite("cholesky pivot below tolerance at row " + std::to_string(i));
                f.at(i, i) = std::sqrt(s);
            } else {
                f.at(i, j) = s / f.at(j, j);
            }
        }
    }
    return f;
}

std::vector<double> chol_solve(const CholeskyFactor& factor, std::span<const double> b) {
    if (b.size() != factor.order())
        throw DimensionMismatch("chol_solve: vector length != factor order");
    std::vector<double> x(b.begin(), b.end());
    factor.solve_in_place(x);
    return x;
}

CholeskyFactor chol_update(const CholeskyFactor& factor, std::span<const double> v) {
    CholeskyFactor f = factor;
    f.update(v);
    return f;
}

CholeskyFactor chol_downdate(const CholeskyFactor& factor, std::span<const double> v) {
    CholeskyFactor f = factor;
    f.downdate(v);
    return f;
}

Spectrum sym_eigen(const SymmetricMatrix& a) {
    const std::size_t n = a.order();
    const double off_tol = 1e-11 * frobenius_norm(a);

    // Work on a full copy; accumulate rotations in v.
    std::vector<double> w(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w[i * n + j] = a(i, j);
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    const int max_sweeps = 100;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off_max = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off_max = std::max(off_max, std::abs(w[p * n + q]));
        if (off_max <= off_tol) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = w[p * n + q];
                if (std::abs(apq) <= off_tol * 1e-2) continue;
                double app = w[p * n + p];
                double aqq = w[q * n + q];
                double theta = 0.5 * (aqq - app) / apq;
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    double wkp = w[k * n + p];
                    double wkq = w[k * n + q];
                    w[k * n + p] = c * wkp - s * wkq;
                    w[k * n + q] = s * wkp + c * wkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double wpk = w[p * n + k];
                    double wqk = w[q * n + k];
                    w[p * n + k] = c * wpk - s * wqk;
                    w[q * n + k] = s * wpk + c * wqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v[k * n + p];
                    double vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep >= max_sweeps) throw NoConvergence("jacobi eigensolver did not converge in 100 sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return w[i * n + i] > w[j * n + j]; });

    Spectrum spec;
    spec.eigenvalues.resize(n);
    spec.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t src = order[k];
        spec.eigenvalues[k] = w[src * n + src];
        for (std::size_t i = 0; i < n; ++i) spec.eigenvectors(i, k) = v[i * n + src];
    }
    return spec;
}

double max_eigenvalue(const SymmetricMatrix& a) {
    if (a.order() == 0) return 0.0;
    return sym_eigen(a).eigenvalues.front();
}

std::vector<double> solve_dense(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n)
        throw DimensionMismatch("solve_dense: system is not square or rhs length mismatches");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (std::abs(a(piv, k)) < 1e-300) throw SingularSystem("solve_dense: singular pivot");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double m = a(i, k) / a(k, k);
            if (m == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= m * a(k, j);
            b[i] -= m * b[k];
        }
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * b[j];
        b[ii] = s / a(ii, ii);
    }
    return b;
}

}  // namespace gsw::linalg
