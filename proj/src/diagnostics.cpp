#include "gsw/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "gsw/errors.hpp"

namespace gsw {

MonteCarloMoments mc_moments(const Design& design, std::uint64_t replicates, std::uint64_t seed,
                             const McOptions& options) {
    if (replicates < 2) throw InvalidConfig("mc_moments: need at least two replicates");
    const std::size_t n = design.units();
    const std::size_t tri = n * (n - 1) / 2;

    std::size_t batches = std::max<std::size_t>(1, std::min<std::size_t>(options.batches, replicates));
    std::vector<std::vector<std::int64_t>> batch_mean(batches, std::vector<std::int64_t>(n, 0));
    std::vector<std::vector<std::int64_t>> batch_cross(batches, std::vector<std::int64_t>(tri, 0));
    std::vector<std::uint64_t> batch_size(batches, 0);

    // Fixed replicate ranges per batch; workers claim whole batches, and the
    // integer partial sums make the merged result schedule-independent.
    auto batch_begin = [&](std::size_t b) { return replicates * b / batches; };

    std::atomic<std::size_t> next_batch{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t b = next_batch.fetch_add(1);
            if (b >= batches) return;
            auto& mean_acc = batch_mean[b];
            auto& cross_acc = batch_cross[b];
            const std::uint64_t lo = batch_begin(b);
            const std::uint64_t hi = batch_begin(b + 1);
            batch_size[b] = hi - lo;
            for (std::uint64_t r = lo; r < hi; ++r) {
                Assignment a = design.sample(seed, r);
                const std::int8_t* z = a.z.data();
                std::size_t t = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    mean_acc[i] += z[i];
                    if (z[i] > 0) {
                        for (std::size_t j = i + 1; j < n; ++j) cross_acc[t++] += z[j];
                    } else {
                        for (std::size_t j = i + 1; j < n; ++j) cross_acc[t++] -= z[j];
                    }
                }
            }
        }
    };

    unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(batches)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    MonteCarloMoments m;
    m.replicates = replicates;
    m.seed = seed;
    m.mean_hat.assign(n, 0.0);
    m.cross_hat = linalg::SymmetricMatrix(n);
    m.cov_hat = linalg::SymmetricMatrix(n);

    const double inv_r = 1.0 / static_cast<double>(replicates);
    std::vector<std::int64_t> mean_total(n, 0);
    std::vector<std::int64_t> cross_total(tri, 0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t i = 0; i < n; ++i) mean_total[i] += batch_mean[b][i];
        for (std::size_t t = 0; t < tri; ++t) cross_total[t] += batch_cross[b][t];
    }
    for (std::size_t i = 0; i < n; ++i) m.mean_hat[i] = static_cast<double>(mean_total[i]) * inv_r;
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        m.cross_hat.set(i, i, 1.0);  // z_i^2 = 1 identically
        for (std::size_t j = i + 1; j < n; ++j, ++t)
            m.cross_hat.set(i, j, static_cast<double>(cross_total[t]) * inv_r);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            m.cov_hat.set(i, j, m.cross_hat(i, j) - m.mean_hat[i] * m.mean_hat[j]);

    m.batches = batches;
    m.batch_size = std::move(batch_size);
    m.batch_mean = std::move(batch_mean);
    m.batch_cross = std::move(batch_cross);
    return m;
}

BandEstimate quad_form_band(const MonteCarloMoments& moments, std::span<const double> v) {
    const std::size_t n = moments.mean_hat.size();
    if (v.size() != n) throw DimensionMismatch("quad_form_band: vector length mismatch");

    auto quad_of = [&](const linalg::SymmetricMatrix& s) {
        double q = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += s(i, j) * v[j];
            q += v[i] * row;
        }
        return q;
    };

    BandEstimate out;
    out.value = quad_of(moments.cov_hat);
    if (moments.batches < 2) return out;

    std::vector<double> per_batch(moments.batches);
    for (std::size_t b = 0; b < moments.batches; ++b) {
        const double inv = 1.0 / static_cast<double>(moments.batch_size[b]);
        // v^T Covhat_b v from the batch partial sums.
        double quad = 0.0;
        double mean_dot = 0.0;
        std::size_t t = 0;
        for (std::size_t i = 0; i < n; ++i) {
            quad += v[i] * v[i];  // exact diagonal of cross
            for (std::size_t j = i + 1; j < n; ++j, ++t)
                quad += 2.0 * v[i] * v[j] * static_cast<double>(moments.batch_cross[b][t]) * inv;
            mean_dot += v[i] * static_cast<double>(moments.batch_mean[b][i]) * inv;
        }
        per_batch[b] = quad - mean_dot * mean_dot;
    }
    double mean = 0.0;
    for (double q : per_batch) mean += q;
    mean /= static_cast<double>(moments.batches);
    double var = 0.0;
    for (double q : per_batch) var += (q - mean) * (q - mean);
    var /= static_cast<double>(moments.batches - 1);
    out.se = std::sqrt(var / static_cast<double>(moments.batches));
    return out;
}

PairProbabilities::PairProbabilities(std::vector<double> mean, linalg::SymmetricMatrix cross)
    : mean_(std::move(mean)), cross_(std::move(cross)) {}

double PairProbabilities::probability(std::size_t i, std::size_t j, int vi, int vj) const {
    return 0.25 * (1.0 + vi * mean_[i] + vj * mean_[j] + vi * vj * cross_(i, j));
}

double PairProbabilities::min_pair_probability() const {
    const std::size_t n = mean_.size();
    double best = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (int vi : {-1, 1})
                for (int vj : {-1, 1}) best = std::min(best, probability(i, j, vi, vj));
    return best;
}

PairProbabilities second_order_probabilities(const MonteCarloMoments& moments) {
    return {moments.mean_hat, moments.cross_hat};
}

namespace {

// S -> X^T S X.
linalg::SymmetricMatrix congruence(const linalg::SymmetricMatrix& s, const CovariateMatrix& x) {
    const std::size_t n = x.units();
    const std::size_t d = x.covariates();
    linalg::Matrix sx(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += s(i, j) * x.matrix()(j, a);
            sx(i, a) = acc;
        }
    linalg::SymmetricMatrix out(d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += x.matrix()(i, a) * sx(i, b);
            out.set(a, b, acc);
        }
    return out;
}

}  // namespace

SpectralReport spectral_report(const MonteCarloMoments& moments, const CovariateMatrix& x) {
    const std::size_t n = x.units();
    if (moments.mean_hat.size() != n) throw DimensionMismatch("spectral_report: moment size mismatch");

    SpectralReport report;
    auto spec_z = linalg::sym_eigen(moments.cov_hat);
    report.lambda_z = spec_z.eigenvalues.front();

    auto cov_xz = congruence(moments.cov_hat, x);
    linalg::Spectrum spec_xz;
    std::vector<double> top_xz;
    if (x.covariates() > 0) {
        spec_xz = linalg::sym_eigen(cov_xz);
        report.lambda_xz = spec_xz.eigenvalues.front();
    }

    auto cross_xz = congruence(moments.cross_hat, x);
    report.mean_sq_imbalance = cross_xz.trace();

    double ones_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) ones_sum += moments.cross_hat(i, j);
    report.group_size_msq = ones_sum;

    if (moments.batches >= 2) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = spec_z.eigenvectors(i, 0);
        report.lambda_z_se = quad_form_band(moments, v).se;
        if (x.covariates() > 0) {
            // Push the top d-space eigenvector back to unit space: v = X w.
            std::vector<double> w(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t a = 0; a < x.covariates(); ++a)
                    acc += x.matrix()(i, a) * spec_xz.eigenvectors(a, 0);
                w[i] = acc;
            }
            report.lambda_xz_se = quad_form_band(moments, w).se;
        }
    }
    return report;
}

double imbalance_norm(std::span<const std::int8_t> z, const CovariateMatrix& x) {
    return x.imbalance_norm(z);
}

}  // namespace gsw
