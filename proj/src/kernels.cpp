// SPDX-License-Identifier: Apache-2.0
#include "ris/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

#include "ris/errors.hpp"

namespace ris::kernels {

namespace {

using Index = std::ptrdiff_t;

inline cplx g_at(const Vec3 &p, const Vec3 &q, double k) { return green(k, distance(p, q)); }

}  // namespace

void radiate_serial(std::span<const Vec3> points, std::span<const Vec3> sources, std::span<const cplx> amp,
                    double k, std::span<cplx> out) {
    assert(amp.size() == sources.size() && out.size() == points.size());
    for (std::size_t j = 0; j < points.size(); ++j) {
        cplx acc{};
        for (std::size_t n = 0; n < sources.size(); ++n) acc += amp[n] * g_at(points[j], sources[n], k);
        out[j] = acc;
    }
}

void radiate(std::span<const Vec3> points, std::span<const Vec3> sources, std::span<const cplx> amp, double k,
             std::span<cplx> out) {
    assert(amp.size() == sources.size() && out.size() == points.size());
    const Index rows = static_cast<Index>(points.size());
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < rows; ++j) {
        cplx acc{};
        for (std::size_t n = 0; n < sources.size(); ++n) acc += amp[n] * g_at(points[j], sources[n], k);
        out[j] = acc;
    }
}

void radiate_adjoint_serial(std::span<const Vec3> points, std::span<const Vec3> sources,
                            std::span<const cplx> v, double k, std::span<cplx> out) {
    assert(v.size() == points.size() && out.size() == sources.size());
    for (std::size_t n = 0; n < sources.size(); ++n) {
        cplx acc{};
        for (std::size_t j = 0; j < points.size(); ++j) acc += v[j] * g_at(points[j], sources[n], k);
        out[n] = acc;
    }
}

void radiate_adjoint(std::span<const Vec3> points, std::span<const Vec3> sources, std::span<const cplx> v,
                     double k, std::span<cplx> out) {
    assert(v.size() == points.size() && out.size() == sources.size());
    const Index cols = static_cast<Index>(sources.size());
#pragma omp parallel for schedule(static)
    for (Index n = 0; n < cols; ++n) {
        cplx acc{};
        for (std::size_t j = 0; j < points.size(); ++j) acc += v[j] * g_at(points[j], sources[n], k);
        out[n] = acc;
    }
}

double min_separation(std::span<const Vec3> points, std::span<const Vec3> sources) {
    double best = std::numeric_limits<double>::infinity();
    const Index rows = static_cast<Index>(points.size());
#pragma omp parallel for reduction(min : best) schedule(static)
    for (Index j = 0; j < rows; ++j) {
        for (const auto &q : sources) best = std::min(best, distance(points[j], q));
    }
    return best;
}

GreenOperator::GreenOperator(std::vector<Vec3> points, std::vector<Vec3> sources, double k,
                             std::size_t cache_limit_bytes)
    : points_(std::move(points)), sources_(std::move(sources)), k_(k) {
    if (!points_.empty() && !sources_.empty() && min_separation(points_, sources_) < kMinDistance) {
        throw NumericalError("observation point coincides with an element center");
    }
    const std::size_t bytes = points_.size() * sources_.size() * sizeof(cplx);
    if (bytes == 0 || bytes > cache_limit_bytes) return;
    matrix_.resize(points_.size() * sources_.size());
    const Index rows = static_cast<Index>(points_.size());
    const std::size_t ncols = sources_.size();
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < rows; ++j) {
        cplx *dst = matrix_.data() + static_cast<std::size_t>(j) * ncols;
        for (std::size_t n = 0; n < ncols; ++n) dst[n] = g_at(points_[j], sources_[n], k_);
    }
}

cplx GreenOperator::at(std::size_t j, std::size_t n) const {
    return cached() ? matrix_[j * cols() + n] : g_at(points_[j], sources_[n], k_);
}

void GreenOperator::apply(std::span<const cplx> amp, std::span<cplx> out) const {
    if (!cached()) {
        radiate(points_, sources_, amp, k_, out);
        return;
    }
    const Index nrows = static_cast<Index>(rows());
    const std::size_t ncols = cols();
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < nrows; ++j) {
        const cplx *g = matrix_.data() + static_cast<std::size_t>(j) * ncols;
        cplx acc{};
        for (std::size_t n = 0; n < ncols; ++n) acc += g[n] * amp[n];
        out[j] = acc;
    }
}

void GreenOperator::apply_serial(std::span<const cplx> amp, std::span<cplx> out) const {
    if (!cached()) {
        radiate_serial(points_, sources_, amp, k_, out);
        return;
    }
    const std::size_t ncols = cols();
    for (std::size_t j = 0; j < rows(); ++j) {
        const cplx *g = matrix_.data() + j * ncols;
        cplx acc{};
        for (std::size_t n = 0; n < ncols; ++n) acc += g[n] * amp[n];
        out[j] = acc;
    }
}

void GreenOperator::apply_adjoint(std::span<const cplx> v, std::span<cplx> out) const {
    if (!cached()) {
        radiate_adjoint(points_, sources_, v, k_, out);
        return;
    }
    // Column blocks per thread; rows swept in order so each out[n] sums j = 0, 1, ...
    const std::size_t ncols = cols();
    constexpr std::size_t kBlock = 64;
    const Index blocks = static_cast<Index>((ncols + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
    for (Index b = 0; b < blocks; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        const std::size_t hi = std::min(ncols, lo + kBlock);
        cplx acc[kBlock] = {};
        for (std::size_t j = 0; j < rows(); ++j) {
            const cplx *g = matrix_.data() + j * ncols;
            const cplx vj = v[j];
            for (std::size_t n = lo; n < hi; ++n) acc[n - lo] += vj * g[n];
        }
        for (std::size_t n = lo; n < hi; ++n) out[n] = acc[n - lo];
    }
}

void GreenOperator::apply_adjoint_serial(std::span<const cplx> v, std::span<cplx> out) const {
    if (!cached()) {
        radiate_adjoint_serial(points_, sources_, v, k_, out);
        return;
    }
    const std::size_t ncols = cols();
    std::fill(out.begin(), out.end(), cplx{});
    for (std::size_t j = 0; j < rows(); ++j) {
        const cplx *g = matrix_.data() + j * ncols;
        for (std::size_t n = 0; n < ncols; ++n) out[n] += v[j] * g[n];
    }
}

void GreenOperator::row(std::size_t j, std::span<cplx> out) const {
    if (cached()) {
        std::copy_n(matrix_.data() + j * cols(), cols(), out.begin());
        return;
    }
    for (std::size_t n = 0; n < cols(); ++n) out[n] = g_at(points_[j], sources_[n], k_);
}

void correlation_fold_serial(const GreenOperator &g, std::span<const cplx> u, std::span<const cplx> s,
                             std::span<double> diag, std::span<double> dense) {
    const std::size_t N = g.cols();
    std::fill(diag.begin(), diag.end(), 0.0);
    std::fill(dense.begin(), dense.end(), 0.0);
    std::vector<cplx> grow(N);
    std::vector<double> c(N);
    for (std::size_t j = 0; j < g.rows(); ++j) {
        const cplx uc = std::conj(u[j]);
        if (uc == cplx{}) continue;
        g.row(j, grow);
        for (std::size_t n = 0; n < N; ++n) c[n] = (uc * s[n] * grow[n]).real();
        for (std::size_t n = 0; n < N; ++n) diag[n] += c[n] * c[n];
        if (!dense.empty()) {
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t m = 0; m < N; ++m) dense[n * N + m] += c[n] * c[m];
        }
    }
}

void correlation_fold(const GreenOperator &g, std::span<const cplx> u, std::span<const cplx> s,
                      std::span<double> diag, std::span<double> dense) {
    const std::size_t N = g.cols();
    const std::size_t J = g.rows();
    const Index cols = static_cast<Index>(N);
    std::fill(dense.begin(), dense.end(), 0.0);

    // Materialize c_j in row blocks, then fold; every accumulator sums j in order.
    constexpr std::size_t kRowBlock = 32;
    std::vector<double> cblock(kRowBlock * N);
    std::vector<double> diag_acc(N, 0.0);
    for (std::size_t j0 = 0; j0 < J; j0 += kRowBlock) {
        const std::size_t jn = std::min(kRowBlock, J - j0);
        const Index jn_i = static_cast<Index>(jn);
#pragma omp parallel for schedule(static)
        for (Index b = 0; b < jn_i; ++b) {
            const std::size_t j = j0 + static_cast<std::size_t>(b);
            const cplx uc = std::conj(u[j]);
            double *c = cblock.data() + static_cast<std::size_t>(b) * N;
            for (std::size_t n = 0; n < N; ++n) c[n] = (uc * s[n] * g.at(j, n)).real();
        }
#pragma omp parallel for schedule(static)
        for (Index ni = 0; ni < cols; ++ni) {
            const std::size_t n = static_cast<std::size_t>(ni);
            for (std::size_t b = 0; b < jn; ++b) {
                const double cn = cblock[b * N + n];
                diag_acc[n] += cn * cn;
                if (!dense.empty() && cn != 0.0) {
                    const double *cb = cblock.data() + b * N;
                    double *hrow = dense.data() + n * N;
                    for (std::size_t m = 0; m < N; ++m) hrow[m] += cn * cb[m];
                }
            }
        }
    }
    std::copy(diag_acc.begin(), diag_acc.end(), diag.begin());
}

}  // namespace ris::kernels
