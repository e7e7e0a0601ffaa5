// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel field kernels. Every parallel kernel splits work over output
// entries only; each output is accumulated sequentially in a fixed index
// order, so results are bit-identical for any thread count. The *_serial
// variants are the single-threaded references the tests compare against.

#include <cstddef>
#include <span>
#include <vector>

#include "ris/geometry.hpp"

namespace ris::kernels {

/// Minimum allowed observation-to-source distance (m).
inline constexpr double kMinDistance = 1e-6;

/// out[j] = sum_n amp[n] * e^{ik|p_j - q_n|} / |p_j - q_n|
void radiate_serial(std::span<const Vec3> points, std::span<const Vec3> sources,
                    std::span<const cplx> amp, double k, std::span<cplx> out);
void radiate(std::span<const Vec3> points, std::span<const Vec3> sources, std::span<const cplx> amp,
             double k, std::span<cplx> out);

/// out[n] = sum_j v[j] * e^{ik|p_j - q_n|} / |p_j - q_n|
void radiate_adjoint_serial(std::span<const Vec3> points, std::span<const Vec3> sources,
                            std::span<const cplx> v, double k, std::span<cplx> out);
void radiate_adjoint(std::span<const Vec3> points, std::span<const Vec3> sources, std::span<const cplx> v,
                     double k, std::span<cplx> out);

/// Smallest point-to-source distance; parallel min-reduction.
double min_separation(std::span<const Vec3> points, std::span<const Vec3> sources);

/// Green's operator between a fixed point set and the panel elements. Caches
/// the dense matrix (row-major, points x sources) when it fits in
/// `cache_limit_bytes`, and evaluates on the fly otherwise.
class GreenOperator {
  public:
    GreenOperator() = default;
    GreenOperator(std::vector<Vec3> points, std::vector<Vec3> sources, double k,
                  std::size_t cache_limit_bytes);

    std::size_t rows() const { return points_.size(); }
    std::size_t cols() const { return sources_.size(); }
    bool cached() const { return !matrix_.empty(); }
    std::span<const Vec3> points() const { return points_; }

    cplx at(std::size_t j, std::size_t n) const;

    /// out[j] = sum_n G[j][n] amp[n]
    void apply(std::span<const cplx> amp, std::span<cplx> out) const;
    void apply_serial(std::span<const cplx> amp, std::span<cplx> out) const;
    /// out[n] = sum_j v[j] G[j][n]
    void apply_adjoint(std::span<const cplx> v, std::span<cplx> out) const;
    void apply_adjoint_serial(std::span<const cplx> v, std::span<cplx> out) const;

    /// Row j of the matrix into `out` (size cols()).
    void row(std::size_t j, std::span<cplx> out) const;

  private:
    std::vector<Vec3> points_;
    std::vector<Vec3> sources_;
    double k_ = 0.0;
    std::vector<cplx> matrix_;
};

/// Per-point sensitivity rows c_j[n] = Re{ conj(u_j) * s[n] * G[j][n] } folded
/// into diag[n] = sum_j c_j[n]^2 and, when `dense` is non-empty (size N*N,
/// row-major), dense[n][m] = sum_j c_j[n] c_j[m]. `u` holds unit phasors
/// E_j / |E_j| (zero for excluded points).
void correlation_fold(const GreenOperator &g, std::span<const cplx> u, std::span<const cplx> s,
                      std::span<double> diag, std::span<double> dense);
void correlation_fold_serial(const GreenOperator &g, std::span<const cplx> u, std::span<const cplx> s,
                             std::span<double> diag, std::span<double> dense);

}  // namespace ris::kernels
