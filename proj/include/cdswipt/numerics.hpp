#pragma once

// Dense complex linear algebra used throughout the library: phase-fixed QR,
// Hermitian eigen-decomposition, orthogonal complements and seeded sampling.

#include "cdswipt/error.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>

namespace cdswipt {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Tall complex matrix with orthonormal columns (QᴴQ = I).
///
/// Construction goes through `checked` (verifies the invariant) or `adopt`
/// (caller guarantees it, e.g. the Q factor of a Householder QR).
class OrthonormalMatrix {
public:
    OrthonormalMatrix() = default;

    static OrthonormalMatrix checked(CMatrix m, double tol = 1e-9);
    static OrthonormalMatrix adopt(CMatrix m) { return OrthonormalMatrix(std::move(m)); }

    [[nodiscard]] const CMatrix& mat() const noexcept { return m_; }
    [[nodiscard]] Index rows() const noexcept { return m_.rows(); }
    [[nodiscard]] Index cols() const noexcept { return m_.cols(); }

    /// Frobenius norm of QᴴQ − I.
    [[nodiscard]] double orthonormality_error() const;

private:
    explicit OrthonormalMatrix(CMatrix m) : m_(std::move(m)) {}
    CMatrix m_;
};

struct QrFactors {
    OrthonormalMatrix q; // rows × cols, orthonormal columns
    CMatrix r;           // cols × cols upper triangular, diagonal real ≥ 0
};

struct EigenResult {
    RVector values;           // descending
    OrthonormalMatrix vectors; // column i pairs with values(i)
};

/// Thin QR with the phase of every column chosen so that diag(R) is real and
/// non-negative. Never throws: rank-deficient inputs yield zero diagonal
/// entries in R while Q stays orthonormal.
QrFactors qr_positive(const CMatrix& a);

/// Orthonormal basis of span(A) from `qr_positive`. Throws RankDeficient when
/// the smallest singular value is below 1e-12 times the largest.
OrthonormalMatrix orthonormalize(const CMatrix& a);

/// Polar factor A(AᴴA)^{-1/2}: the unitary/orthonormal matrix nearest to A.
/// Throws RankDeficient on rank-deficient A.
OrthonormalMatrix polar_factor(const CMatrix& a);

/// Eigen-decomposition of a Hermitian positive semidefinite matrix, values
/// sorted descending. The input is symmetrized before decomposition.
EigenResult herm_eig(const CMatrix& a);

/// Orthonormal basis of the orthogonal complement of span(V), M × (M − d).
OrthonormalMatrix null_space(const OrthonormalMatrix& v);

/// Columns `first .. first+count-1` of an orthonormal matrix.
OrthonormalMatrix leading_columns(const OrthonormalMatrix& q, Index count, Index first = 0);

/// log(det(A)) for Hermitian positive definite A via Cholesky.
double log_det_hpd(const CMatrix& a);

/// Splittable seeded generator. `derive` maps (seed, stream) to an independent
/// child seed so that per-trial and per-block streams never share state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), normal_(0.0, 1.0) {}

    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept;

    /// Circularly-symmetric CN(0, 1) sample.
    Complex complex_gaussian();
    double uniform();

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

CMatrix sample_gaussian_matrix(Index rows, Index cols, Rng& rng);
CMatrix sample_gaussian_matrix(Index rows, Index cols, std::uint64_t seed);

/// Haar-uniform point on the Grassmannian G(M, d).
OrthonormalMatrix sample_grassmann(Index m, Index d, Rng& rng);
OrthonormalMatrix sample_grassmann(Index m, Index d, std::uint64_t seed);

/// True when every entry is finite.
bool all_finite(const CMatrix& m);

} // namespace cdswipt
