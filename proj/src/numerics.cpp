#include "cdswipt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace cdswipt {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case Errc::DimensionError: return "DimensionError";
    case Errc::SplitAllEnergy: return "SplitAllEnergy";
    case Errc::SingularChannel: return "SingularChannel";
    case Errc::BadDistance: return "BadDistance";
    case Errc::TooLarge: return "TooLarge";
    case Errc::AllPowerToID: return "AllPowerToID";
    case Errc::BadZ: return "BadZ";
    case Errc::DegenerateK: return "DegenerateK";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

OrthonormalMatrix OrthonormalMatrix::checked(CMatrix m, double tol)
{
    if (m.rows() < m.cols())
        throw Error(Errc::DimensionError, "orthonormal matrix needs rows >= cols");
    OrthonormalMatrix q(std::move(m));
    if (!(q.orthonormality_error() < tol))
        throw Error(Errc::InvalidArgument, "columns are not orthonormal");
    return q;
}

double OrthonormalMatrix::orthonormality_error() const
{
    const CMatrix g = m_.adjoint() * m_;
    return (g - CMatrix::Identity(g.rows(), g.cols())).norm();
}

QrFactors qr_positive(const CMatrix& a)
{
    const Index m = a.rows();
    const Index n = a.cols();
    if (m < n)
        throw Error(Errc::DimensionError, "QR needs rows >= cols");

    Eigen::HouseholderQR<CMatrix> qr(a);
    CMatrix q = qr.householderQ() * CMatrix::Identity(m, n);
    CMatrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();

    for (Index i = 0; i < n; ++i) {
        const double mag = std::abs(r(i, i));
        if (mag == 0.0)
            continue;
        const Complex phase = r(i, i) / mag;
        q.col(i) *= phase;
        r.row(i) *= std::conj(phase);
        r(i, i) = mag;
    }
    return {OrthonormalMatrix::adopt(std::move(q)), std::move(r)};
}

namespace {

void require_full_rank(const CMatrix& a)
{
    const RVector sv = Eigen::JacobiSVD<CMatrix>(a).singularValues();
    const double largest = sv.size() > 0 ? sv(0) : 0.0;
    const double smallest = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
    if (!(largest > 0.0) || !(smallest > 1e-12 * largest))
        throw Error(Errc::RankDeficient, "columns are linearly dependent");
}

} // namespace

OrthonormalMatrix orthonormalize(const CMatrix& a)
{
    if (a.rows() < a.cols())
        throw Error(Errc::DimensionError, "orthonormalize needs rows >= cols");
    require_full_rank(a);
    return qr_positive(a).q;
}

OrthonormalMatrix polar_factor(const CMatrix& a)
{
    if (a.rows() < a.cols())
        throw Error(Errc::DimensionError, "polar factor needs rows >= cols");
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || !(sv(sv.size() - 1) > 1e-12 * sv(0)))
        throw Error(Errc::RankDeficient, "polar factor of a rank-deficient matrix");
    return OrthonormalMatrix::adopt(svd.matrixU() * svd.matrixV().adjoint());
}

EigenResult herm_eig(const CMatrix& a)
{
    if (a.rows() != a.cols())
        throw Error(Errc::DimensionError, "eigen-decomposition needs a square matrix");
    const double scale = a.norm();
    if ((a - a.adjoint()).norm() > 1e-8 * scale)
        throw Error(Errc::NotHermitian, "matrix is not Hermitian");

    const CMatrix sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
    const Index n = a.rows();

    // Eigen returns ascending order; reverse to descending.
    RVector values(n);
    CMatrix vectors(n, n);
    for (Index i = 0; i < n; ++i) {
        values(i) = es.eigenvalues()(n - 1 - i);
        vectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    const double spectral = n > 0 ? std::max(std::abs(values(0)), std::abs(values(n - 1))) : 0.0;
    if (n > 0 && values(n - 1) < -1e-10 * std::max(1.0, spectral))
        throw Error(Errc::NotPositiveSemidefinite, "matrix has a negative eigenvalue");
    return {std::move(values), OrthonormalMatrix::adopt(std::move(vectors))};
}

OrthonormalMatrix null_space(const OrthonormalMatrix& v)
{
    const Index m = v.rows();
    const Index d = v.cols();
    if (m <= d)
        throw Error(Errc::DimensionError, "null space needs M > d");
    Eigen::HouseholderQR<CMatrix> qr(v.mat());
    CMatrix full = qr.householderQ() * CMatrix::Identity(m, m);
    return OrthonormalMatrix::adopt(full.rightCols(m - d));
}

OrthonormalMatrix leading_columns(const OrthonormalMatrix& q, Index count, Index first)
{
    if (first < 0 || count < 0 || first + count > q.cols())
        throw Error(Errc::DimensionError, "column range out of bounds");
    return OrthonormalMatrix::adopt(q.mat().middleCols(first, count));
}

double log_det_hpd(const CMatrix& a)
{
    Eigen::LLT<CMatrix> llt(0.5 * (a + a.adjoint()));
    if (llt.info() != Eigen::Success)
        throw Error(Errc::NotPositiveSemidefinite, "matrix is not positive definite");
    double acc = 0.0;
    const CMatrix& l = llt.matrixLLT();
    for (Index i = 0; i < a.rows(); ++i)
        acc += 2.0 * std::log(l(i, i).real());
    return acc;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) noexcept
{
    // SplitMix64 finalizer applied to a combination of seed and stream id.
    auto mix = [](std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    return mix(mix(seed) ^ mix(stream + 0x632BE59BD9B4E019ULL));
}

Complex Rng::complex_gaussian()
{
    constexpr double s = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
}

double Rng::uniform()
{
    return uniform_(engine_);
}

CMatrix sample_gaussian_matrix(Index rows, Index cols, Rng& rng)
{
    if (rows < 1 || cols < 1)
        throw Error(Errc::DimensionError, "matrix dimensions must be positive");
    CMatrix h(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            h(r, c) = rng.complex_gaussian();
    return h;
}

CMatrix sample_gaussian_matrix(Index rows, Index cols, std::uint64_t seed)
{
    Rng rng(seed);
    return sample_gaussian_matrix(rows, cols, rng);
}

OrthonormalMatrix sample_grassmann(Index m, Index d, Rng& rng)
{
    if (d < 1 || m < d)
        throw Error(Errc::DimensionError, "Grassmannian sample needs M >= d >= 1");
    // A Gaussian matrix is full rank with probability one; resample otherwise.
    for (;;) {
        CMatrix g = sample_gaussian_matrix(m, d, rng);
        try {
            return orthonormalize(g);
        } catch (const Error&) {
        }
    }
}

OrthonormalMatrix sample_grassmann(Index m, Index d, std::uint64_t seed)
{
    Rng rng(seed);
    return sample_grassmann(m, d, rng);
}

bool all_finite(const CMatrix& m)
{
    return m.allFinite();
}

} // namespace cdswipt
