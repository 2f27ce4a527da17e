#include "cdswipt/grassmann.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

namespace cdswipt {

double chordal_distance_sq(const OrthonormalMatrix& a, const OrthonormalMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(Errc::DimensionError, "chordal distance needs equal shapes");
    const double d = static_cast<double>(a.cols());
    const double overlap = (a.mat().adjoint() * b.mat()).squaredNorm();
    return std::clamp(d - overlap, 0.0, d);
}

CMatrix CDDecomposition::reconstruct() const
{
    return base.mat() * X.mat() * Y + null_base.mat() * S.mat() * Z;
}

CDDecomposition cd_decompose(const OrthonormalMatrix& target, const OrthonormalMatrix& base)
{
    if (target.rows() != base.rows() || target.cols() != base.cols())
        throw Error(Errc::DimensionError, "decomposition needs equal shapes");
    if (base.rows() < 2 * base.cols())
        throw Error(Errc::DimensionError, "decomposition needs M >= 2d");

    OrthonormalMatrix null_base = null_space(base);
    QrFactors xy = qr_positive(base.mat().adjoint() * target.mat());
    QrFactors sz = qr_positive(null_base.mat().adjoint() * target.mat());
    return CDDecomposition{base,         target,       std::move(null_base), std::move(xy.q),
                           std::move(xy.r), std::move(sz.q), std::move(sz.r)};
}

namespace {

void check_sigma_z(double z, const RVector& sigma_z)
{
    for (Index i = 0; i < sigma_z.size(); ++i)
        if (!(sigma_z(i) >= 0.0 && sigma_z(i) <= 1.0))
            throw Error(Errc::BadDistance, "Sigma_Z entries must lie in [0, 1]");
    if (std::abs(sigma_z.squaredNorm() - z) > 1e-9)
        throw Error(Errc::BadDistance, "trace(Sigma_Z^2) must equal z");
}

} // namespace

CMatrix displace_with_null(const OrthonormalMatrix& base, const OrthonormalMatrix& null_base,
                           const CMatrix& x, const OrthonormalMatrix& s, const RVector& sigma_z)
{
    const RVector sigma_y = (1.0 - sigma_z.array().square()).max(0.0).sqrt().matrix();
    return base.mat() * x * sigma_y.cast<Complex>().asDiagonal()
         + null_base.mat() * s.mat() * sigma_z.cast<Complex>().asDiagonal();
}

OrthonormalMatrix displace(const OrthonormalMatrix& base, double z, const OrthonormalMatrix& x,
                           const OrthonormalMatrix& s, const RVector& sigma_z)
{
    const Index m = base.rows();
    const Index d = base.cols();
    if (x.rows() != d || x.cols() != d || s.rows() != m - d || s.cols() != d || sigma_z.size() != d)
        throw Error(Errc::DimensionError, "displacement component shapes do not match");
    if (!(z >= 0.0 && z <= static_cast<double>(d) + 1e-12))
        throw Error(Errc::BadDistance, "z must lie in [0, d]");
    check_sigma_z(z, sigma_z);
    return OrthonormalMatrix::adopt(displace_with_null(base, null_space(base), x.mat(), s, sigma_z));
}

Codebook build_codebook(int m, int d, int bits, std::uint64_t seed)
{
    if (bits < 0)
        throw Error(Errc::InvalidArgument, "codebook bits must be non-negative");
    if (bits > kMaxCodebookBits)
        throw Error(Errc::TooLarge, "codebook larger than 2^16 entries");
    Codebook cb{m, d, bits, {}};
    const std::size_t n = std::size_t{1} << bits;
    cb.entries.reserve(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        cb.entries.push_back(sample_grassmann(m, d, rng));
    return cb;
}

std::pair<std::size_t, OrthonormalMatrix> quantize(const OrthonormalMatrix& target, const Codebook& cb)
{
    if (cb.entries.empty())
        throw Error(Errc::InvalidArgument, "empty codebook");
    if (target.rows() != cb.M || target.cols() != cb.d)
        throw Error(Errc::DimensionError, "codebook shape does not match target");
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cb.entries.size(); ++i) {
        const double dist = chordal_distance_sq(target, cb.entries[i]);
        if (dist < best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    return {best, cb.entries[best]};
}

namespace {

template <typename T>
void put_le(std::ostream& os, T value)
{
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
    os.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& is)
{
    std::array<unsigned char, sizeof(T)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!is)
        throw Error(Errc::IoError, "truncated codebook file");
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
}

} // namespace

void write_codebook(const Codebook& cb, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(cb.M));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(cb.d));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(cb.bits));
    for (const auto& e : cb.entries)
        for (Index r = 0; r < e.rows(); ++r)
            for (Index c = 0; c < e.cols(); ++c) {
                put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(e.mat()(r, c).real()));
                put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(e.mat()(r, c).imag()));
            }
    if (!os)
        throw Error(Errc::IoError, "failed writing " + path.string());
}

Codebook read_codebook(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(Errc::IoError, "cannot open " + path.string());
    Codebook cb;
    cb.M = static_cast<int>(get_le<std::uint32_t>(is));
    cb.d = static_cast<int>(get_le<std::uint32_t>(is));
    cb.bits = static_cast<int>(get_le<std::uint32_t>(is));
    if (cb.bits > kMaxCodebookBits || cb.M < cb.d || cb.d < 1)
        throw Error(Errc::IoError, "corrupt codebook header");
    const std::size_t n = std::size_t{1} << cb.bits;
    cb.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        CMatrix m(cb.M, cb.d);
        for (Index r = 0; r < m.rows(); ++r)
            for (Index c = 0; c < m.cols(); ++c) {
                const double re = std::bit_cast<double>(get_le<std::uint64_t>(is));
                const double im = std::bit_cast<double>(get_le<std::uint64_t>(is));
                m(r, c) = Complex(re, im);
            }
        cb.entries.push_back(OrthonormalMatrix::checked(std::move(m)));
    }
    return cb;
}

} // namespace cdswipt
