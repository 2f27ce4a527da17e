#pragma once

#include "cdswipt/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace cdswipt {

/// Squared chordal distance d − ‖AᴴB‖²_F between span(A) and span(B), in [0, d].
double chordal_distance_sq(const OrthonormalMatrix& a, const OrthonormalMatrix& b);

/// Expression of `target` relative to `base`:
///   target = base·X·Y + null(base)·S·Z
/// with X unitary, S orthonormal, Y and Z upper triangular with real
/// non-negative diagonals, tr(ZᴴZ) = d_c²(target, base), YᴴY = I − ZᴴZ.
struct CDDecomposition {
    OrthonormalMatrix base;
    OrthonormalMatrix target;
    OrthonormalMatrix null_base; // null(base), M × (M − d)
    OrthonormalMatrix X;         // d × d
    CMatrix Y;                   // d × d
    OrthonormalMatrix S;         // (M − d) × d
    CMatrix Z;                   // d × d

    [[nodiscard]] CMatrix reconstruct() const;
};

/// Requires M >= 2d. When baseᴴ·target is singular the zero diagonal entries
/// of Y are kept and X is the (still unitary) Householder completion.
CDDecomposition cd_decompose(const OrthonormalMatrix& target, const OrthonormalMatrix& base);

/// Precoder displaced from `base` by squared chordal distance z:
///   V_D = base·X·Σ_Y + null(base)·S·Σ_Z,  Σ_Y = (I − Σ_Z²)^{1/2}.
/// `sigma_z` holds the diagonal of Σ_Z; its squared entries must sum to z.
OrthonormalMatrix displace(const OrthonormalMatrix& base, double z, const OrthonormalMatrix& x,
                           const OrthonormalMatrix& s, const RVector& sigma_z);

/// Same, with an explicitly supplied complement basis of `base`.
CMatrix displace_with_null(const OrthonormalMatrix& base, const OrthonormalMatrix& null_base,
                           const CMatrix& x, const OrthonormalMatrix& s, const RVector& sigma_z);

struct Codebook {
    int M = 0;
    int d = 0;
    int bits = 0;
    std::vector<OrthonormalMatrix> entries; // exactly 2^bits

    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
};

inline constexpr int kMaxCodebookBits = 16;

/// 2^bits independent uniform Grassmannian points.
Codebook build_codebook(int m, int d, int bits, std::uint64_t seed);

/// Nearest entry in chordal distance; ties go to the lowest index.
std::pair<std::size_t, OrthonormalMatrix> quantize(const OrthonormalMatrix& target, const Codebook& cb);

/// Binary layout (little-endian): uint32 M, uint32 d, uint32 bits, then for
/// each entry its M·d elements in row-major order as (re, im) float64 pairs.
void write_codebook(const Codebook& cb, const std::filesystem::path& path);
Codebook read_codebook(const std::filesystem::path& path);

} // namespace cdswipt
