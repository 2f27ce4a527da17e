#include "cdswipt/grassmann.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace cdswipt;

namespace {

OrthonormalMatrix col(std::initializer_list<Complex> v)
{
    CMatrix m(static_cast<Index>(v.size()), 1);
    Index i = 0;
    for (const Complex& c : v)
        m(i++, 0) = c;
    return OrthonormalMatrix::checked(m);
}

double projector_form(const OrthonormalMatrix& a, const OrthonormalMatrix& b)
{
    return 0.5 * (a.mat() * a.mat().adjoint() - b.mat() * b.mat().adjoint()).squaredNorm();
}

} // namespace

TEST_CASE("chordal distance basics")
{
    const auto v = sample_grassmann(5, 2, 1);
    CHECK(chordal_distance_sq(v, v) < 1e-12);
    CHECK(chordal_distance_sq(col({1.0, 0.0}), col({0.0, 1.0})) == doctest::Approx(1.0));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(chordal_distance_sq(col({1.0, 0.0}), col({s, s})) == doctest::Approx(0.5));
    CHECK_THROWS_AS(chordal_distance_sq(sample_grassmann(5, 2, 1), sample_grassmann(4, 2, 1)), Error);
}

TEST_CASE("chordal distance definitions agree and are rotation invariant")
{
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto a = sample_grassmann(5, 2, rng);
        const auto b = sample_grassmann(5, 2, rng);
        const double dc = chordal_distance_sq(a, b);
        CHECK(std::abs(dc - projector_form(a, b)) < 1e-9);
        CHECK(std::abs(dc - chordal_distance_sq(b, a)) < 1e-12);
        const auto r = sample_grassmann(2, 2, rng);
        const auto ar = OrthonormalMatrix::adopt(a.mat() * r.mat());
        CHECK(std::abs(chordal_distance_sq(ar, b) - dc) < 1e-9);
        CHECK(chordal_distance_sq(a, ar) < 1e-12);
    }
}

TEST_CASE("CD decomposition of identical subspaces")
{
    const auto v = sample_grassmann(5, 2, 3);
    const CDDecomposition dec = cd_decompose(v, v);
    CHECK((dec.X.mat() - CMatrix::Identity(2, 2)).norm() < 1e-10);
    CHECK((dec.Y - CMatrix::Identity(2, 2)).norm() < 1e-10);
    CHECK(dec.Z.norm() < 1e-10);
    CHECK((dec.reconstruct() - v.mat()).norm() < 1e-9);
}

TEST_CASE("CD decomposition identities on random pairs")
{
    Rng rng(17);
    for (int t = 0; t < 50; ++t) {
        const auto target = sample_grassmann(5, 2, rng);
        const auto base = sample_grassmann(5, 2, rng);
        const CDDecomposition dec = cd_decompose(target, base);
        CHECK((dec.reconstruct() - target.mat()).norm() < 1e-9);
        CHECK(std::abs((dec.Z.adjoint() * dec.Z).trace().real() - chordal_distance_sq(target, base)) < 1e-9);
        CHECK((dec.Y.adjoint() * dec.Y - (CMatrix::Identity(2, 2) - dec.Z.adjoint() * dec.Z)).norm() < 1e-9);
        for (Index i = 0; i < 2; ++i) {
            CHECK(dec.Y(i, i).real() > 0.0);
            CHECK(dec.Z(i, i).real() >= 0.0);
        }
        CHECK(dec.X.orthonormality_error() < 1e-9);
        CHECK(dec.S.orthonormality_error() < 1e-9);
    }
}

TEST_CASE("CD decomposition at maximal distance")
{
    const auto base = sample_grassmann(4, 2, 8);
    const auto target = OrthonormalMatrix::adopt(null_space(base).mat());
    const CDDecomposition dec = cd_decompose(target, base);
    CHECK(dec.Y.norm() < 1e-9);
    CHECK(std::abs((dec.Z.adjoint() * dec.Z).trace().real() - 2.0) < 1e-9);
    CHECK((dec.reconstruct() - target.mat()).norm() < 1e-9);
    CHECK(dec.X.orthonormality_error() < 1e-9);
}

TEST_CASE("CD decomposition needs M >= 2d")
{
    CHECK_THROWS_AS(cd_decompose(sample_grassmann(3, 2, 1), sample_grassmann(3, 2, 2)), Error);
}

TEST_CASE("displacement hits the requested distance")
{
    const auto base = sample_grassmann(5, 2, 4);
    const auto x = sample_grassmann(2, 2, 5);
    const auto s = sample_grassmann(3, 2, 6);

    RVector zero = RVector::Zero(2);
    const auto same = displace(base, 0.0, x, s, zero);
    CHECK((same.mat() - base.mat() * x.mat()).norm() < 1e-12);

    RVector full = RVector::Ones(2);
    const auto far = displace(base, 2.0, x, s, full);
    CHECK((far.mat().adjoint() * base.mat()).norm() < 1e-10);
    CHECK(chordal_distance_sq(far, base) == doctest::Approx(2.0));

    RVector mixed(2);
    mixed << 0.3, std::sqrt(0.8 - 0.09);
    const auto mid = displace(base, 0.8, x, s, mixed);
    CHECK(mid.orthonormality_error() < 1e-9);
    CHECK(std::abs(chordal_distance_sq(mid, base) - 0.8) < 1e-9);
    const CDDecomposition dec = cd_decompose(mid, base);
    CHECK(std::abs((dec.Z.adjoint() * dec.Z).trace().real() - 0.8) < 1e-8);
}

TEST_CASE("displacement of a line in C²")
{
    const auto base = col({1.0, 0.0});
    const auto x = col({1.0});
    const auto s = col({1.0});
    RVector z(1);
    z << 0.5;
    const auto v = displace(base, 0.25, x, s, z);
    // null(e₁) is spanned by a unit-modulus multiple of e₂.
    CHECK(std::abs(v.mat()(0, 0) - Complex(std::sqrt(0.75))) < 1e-12);
    CHECK(std::abs(std::abs(v.mat()(1, 0)) - 0.5) < 1e-12);
    CHECK(chordal_distance_sq(v, base) == doctest::Approx(0.25));
}

TEST_CASE("displacement argument checks")
{
    const auto base = sample_grassmann(5, 2, 4);
    const auto x = sample_grassmann(2, 2, 5);
    const auto s = sample_grassmann(3, 2, 6);
    RVector bad(2);
    bad << 0.5, 0.5;
    try {
        displace(base, 0.8, x, s, bad);
        FAIL("expected BadDistance");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::BadDistance);
    }
    bad << 1.2, 0.0;
    CHECK_THROWS_AS(displace(base, 1.44, x, s, bad), Error);
}

TEST_CASE("codebook construction")
{
    CHECK(build_codebook(5, 2, 0, 1).size() == 1);
    const Codebook cb = build_codebook(5, 2, 8, 2);
    CHECK(cb.size() == 256);
    for (const auto& e : cb.entries)
        CHECK(e.orthonormality_error() < 1e-9);
    try {
        build_codebook(5, 2, 17, 1);
        FAIL("expected TooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TooLarge);
    }
    const Codebook again = build_codebook(5, 2, 8, 2);
    CHECK((again.entries[100].mat() - cb.entries[100].mat()).norm() == 0.0);
}

TEST_CASE("quantization picks the nearest entry")
{
    const Codebook cb = build_codebook(5, 2, 4, 3);
    auto [idx, entry] = quantize(cb.entries[5], cb);
    CHECK(idx == 5);
    CHECK(chordal_distance_sq(entry, cb.entries[5]) < 1e-12);

    Codebook two{2, 1, 1, {col({1.0, 0.0}), col({0.0, 1.0})}};
    const double n = std::sqrt(0.9 * 0.9 + 0.436 * 0.436);
    CHECK(quantize(col({0.9 / n, 0.436 / n}), two).first == 0);

    // Equal distance to both entries: lowest index wins.
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(quantize(col({s, s}), two).first == 0);

    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
        const auto target = sample_grassmann(5, 2, rng);
        const auto [i, e] = quantize(target, cb);
        double best = 1e300;
        for (const auto& c : cb.entries)
            best = std::min(best, chordal_distance_sq(target, c));
        CHECK(chordal_distance_sq(target, e) == best);
    }
}

TEST_CASE("codebook distortion stays below d")
{
    const Codebook cb = build_codebook(5, 2, 8, 12);
    Rng rng(13);
    double acc = 0.0;
    for (int t = 0; t < 500; ++t) {
        const auto target = sample_grassmann(5, 2, rng);
        acc += chordal_distance_sq(target, quantize(target, cb).second);
    }
    const double mean = acc / 500.0;
    CHECK(mean < 2.0);
    MESSAGE("mean quantization distance " << mean << ", proxy 2^(-b/(d(M-d))) = " << std::pow(2.0, -8.0 / 6.0));
}

TEST_CASE("codebook file round trip")
{
    const Codebook cb = build_codebook(4, 2, 3, 21);
    const auto path = std::filesystem::temp_directory_path() / "cdswipt_codebook_test.bin";
    write_codebook(cb, path);
    CHECK(std::filesystem::file_size(path) == 12 + 8 * 4 * 2 * 16);
    const Codebook back = read_codebook(path);
    CHECK(back.M == 4);
    CHECK(back.d == 2);
    CHECK(back.bits == 3);
    REQUIRE(back.size() == 8);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK((back.entries[i].mat() - cb.entries[i].mat()).norm() == 0.0);

    std::ifstream raw(path, std::ios::binary);
    unsigned char head[4];
    raw.read(reinterpret_cast<char*>(head), 4);
    CHECK(head[0] == 4);
    CHECK(head[1] == 0);
    std::filesystem::remove(path);

    std::ofstream trunc(path, std::ios::binary);
    trunc.write("\x04\x00\x00\x00", 4);
    trunc.close();
    CHECK_THROWS_AS(read_codebook(path), Error);
    std::filesystem::remove(path);
}
