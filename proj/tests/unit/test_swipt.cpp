#include "cdswipt/grassmann.hpp"
#include "cdswipt/metrics.hpp"
#include "cdswipt/swipt.hpp"

#include <doctest.h>

#include <cmath>

using namespace cdswipt;

namespace {

double gram_energy(const CMatrix& gram, const CMatrix& v) { return (v.adjoint() * gram * v).trace().real(); }

// Top-d eigenspace by orthogonal iteration, independent of herm_eig.
CMatrix orthogonal_iteration(const CMatrix& g, Index d, std::uint64_t seed)
{
    CMatrix q = sample_grassmann(g.rows(), d, seed).mat();
    for (int it = 0; it < 2000; ++it) {
        Eigen::HouseholderQR<CMatrix> qr(g * q);
        q = qr.householderQ() * CMatrix::Identity(g.rows(), d);
    }
    return q;
}

struct Instance {
    SystemConfig cfg;
    ChannelSet ch;
    IASolution ia;
    MaxEHResult eh;
};

Instance make_instance(int m, std::uint64_t seed, double power = 316.0)
{
    Instance in{SystemConfig::symmetric(m, m, 2, 3, power), {}, {}, {}};
    in.ch = realize_channels(in.cfg, seed);
    in.ia = solve_leakage_min(in.cfg, in.ch, seed + 1);
    in.eh = max_eh_precoders(in.cfg, in.ch);
    return in;
}

std::vector<double> all(const Instance&, double z) { return std::vector<double>(3, z); }

} // namespace

TEST_CASE("max-EH single user diagonal channel")
{
    auto cfg = SystemConfig::symmetric(2, 2, 1, 1, 1.0, 0.0, 1.0, 0.1, 1.0);
    CMatrix h = CMatrix::Zero(2, 2);
    h(0, 0) = 2.0;
    h(1, 1) = 1.0;
    const MaxEHResult eh = max_eh_precoders(cfg, ChannelSet(1, {h}));
    CHECK(eh.max_energy == doctest::Approx(4.0));
    CHECK(std::abs(std::abs(eh.precoders[0].mat()(0, 0)) - 1.0) < 1e-12);
    CHECK(std::abs(eh.precoders[0].mat()(1, 0)) < 1e-12);
}

TEST_CASE("max-EH with an isotropic Gram matrix")
{
    auto cfg = SystemConfig::symmetric(3, 3, 2, 1, 2.0, 0.0, 1.0, 0.1, 0.5);
    const MaxEHResult eh = max_eh_precoders(cfg, ChannelSet(1, {CMatrix::Identity(3, 3)}));
    CHECK(eh.max_energy == doctest::Approx(0.5 * 2.0));
}

TEST_CASE("max-EH needs a harvesting branch")
{
    auto cfg = SystemConfig::symmetric(4, 4, 2, 3, 1.0, 1.0);
    try {
        max_eh_precoders(cfg, realize_channels(cfg, 1));
        FAIL("expected AllPowerToID");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::AllPowerToID);
    }
}

TEST_CASE("max-EH precoders against independent oracles")
{
    const auto cfg = SystemConfig::symmetric(5, 5, 2, 3, 10.0);
    const ChannelSet ch = realize_channels(cfg, 2718);
    const MaxEHResult eh = max_eh_precoders(cfg, ch);
    const StackedChannel st = stack_channels(cfg, ch);
    CHECK(std::abs(total_energy(cfg, ch, eh.precoders) - eh.max_energy) < 1e-8 * eh.max_energy);

    Rng rng(3);
    for (int j = 0; j < 3; ++j) {
        const double best = gram_energy(st.gram[j], eh.precoders[j].mat());
        const CMatrix q = orthogonal_iteration(st.gram[j], 2, 50 + j);
        CHECK((q * q.adjoint() - eh.precoders[j].mat() * eh.precoders[j].mat().adjoint()).norm() < 1e-8);
        double random_best = 0.0;
        for (int t = 0; t < 10000; ++t)
            random_best = std::max(random_best, gram_energy(st.gram[j], sample_grassmann(5, 2, rng).mat()));
        CHECK(random_best <= best + 1e-9);
        MESSAGE("transmitter " << j << ": best of 10^4 random precoders reaches " << random_best / best
                               << " of the optimum");
    }
}

TEST_CASE("z_eh delegates to the chordal distance")
{
    const auto v = sample_grassmann(4, 2, 1);
    MaxEHResult eh;
    eh.precoders = {OrthonormalMatrix::adopt(v.mat() * sample_grassmann(2, 2, 2).mat())};
    CHECK(z_eh({v}, eh)[0] < 1e-12);
    eh.precoders = {null_space(v)};
    CHECK(z_eh({v}, eh)[0] == doctest::Approx(2.0));

    const Instance in = make_instance(5, 10);
    const auto z = z_eh(in.ia.precoders, in.eh);
    for (int j = 0; j < 3; ++j)
        CHECK(z[j] == chordal_distance_sq(in.ia.precoders[j], in.eh.precoders[j]));
}

TEST_CASE("z_bar thresholds")
{
    const auto cfg = SystemConfig::symmetric(5, 5, 2, 3, 120.0); // σ_ID² = 1.2
    CHECK(z_bar(cfg, 2.0, 120.0, 3) == doctest::Approx(0.006));
    CHECK(z_bar(cfg, 2.0, 240.0, 3) == doctest::Approx(0.003));
    CHECK(z_bar(cfg, 1.0 + 1e-12, 120.0, 3) < 1e-12);
    CHECK_THROWS_AS(z_bar(cfg, 1.0, 120.0, 3), Error);
    try {
        z_bar(cfg, 2.0, 1.0, 1);
        FAIL("expected DegenerateK");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DegenerateK);
    }
}

TEST_CASE("clipped renormalization")
{
    RVector q(3);
    q << 4.0, 1.0, 1.0;
    const RVector r = clipped_renormalize(q, 2.0);
    CHECK(r(0) == doctest::Approx(1.0));
    CHECK(r(1) == doctest::Approx(0.5));
    CHECK(r(2) == doctest::Approx(0.5));

    q << 9.0, 3.0, 0.1;
    const RVector c = clipped_renormalize(q, 2.5);
    CHECK(c.sum() == doctest::Approx(2.5));
    CHECK(c.maxCoeff() <= 1.0);
    CHECK(c(0) == doctest::Approx(1.0));
    CHECK(c(1) == doctest::Approx(1.0));

    const RVector z = clipped_renormalize(RVector::Zero(2), 0.5);
    CHECK(z(0) == doctest::Approx(0.25));
    CHECK(z(1) == doctest::Approx(0.25));
}

TEST_CASE("balanced precoders at z = 0 reproduce IA")
{
    const Instance in = make_instance(5, 20);
    for (const BalancedResult& r : {balanced_precoders_iterative(in.cfg, in.ch, in.ia.precoders, in.eh, all(in, 0.0)),
                                    balanced_precoders_noniterative(in.cfg, in.ch, in.ia.precoders, in.eh, all(in, 0.0))}) {
        for (int j = 0; j < 3; ++j)
            CHECK(chordal_distance_sq(r.precoders[j], in.ia.precoders[j]) < 1e-9);
        const double r0 = sum_rate(in.cfg, in.ch, in.ia.precoders, in.ia.decoders);
        const double r1 = sum_rate(in.cfg, in.ch, r.precoders, in.ia.decoders);
        CHECK(std::abs(r1 - r0) < 1e-9 * r0);
        const double e0 = total_energy(in.cfg, in.ch, in.ia.precoders);
        const double e1 = total_energy(in.cfg, in.ch, r.precoders);
        CHECK(std::abs(e1 - e0) < 1e-9 * e0);
    }
}

TEST_CASE("balanced precoders beyond z_eh return the max-EH precoders")
{
    const Instance in = make_instance(4, 30);
    const auto zeh = z_eh(in.ia.precoders, in.eh);
    std::vector<double> z(3);
    for (int j = 0; j < 3; ++j)
        z[j] = zeh[j] + 0.1;
    for (const BalancedResult& r : {balanced_precoders_iterative(in.cfg, in.ch, in.ia.precoders, in.eh, z),
                                    balanced_precoders_noniterative(in.cfg, in.ch, in.ia.precoders, in.eh, z)})
        for (int j = 0; j < 3; ++j) {
            CHECK(r.used_max_eh[j]);
            CHECK((r.precoders[j].mat() - in.eh.precoders[j].mat()).norm() == 0.0);
        }
}

TEST_CASE("iterative balanced precoding invariants")
{
    for (int m : {4, 5})
        for (std::uint64_t s = 0; s < 10; ++s) {
            const Instance in = make_instance(m, 100 + s);
            const StackedChannel st = stack_channels(in.cfg, in.ch);
            for (double z : {0.1, 0.4, 0.8}) {
                BalancedOptions opts;
                opts.keep_iterates = true;
                const auto r = balanced_precoders_iterative(in.cfg, in.ch, in.ia.precoders, in.eh, all(in, z), opts);
                for (int j = 0; j < 3; ++j) {
                    CHECK(r.precoders[j].orthonormality_error() < 1e-9);
                    if (r.used_max_eh[j])
                        continue;
                    CHECK(r.per_user_z[j] <= z + 1e-8);
                    CHECK(r.cross_trace[j] >= -1e-12);
                    const auto& tr = r.objective_trace[j];
                    for (std::size_t i = 1; i < tr.size(); ++i)
                        CHECK(tr[i] >= tr[i - 1]);
                    REQUIRE(r.iterates[j].size() == tr.size());
                    for (std::size_t i = 0; i < tr.size(); ++i)
                        CHECK(std::abs(gram_energy(st.gram[j], r.iterates[j][i]) - tr[i]) < 1e-9 * tr[i]);
                    CHECK(gram_energy(st.gram[j], r.precoders[j].mat())
                          >= gram_energy(st.gram[j], in.ia.precoders[j].mat()) - 1e-9);
                }
            }
        }
}

TEST_CASE("iterative balanced precoding converges quickly at z = 0.1")
{
    const Instance in = make_instance(5, 77);
    BalancedOptions opts;
    opts.max_iters = 8;
    const auto r = balanced_precoders_iterative(in.cfg, in.ch, in.ia.precoders, in.eh, all(in, 0.1), opts);
    for (int j = 0; j < 3; ++j) {
        const auto& tr = r.objective_trace[j];
        CHECK(r.converged[j]);
        CHECK(std::abs(tr.back() - tr[tr.size() - 2]) <= 1e-6 * tr.back());
    }
}

TEST_CASE("cross-term Z-step is also monotone")
{
    const Instance in = make_instance(5, 90);
    BalancedOptions opts;
    opts.z_step = ZStep::CrossTerm;
    opts.max_iters = 20;
    const auto r = balanced_precoders_iterative(in.cfg, in.ch, in.ia.precoders, in.eh, all(in, 0.3), opts);
    for (int j = 0; j < 3; ++j) {
        const auto& tr = r.objective_trace[j];
        for (std::size_t i = 1; i < tr.size(); ++i)
            CHECK(tr[i] >= tr[i - 1]);
        CHECK(r.per_user_z[j] <= 0.3 + 1e-8);
    }
}

TEST_CASE("realized distance equals the target without clipping")
{
    const Instance in = make_instance(5, 44);
    const auto r = balanced_precoders_noniterative(in.cfg, in.ch, in.ia.precoders, in.eh, all(in, 0.1));
    const auto it = balanced_precoders_iterative(in.cfg, in.ch, in.ia.precoders, in.eh, all(in, 0.1));
    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(r.per_user_z[j] - 0.1) < 1e-8);
        CHECK(std::abs(it.per_user_z[j] - 0.1) < 1e-8);
        CHECK(std::abs(r.components[j]->sigma_z.squaredNorm() - 0.1) < 1e-12);
    }
}

TEST_CASE("balanced precoders reject negative targets")
{
    const Instance in = make_instance(4, 3);
    try {
        balanced_precoders_iterative(in.cfg, in.ch, in.ia.precoders, in.eh, {0.1, -0.1, 0.1});
        FAIL("expected BadZ");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::BadZ);
    }
    CHECK_THROWS_AS(energy_bounds(in.cfg, in.ch, in.ia.precoders, in.eh, {0.1, -0.1, 0.1}), Error);
}

TEST_CASE("energy bounds")
{
    const Instance in = make_instance(5, 61);
    const EnergyBounds b0 = energy_bounds(in.cfg, in.ch, in.ia.precoders, in.eh, all(in, 0.0));
    CHECK(std::abs(b0.lower - total_energy(in.cfg, in.ch, in.ia.precoders)) < 1e-12 * b0.lower);
    CHECK(in.eh.max_energy <= b0.upper + 1e-12);

    const auto zeh = z_eh(in.ia.precoders, in.eh);
    const double cap = *std::min_element(zeh.begin(), zeh.end());
    for (double z = 0.05; z <= cap; z += 0.05) {
        const EnergyBounds b = energy_bounds(in.cfg, in.ch, in.ia.precoders, in.eh, all(in, z));
        const auto r = balanced_precoders_iterative(in.cfg, in.ch, in.ia.precoders, in.eh, all(in, z));
        const double q = total_energy(in.cfg, in.ch, r.precoders);
        CHECK(b.lower <= q + 1e-8);
        CHECK(q <= b.upper + 1e-8);
    }
}

TEST_CASE("mean harvested energy against its closed-form approximation")
{
    const auto cfg = SystemConfig::symmetric(5, 5, 2, 3, 1.0);
    Rng rng(404);
    const int n = 500;
    double acc = 0.0;
    for (int t = 0; t < n; ++t) {
        const ChannelSet ch = realize_channels(cfg, rng);
        PrecoderSet v;
        for (int j = 0; j < 3; ++j)
            v.push_back(sample_grassmann(5, 2, rng));
        acc += total_energy(cfg, ch, v);
    }
    const double mean = acc / n;
    const double rb = 0.5;
    const double sum_p = 3.0;
    const double ref = cfg.zeta * rb * 3 * 5 * sum_p;
    const double cap = cfg.zeta * rb * 3 * 5 * 2 * std::pow((15.0 + 2.0) / (30.0 + 1.0), 2.0 / 3.0) * sum_p;
    CHECK(std::abs(mean - ref) < 0.1 * ref);
    CHECK(mean < cap);
}
