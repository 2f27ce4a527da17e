#include "cdswipt/model.hpp"

#include <doctest.h>

using namespace cdswipt;

TEST_CASE("feasibility gates")
{
    const auto s4 = SystemConfig::symmetric(4, 4, 2, 3, 1.0);
    const auto s5 = SystemConfig::symmetric(5, 5, 2, 3, 1.0);
    const auto s2 = SystemConfig::symmetric(2, 2, 2, 3, 1.0);
    CHECK_FALSE(check_feasible(s4, FeasibilityGate::Strict));
    CHECK(check_feasible(s4, FeasibilityGate::Proper));
    CHECK(check_feasible(s4));
    CHECK(check_feasible(s5, FeasibilityGate::Strict));
    CHECK(check_feasible(s5, FeasibilityGate::Proper));
    CHECK_FALSE(check_feasible(s2, FeasibilityGate::Strict));
    CHECK_FALSE(check_feasible(s2, FeasibilityGate::Proper));
}

TEST_CASE("effective decoding noise")
{
    auto cfg = SystemConfig::symmetric(5, 5, 2, 3, 1.0, 0.5, 1.0, 0.1);
    CHECK(sigma_id2(cfg, 0) == doctest::Approx(1.2));
    cfg.set_rho(1.0);
    CHECK(sigma_id2(cfg, 1) == doctest::Approx(1.1));
    cfg.delta2 = 0.0;
    cfg.set_rho(0.3);
    CHECK(sigma_id2(cfg, 2) == doctest::Approx(1.0));

    cfg.delta2 = 0.1;
    double prev = 1e300;
    for (double rho = 0.05; rho <= 1.0; rho += 0.05) {
        cfg.set_rho(rho);
        const double s = sigma_id2(cfg, 0);
        CHECK(s < prev);
        prev = s;
    }

    cfg.set_rho(0.0);
    try {
        sigma_id2(cfg, 0);
        FAIL("expected SplitAllEnergy");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::SplitAllEnergy);
    }
    CHECK(design_noise(cfg, 0) == doctest::Approx(1.1));
}

TEST_CASE("validate rejects out-of-range fields")
{
    auto cfg = SystemConfig::symmetric(5, 5, 2, 3, 1.0);
    CHECK_NOTHROW(validate(cfg));
    auto bad = cfg;
    bad.zeta = 1.0;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = cfg;
    bad.rho[1] = 1.5;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = cfg;
    bad.P[0] = 0.0;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = cfg;
    bad.P.pop_back();
    CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("channel realizations are seeded and shaped")
{
    const auto cfg = SystemConfig::symmetric(4, 4, 2, 3, 1.0);
    const ChannelSet a = realize_channels(cfg, 5);
    const ChannelSet b = realize_channels(cfg, 5);
    CHECK(a.users() == 3);
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j) {
            CHECK(a(k, j).rows() == 4);
            CHECK(a(k, j).cols() == 4);
            CHECK((a(k, j) - b(k, j)).norm() == 0.0);
        }
    CHECK((realize_channels(cfg, 6)(0, 0) - a(0, 0)).norm() > 0.0);
}

TEST_CASE("channel power moment")
{
    const auto cfg = SystemConfig::symmetric(4, 4, 2, 1, 1.0);
    Rng rng(31);
    double acc = 0.0;
    const int n = 1000;
    for (int t = 0; t < n; ++t)
        acc += realize_channels(cfg, rng)(0, 0).squaredNorm();
    CHECK(std::abs(acc / n - 16.0) < 0.05 * 16.0);
}

TEST_CASE("stacked Gram matrices")
{
    auto cfg = SystemConfig::symmetric(4, 4, 2, 3, 1.0, 0.3);
    cfg.rho = {0.2, 0.5, 0.9};
    const ChannelSet ch = realize_channels(cfg, 77);
    const StackedChannel st = stack_channels(cfg, ch);
    for (int j = 0; j < 3; ++j) {
        CMatrix brute = CMatrix::Zero(4, 4);
        for (int k = 0; k < 3; ++k)
            brute += (1.0 - cfg.rho[k]) * ch(k, j).adjoint() * ch(k, j);
        CHECK((st.gram[j] - brute).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((st.gram[j] - st.gram[j].adjoint()).norm() < 1e-12);
        CHECK((st.stack[j].adjoint() * st.stack[j] - st.gram[j]).norm() < 1e-10);
    }

    cfg.set_rho(1.0);
    for (const auto& g : stack_channels(cfg, ch).gram)
        CHECK(g.norm() == 0.0);

    auto one = SystemConfig::symmetric(1, 1, 1, 1, 1.0, 0.0);
    CMatrix h(1, 1);
    h << 2.0;
    const StackedChannel s1 = stack_channels(one, ChannelSet(1, {h}));
    CHECK(std::abs(s1.gram[0](0, 0) - Complex(4.0)) < 1e-14);
}

TEST_CASE("Gram matrices grow in Loewner order with harvesting share")
{
    auto cfg = SystemConfig::symmetric(4, 4, 2, 3, 1.0, 0.6);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const ChannelSet ch = realize_channels(cfg, 300 + s);
        auto more = cfg;
        more.rho[s % 3] = 0.2;
        const auto g0 = stack_channels(cfg, ch).gram;
        const auto g1 = stack_channels(more, ch).gram;
        for (int j = 0; j < 3; ++j) {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(g1[j] - g0[j]);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        }
    }
}
