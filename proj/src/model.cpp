#include "cdswipt/model.hpp"

#include <cmath>
#include <string>

namespace cdswipt {

SystemConfig SystemConfig::symmetric(int m, int n, int d, int k, double power, double rho,
                                     double sigma2, double delta2, double zeta)
{
    SystemConfig cfg;
    cfg.M = m;
    cfg.N = n;
    cfg.d = d;
    cfg.K = k;
    cfg.P.assign(k, power);
    cfg.rho.assign(k, rho);
    cfg.sigma2 = sigma2;
    cfg.delta2 = delta2;
    cfg.zeta = zeta;
    return cfg;
}

void validate(const SystemConfig& cfg)
{
    auto fail = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
    if (cfg.M < 1 || cfg.N < 1 || cfg.d < 1 || cfg.K < 1)
        fail("dimensions must be positive");
    if (cfg.d > cfg.M || cfg.d > cfg.N)
        fail("d must not exceed M or N");
    if (static_cast<int>(cfg.P.size()) != cfg.K || static_cast<int>(cfg.rho.size()) != cfg.K)
        fail("P and rho need one entry per user");
    for (double p : cfg.P)
        if (!(p > 0.0) || !std::isfinite(p))
            fail("transmit powers must be positive");
    for (double r : cfg.rho)
        if (!(r >= 0.0 && r <= 1.0))
            fail("splitting ratios must lie in [0, 1]");
    if (!(cfg.zeta > 0.0 && cfg.zeta < 1.0))
        fail("conversion efficiency must lie in (0, 1)");
    if (!(cfg.sigma2 > 0.0) || !(cfg.delta2 >= 0.0))
        fail("noise variances must be positive");
}

bool check_feasible(const SystemConfig& cfg, FeasibilityGate gate)
{
    const int extra = gate == FeasibilityGate::Strict ? 2 : 1;
    return cfg.M >= 2 * cfg.d && cfg.M + cfg.N - (cfg.K + extra) * cfg.d >= 0;
}

double sigma_id2(const SystemConfig& cfg, int k)
{
    const double rho = cfg.rho.at(k);
    if (!(rho > 0.0))
        throw Error(Errc::SplitAllEnergy, "receiver " + std::to_string(k) + " has no decoding branch");
    return cfg.sigma2 * (1.0 + cfg.delta2 / (rho * cfg.sigma2));
}

double design_noise(const SystemConfig& cfg, int k)
{
    return cfg.rho.at(k) > 0.0 ? sigma_id2(cfg, k) : cfg.sigma2 + cfg.delta2;
}

ChannelSet::ChannelSet(int k, std::vector<CMatrix> h) : k_(k), h_(std::move(h))
{
    if (static_cast<int>(h_.size()) != k * k)
        throw Error(Errc::DimensionError, "channel set needs K*K matrices");
    for (const auto& m : h_)
        if (!all_finite(m))
            throw Error(Errc::InvalidArgument, "channel entries must be finite");
}

double ChannelSet::total_power() const
{
    double acc = 0.0;
    for (const auto& m : h_)
        acc += m.squaredNorm();
    return acc;
}

ChannelSet realize_channels(const SystemConfig& cfg, Rng& rng)
{
    std::vector<CMatrix> h;
    h.reserve(static_cast<std::size_t>(cfg.K * cfg.K));
    for (int k = 0; k < cfg.K; ++k)
        for (int j = 0; j < cfg.K; ++j)
            h.push_back(sample_gaussian_matrix(cfg.N, cfg.M, rng));
    return ChannelSet(cfg.K, std::move(h));
}

ChannelSet realize_channels(const SystemConfig& cfg, std::uint64_t seed)
{
    Rng rng(seed);
    return realize_channels(cfg, rng);
}

StackedChannel stack_channels(const SystemConfig& cfg, const ChannelSet& ch)
{
    StackedChannel out;
    out.stack.reserve(cfg.K);
    out.gram.reserve(cfg.K);
    for (int j = 0; j < cfg.K; ++j) {
        CMatrix stack(static_cast<Index>(cfg.K) * cfg.N, cfg.M);
        CMatrix gram = CMatrix::Zero(cfg.M, cfg.M);
        for (int k = 0; k < cfg.K; ++k) {
            const double w = cfg.rho_bar(k);
            stack.middleRows(static_cast<Index>(k) * cfg.N, cfg.N) = std::sqrt(w) * ch(k, j);
            gram.noalias() += w * (ch(k, j).adjoint() * ch(k, j));
        }
        out.stack.push_back(std::move(stack));
        out.gram.push_back(0.5 * (gram + gram.adjoint()));
    }
    return out;
}

} // namespace cdswipt
