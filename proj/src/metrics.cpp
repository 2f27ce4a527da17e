#include "cdswipt/metrics.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace cdswipt {

std::vector<double> per_user_rates(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v,
                                   const DecoderSet& u)
{
    std::vector<double> rates;
    rates.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k) {
        const double noise = sigma_id2(cfg, k);
        CMatrix interference = noise * CMatrix::Identity(cfg.d, cfg.d);
        for (int j = 0; j < cfg.K; ++j)
            if (j != k) {
                const CMatrix h = u[k].mat().adjoint() * ch(k, j) * v[j].mat();
                interference.noalias() += cfg.per_stream_power(j) * (h * h.adjoint());
            }
        const CMatrix h = u[k].mat().adjoint() * ch(k, k) * v[k].mat();
        CMatrix total = interference + cfg.per_stream_power(k) * (h * h.adjoint());
        // log|I + S R⁻¹| = log|R + S| − log|R|.
        const double nats = log_det_hpd(0.5 * (total + total.adjoint()))
                          - log_det_hpd(0.5 * (interference + interference.adjoint()));
        rates.push_back(std::max(nats, 0.0) / std::numbers::ln2);
    }
    return rates;
}

double sum_rate(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v, const DecoderSet& u)
{
    const auto r = per_user_rates(cfg, ch, v, u);
    return std::accumulate(r.begin(), r.end(), 0.0);
}

std::vector<double> per_user_energy(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v,
                                    EnergyMode mode)
{
    std::vector<double> q;
    q.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k) {
        double received = 0.0;
        for (int j = 0; j < cfg.K; ++j)
            received += cfg.per_stream_power(j) * (ch(k, j) * v[j].mat()).squaredNorm();
        if (mode == EnergyMode::Exact)
            received += cfg.N * cfg.sigma2;
        q.push_back(cfg.zeta * cfg.rho_bar(k) * received);
    }
    return q;
}

double total_energy(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v, EnergyMode mode)
{
    const auto q = per_user_energy(cfg, ch, v, mode);
    return std::accumulate(q.begin(), q.end(), 0.0);
}

std::vector<double> rate_loss_bound(const SystemConfig& cfg, const std::vector<double>& z, double power)
{
    if (static_cast<int>(z.size()) != cfg.K)
        throw Error(Errc::DimensionError, "need one distance per user");
    const double m = cfg.M;
    const double d = cfg.d;
    const double md = m / (d * (m - d));
    std::vector<double> out;
    out.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k) {
        double others = 0.0;
        for (int j = 0; j < cfg.K; ++j)
            if (j != k)
                others += z[j];
        out.push_back(d * std::log2(1.0 + power / sigma_id2(cfg, k) * md * others));
    }
    return out;
}

double qpsk_awgn_ser(double snr_linear)
{
    const double q = 0.5 * std::erfc(std::sqrt(snr_linear) / std::numbers::sqrt2);
    return 2.0 * q - q * q;
}

namespace {

constexpr std::uint64_t kSerBlock = 2048;

struct UserLink {
    std::vector<CMatrix> a;  // √ρ_k U_kᴴ H_kj V_j, per transmitter j
    CMatrix equalizer;       // d × d LMMSE filter for the desired streams
    double noise_std = 0.0;  // per-dimension std of √ρ n + w after U_kᴴ
};

} // namespace

SerResult ser_qpsk(const SystemConfig& base, const ChannelSet& ch, const PrecoderSet& v, const DecoderSet& u,
                   double snr_db, std::uint64_t channel_uses, std::uint64_t seed)
{
    SystemConfig cfg = base;
    cfg.set_power(cfg.sigma2 * std::pow(10.0, snr_db / 10.0));
    const Index d = cfg.d;

    std::vector<UserLink> links(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
        UserLink& l = links[k];
        const double rho = cfg.rho.at(k);
        if (!(rho > 0.0))
            throw Error(Errc::SplitAllEnergy, "receiver without decoding branch has no SER");
        const double noise = rho * cfg.sigma2 + cfg.delta2;
        CMatrix r = noise * CMatrix::Identity(d, d);
        for (int j = 0; j < cfg.K; ++j) {
            l.a.push_back(std::sqrt(rho) * (u[k].mat().adjoint() * ch(k, j) * v[j].mat()));
            r.noalias() += cfg.per_stream_power(j) * (l.a[j] * l.a[j].adjoint());
        }
        l.equalizer = cfg.per_stream_power(k) * (l.a[k].adjoint() * r.ldlt().solve(CMatrix::Identity(d, d)));
        l.noise_std = std::sqrt(noise);
    }

    SerResult total;
    const std::uint64_t blocks = (channel_uses + kSerBlock - 1) / kSerBlock;
    for (std::uint64_t b = 0; b < blocks; ++b) {
        Rng rng(Rng::derive(seed, b));
        const std::uint64_t uses = std::min(kSerBlock, channel_uses - b * kSerBlock);
        for (std::uint64_t t = 0; t < uses; ++t) {
            // Symbols of every user: amplitude √(p/2) per quadrature.
            std::vector<CVector> x(static_cast<std::size_t>(cfg.K), CVector(d));
            std::vector<std::vector<int>> bits(static_cast<std::size_t>(cfg.K));
            for (int j = 0; j < cfg.K; ++j) {
                const double amp = std::sqrt(cfg.per_stream_power(j) / 2.0);
                for (Index i = 0; i < d; ++i) {
                    const int re = rng.uniform() < 0.5 ? 1 : -1;
                    const int im = rng.uniform() < 0.5 ? 1 : -1;
                    x[j](i) = Complex(amp * re, amp * im);
                    bits[j].push_back(re);
                    bits[j].push_back(im);
                }
            }
            for (int k = 0; k < cfg.K; ++k) {
                const UserLink& l = links[k];
                CVector r(d);
                for (Index i = 0; i < d; ++i)
                    r(i) = l.noise_std * rng.complex_gaussian();
                for (int j = 0; j < cfg.K; ++j)
                    r.noalias() += l.a[j] * x[j];
                const CVector est = l.equalizer * r;
                for (Index i = 0; i < d; ++i) {
                    const int re = est(i).real() >= 0.0 ? 1 : -1;
                    const int im = est(i).imag() >= 0.0 ? 1 : -1;
                    if (re != bits[k][2 * i] || im != bits[k][2 * i + 1])
                        ++total.errors;
                    ++total.symbols;
                }
            }
        }
    }
    return total;
}

} // namespace cdswipt
