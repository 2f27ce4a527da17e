#pragma once

#include "cdswipt/ia.hpp"

#include <cstdint>
#include <vector>

namespace cdswipt {

struct MetricsRecord {
    std::vector<double> per_user_rate;   // bits/s/Hz
    double sum_rate = 0.0;
    std::vector<double> per_user_energy; // W
    double total_energy = 0.0;
    double rlub = 0.0;                   // Σ_k of the per-user rate-loss bound
    std::vector<double> realized_z;
    double snr_db = 0.0;
    double rho = 0.0;
    std::uint64_t seed = 0;
};

/// log₂|I + p_k H̄_kk H̄_kkᴴ (σ_ID² I + Σ_{j≠k} p_j H̄_kj H̄_kjᴴ)^{-1}| with
/// H̄_kj = U_kᴴ H_kj V_j. Throws SplitAllEnergy when some ρ_k = 0.
std::vector<double> per_user_rates(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v,
                                   const DecoderSet& u);
double sum_rate(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v, const DecoderSet& u);

enum class EnergyMode {
    Approximate, // receiver noise power dropped
    Exact,       // adds ζ ρ̄_k N σ²
};

/// Q_k = ζ ρ̄_k Σ_j (P_j/d) ‖H_kj V_j‖²_F.
std::vector<double> per_user_energy(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v,
                                    EnergyMode mode = EnergyMode::Approximate);
double total_energy(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v,
                    EnergyMode mode = EnergyMode::Approximate);

/// d·log₂(1 + (P/σ_ID²) M_d Σ_{j≠k} z_j) per user, M_d = M/(d(M − d)).
std::vector<double> rate_loss_bound(const SystemConfig& cfg, const std::vector<double>& z, double power);

struct SerResult {
    std::uint64_t errors = 0;
    std::uint64_t symbols = 0;
    [[nodiscard]] double ser() const { return symbols ? static_cast<double>(errors) / symbols : 0.0; }
};

/// Monte-Carlo QPSK symbol error rate with per-user MMSE equalization of
/// the decoder outputs. Every user transmits at P = σ²·10^{snr_db/10};
/// `channel_uses` vectors of d symbols each per user.
SerResult ser_qpsk(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v, const DecoderSet& u,
                   double snr_db, std::uint64_t channel_uses, std::uint64_t seed);

/// Analytic QPSK SER on AWGN at symbol SNR γ: 2Q(√γ) − Q(√γ)².
double qpsk_awgn_ser(double snr_linear);

} // namespace cdswipt
