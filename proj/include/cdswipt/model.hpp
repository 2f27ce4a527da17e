#pragma once

#include "cdswipt/numerics.hpp"

#include <cstdint>
#include <vector>

namespace cdswipt {

/// K-user (M × N, d) interference channel with power-splitting receivers.
struct SystemConfig {
    int M = 5;              // transmit antennas
    int N = 5;              // receive antennas
    int d = 2;              // streams per user
    int K = 3;              // users
    std::vector<double> P;  // per-user transmit power [W]
    double sigma2 = 1.0;    // receiver AWGN variance
    double delta2 = 0.1;    // splitter circuit-noise variance
    std::vector<double> rho; // fraction of received power routed to decoding
    double zeta = 0.5;      // RF-to-DC conversion efficiency

    /// Equal powers and splitting ratios for all K users.
    static SystemConfig symmetric(int m, int n, int d, int k, double power, double rho = 0.5,
                                  double sigma2 = 1.0, double delta2 = 0.1, double zeta = 0.5);

    [[nodiscard]] double rho_bar(int k) const { return 1.0 - rho.at(k); }
    [[nodiscard]] double per_stream_power(int k) const { return P.at(k) / d; }

    void set_power(double power) { P.assign(K, power); }
    void set_rho(double value) { rho.assign(K, value); }
};

/// Throws InvalidConfig when a field is out of range.
void validate(const SystemConfig& cfg);

enum class FeasibilityGate {
    Strict, // M + N - (K + 2) d >= 0
    Proper, // M + N - (K + 1) d >= 0
};

/// Feasibility check; both gates also require M >= 2d.
bool check_feasible(const SystemConfig& cfg, FeasibilityGate gate = FeasibilityGate::Proper);

/// Effective decoding noise σ² + δ²/ρ_k. Throws SplitAllEnergy if ρ_k = 0.
double sigma_id2(const SystemConfig& cfg, int k);

/// Noise level used when designing filters for user k: σ_ID² when the
/// receiver decodes, otherwise σ² + δ² (the ρ = 1 value).
double design_noise(const SystemConfig& cfg, int k);

/// All K² channel matrices, H(k, j) is N × M from transmitter j to receiver k.
class ChannelSet {
public:
    ChannelSet() = default;
    ChannelSet(int k, std::vector<CMatrix> h);

    [[nodiscard]] int users() const noexcept { return k_; }
    [[nodiscard]] const CMatrix& operator()(int k, int j) const { return h_.at(index(k, j)); }
    CMatrix& operator()(int k, int j) { return h_.at(index(k, j)); }

    /// Σ over all (k, j) of ‖H_kj‖²_F.
    [[nodiscard]] double total_power() const;

private:
    [[nodiscard]] std::size_t index(int k, int j) const
    {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(j);
    }
    int k_ = 0;
    std::vector<CMatrix> h_;
};

/// K² i.i.d. CN(0, 1) channel matrices, drawn receiver-major.
ChannelSet realize_channels(const SystemConfig& cfg, std::uint64_t seed);
ChannelSet realize_channels(const SystemConfig& cfg, Rng& rng);

/// Per-transmitter energy-branch view: stack_j has blocks √ρ̄_k·H_kj so that
/// stack_jᴴ·stack_j = gram_j = Σ_k ρ̄_k H_kjᴴ H_kj.
struct StackedChannel {
    std::vector<CMatrix> stack;
    std::vector<CMatrix> gram;
};

StackedChannel stack_channels(const SystemConfig& cfg, const ChannelSet& ch);

} // namespace cdswipt
