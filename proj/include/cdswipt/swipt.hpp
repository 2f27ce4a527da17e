#pragma once

#include "cdswipt/ia.hpp"

#include <optional>
#include <vector>

namespace cdswipt {

struct MaxEHResult {
    PrecoderSet precoders;           // top-d eigenvectors of each G_j
    std::vector<RVector> eigenvalues; // per transmitter, descending
    double max_energy = 0.0;         // ζ Σ_j (P_j/d) Σ_{i≤d} λ_ji
};

/// Per-transmitter energy-optimal precoders. Throws AllPowerToID when no
/// receiver routes power to harvesting.
MaxEHResult max_eh_precoders(const SystemConfig& cfg, const ChannelSet& ch);

/// d_c²(V_j, V_j^EH) for every user.
std::vector<double> z_eh(const PrecoderSet& ia, const MaxEHResult& eh);

/// Largest per-user distance keeping the rate-loss bound at c·(no-loss)
/// level: (c − 1)/(M_d (K − 1)) · (P/σ_ID²)^{-1}, using σ_ID² of user 0.
double z_bar(const SystemConfig& cfg, double c, double power, int k);

/// Displacement components V^BAL = V·X·Σ_Y + V^null·S·Σ_Z.
struct BalancedComponents {
    OrthonormalMatrix X; // d × d unitary
    RVector sigma_y;
    OrthonormalMatrix S; // (M − d) × d
    RVector sigma_z;
};

struct BalancedResult {
    PrecoderSet precoders;
    std::vector<double> per_user_z; // realized d_c²(V_j, V_j^BAL)
    std::vector<double> z_eh;
    std::vector<bool> used_max_eh;
    std::vector<std::vector<double>> objective_trace; // ‖H̃_j V‖²_F per iterate, per user
    std::vector<std::vector<CMatrix>> iterates;       // only filled when requested
    std::vector<double> cross_trace;                  // Re tr(Yᴴ X̃ᴴ V_jᴴ G_j V^null S Z) at exit
    std::vector<int> iterations;
    std::vector<bool> converged;
    std::vector<std::optional<BalancedComponents>> components; // empty on the max-EH branch
};

enum class ZStep {
    Exact,     // maximizes the column-separable energy over Σ_Z for the current X
    CrossTerm, // Σ_Z ∝ diag(Yᴴ X̃ᴴ V_jᴴ G_j V^null S), blended back until the energy does not drop
};

struct BalancedOptions {
    int max_iters = 6;
    double tol = 1e-9;
    bool keep_iterates = false;
    ZStep z_step = ZStep::Exact;
};

/// Alternating X/Z/Y updates at chordal distance z_j from the IA precoders.
BalancedResult balanced_precoders_iterative(const SystemConfig& cfg, const ChannelSet& ch,
                                            const PrecoderSet& ia, const MaxEHResult& eh,
                                            const std::vector<double>& z, BalancedOptions opts = {});
BalancedResult balanced_precoders_iterative(const SystemConfig& cfg, const ChannelSet& ch,
                                            const PrecoderSet& ia, const std::vector<double>& z,
                                            BalancedOptions opts = {});

/// Closed-form variant: Σ_Z from the null-space energy profile, X from V_jᴴG_jV_j.
BalancedResult balanced_precoders_noniterative(const SystemConfig& cfg, const ChannelSet& ch,
                                               const PrecoderSet& ia, const MaxEHResult& eh,
                                               const std::vector<double>& z);
BalancedResult balanced_precoders_noniterative(const SystemConfig& cfg, const ChannelSet& ch,
                                               const PrecoderSet& ia, const std::vector<double>& z);

struct EnergyBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// lower = ζ Σ_j (P_j/d)[‖H̃_j V_j‖²(1 − z_j/d) + ‖H̃_j V_j^null S_j‖²(z_j/d)],
/// upper = ζ Σ_j P_j λ_j1.
EnergyBounds energy_bounds(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& ia,
                           const MaxEHResult& eh, const std::vector<double>& z);

/// Squared per-entry values q scaled to sum to `total`, with every entry
/// capped at 1 and the excess pushed onto the uncapped ones.
RVector clipped_renormalize(RVector q, double total);

} // namespace cdswipt
