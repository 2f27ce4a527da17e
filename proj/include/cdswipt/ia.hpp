#pragma once

#include "cdswipt/model.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cdswipt {

using PrecoderSet = std::vector<OrthonormalMatrix>;
using DecoderSet = std::vector<OrthonormalMatrix>;

struct IASolution {
    PrecoderSet precoders;
    DecoderSet decoders;
    double leakage = 0.0;   // Σ_k Σ_{j≠k} ‖U_kᴴ H_kj V_j‖²_F
    int iterations = 0;
    bool converged = true;
    std::vector<double> objective_trace; // per sweep; the MMSE solver records the best value so far
    std::string solver;
};

struct SolverOptions {
    int max_iters = 1000;
    double tol = 1e-10;
};

/// Σ_k Σ_{j≠k} ‖U_kᴴ H_kj V_j‖²_F.
double interference_leakage(const ChannelSet& ch, const PrecoderSet& v, const DecoderSet& u);

/// max over k, j≠k of ‖U_kᴴ H_kj V_j‖_F / ‖H_kj‖_F.
double alignment_residual(const ChannelSet& ch, const PrecoderSet& v, const DecoderSet& u);

/// Smallest singular value of U_kᴴ H_kk V_k over all users.
double min_desired_singular_value(const ChannelSet& ch, const PrecoderSet& v, const DecoderSet& u);

/// Orthonormalized linear MMSE receive filters for the given precoders,
/// using the splitting-aware noise level of each receiver.
DecoderSet mmse_decoders(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v);

/// Alternating interference-leakage minimization.
IASolution solve_leakage_min(const SystemConfig& cfg, const ChannelSet& ch, std::uint64_t seed,
                             SolverOptions opts = {});

/// Alternating sum-MSE minimization with orthonormal projection of both
/// filter sets after every update.
IASolution solve_mmse(const SystemConfig& cfg, const ChannelSet& ch, std::uint64_t seed,
                      SolverOptions opts = {});

/// Same, started from the given precoders.
IASolution solve_mmse(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& start,
                      SolverOptions opts = {});

/// Closed-form subspace alignment for K = 3, M = N.
IASolution solve_subspace_3user(const SystemConfig& cfg, const ChannelSet& ch);

/// Dispatch by name: "leakage", "mmse" or "subspace3".
IASolution solve_ia(std::string_view solver, const SystemConfig& cfg, const ChannelSet& ch,
                    std::uint64_t seed, SolverOptions opts = {});

} // namespace cdswipt
