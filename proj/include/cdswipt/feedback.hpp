#pragma once

#include "cdswipt/grassmann.hpp"
#include "cdswipt/ia.hpp"

#include <cstdint>
#include <vector>

namespace cdswipt {

enum class FeedbackMode { Quantized, Analog };

struct FeedbackOutcome {
    FeedbackMode mode = FeedbackMode::Quantized;
    PrecoderSet precoders;           // what the transmitters end up using
    std::vector<double> realized_z;  // d_c² to the true precoders
    std::vector<std::size_t> indices; // codebook indices (quantized mode only)
    int bits = 0;
    double feedback_snr_db = 0.0;
};

/// Every precoder replaced by its nearest codebook entry.
FeedbackOutcome quantized_feedback(const PrecoderSet& v, const Codebook& cb);

/// Analog feedback stand-in: V + E with E i.i.d. CN(0, 1/SNR_f), scaled by
/// the entrywise MMSE gain and orthonormalized.
FeedbackOutcome analog_feedback(const PrecoderSet& v, double feedback_snr_db, std::uint64_t seed);

} // namespace cdswipt
