#include "cdswipt/feedback.hpp"

#include <cmath>

namespace cdswipt {

FeedbackOutcome quantized_feedback(const PrecoderSet& v, const Codebook& cb)
{
    FeedbackOutcome out;
    out.mode = FeedbackMode::Quantized;
    out.bits = cb.bits;
    for (const auto& vk : v) {
        if (vk.rows() != cb.M || vk.cols() != cb.d)
            throw Error(Errc::DimensionError, "codebook shape does not match the precoders");
        auto [index, entry] = quantize(vk, cb);
        out.realized_z.push_back(chordal_distance_sq(vk, entry));
        out.indices.push_back(index);
        out.precoders.push_back(std::move(entry));
    }
    return out;
}

FeedbackOutcome analog_feedback(const PrecoderSet& v, double feedback_snr_db, std::uint64_t seed)
{
    if (!std::isfinite(feedback_snr_db))
        throw Error(Errc::InvalidArgument, "feedback SNR must be finite");
    FeedbackOutcome out;
    out.mode = FeedbackMode::Analog;
    out.feedback_snr_db = feedback_snr_db;
    const double noise_var = std::pow(10.0, -feedback_snr_db / 10.0);
    Rng rng(seed);
    for (const auto& vk : v) {
        const double signal_var = 1.0 / static_cast<double>(vk.rows());
        const double gain = signal_var / (signal_var + noise_var);
        const CMatrix received = vk.mat() + std::sqrt(noise_var) * sample_gaussian_matrix(vk.rows(), vk.cols(), rng);
        OrthonormalMatrix estimate = qr_positive(gain * received).q;
        out.realized_z.push_back(chordal_distance_sq(vk, estimate));
        out.precoders.push_back(std::move(estimate));
    }
    return out;
}

} // namespace cdswipt
