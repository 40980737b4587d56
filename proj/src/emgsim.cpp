#include "mirrortrain/emgsim.hpp"

#include <algorithm>
#include <cmath>

namespace mirrortrain {

void EmgModelParams::validate() const {
    if (synergy_matrix.rows() != kEmgChannels || synergy_matrix.cols() != 2 * kNumDofs)
        throw ConfigError("synergy_matrix must be 32x16");
    if ((synergy_matrix.array() < 0.0).any())
        throw ConfigError("synergy_matrix gains must be >= 0");
    if (!(baseline_noise > 0.0)) throw ConfigError("baseline_noise must be > 0");
    if (!(activation_gain >= 0.0)) throw ConfigError("activation_gain must be >= 0");
}

Eigen::MatrixXd default_synergy_matrix(double strong, double weak) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(kEmgChannels, 2 * kNumDofs, weak);
    for (int k = 0; k < 2 * kNumDofs; ++k) {
        m(2 * k, k) = strong;
        m(2 * k + 1, k) = strong;
    }
    return m;
}

EmgBlock synthesize_emg(const KinematicStream& true_stream, const EmgModelParams& params,
                        const RngKey& key) {
    params.validate();
    const Eigen::Index n = true_stream.frame_count();
    if (n < 2) throw Error("domain", "stream too short for EMG synthesis");

    // Frame-rate velocities in normalized units per second; v[0] = 0.
    Eigen::MatrixXd vel = Eigen::MatrixXd::Zero(n, kNumDofs);
    for (Eigen::Index i = 1; i < n; ++i)
        for (int d = 0; d < kNumDofs; ++d)
            vel(i, d) = (static_cast<double>(true_stream.value(i, d)) -
                         static_cast<double>(true_stream.value(i - 1, d))) *
                        kFrameRate;

    EmgBlock emg;
    emg.sample_rate = kEmgSampleRate;
    emg.channels = kEmgChannels;
    const std::int64_t sample_count = (static_cast<std::int64_t>(n) * 100 + 2) / 3;  // ceil(n/30*1000)
    emg.samples.resize(static_cast<size_t>(sample_count) * kEmgChannels);

    std::array<RngKey, kEmgChannels> channel_keys = [&] {
        std::array<RngKey, kEmgChannels> keys;
        for (int ch = 0; ch < kEmgChannels; ++ch)
            keys[static_cast<size_t>(ch)] = key.derive(rng_tag("emg"), static_cast<uint64_t>(ch));
        return keys;
    }();

    const double frames_per_sample = kFrameRate / kEmgSampleRate;
    std::array<double, 2 * kNumDofs> u{};
    for (std::int64_t s = 0; s < sample_count; ++s) {
        const double phi = static_cast<double>(s) * frames_per_sample;
        const Eigen::Index i0 = std::min(static_cast<Eigen::Index>(phi), n - 1);
        const Eigen::Index i1 = std::min(i0 + 1, n - 1);
        const double alpha = phi - static_cast<double>(i0);
        for (int d = 0; d < kNumDofs; ++d) {
            const double v = vel(i0, d) * (1.0 - alpha) + vel(i1, d) * alpha;
            u[static_cast<size_t>(2 * d)] = std::max(v, 0.0);
            u[static_cast<size_t>(2 * d + 1)] = std::max(-v, 0.0);
        }
        float* out = emg.samples.data() + static_cast<size_t>(s) * kEmgChannels;
        for (int ch = 0; ch < kEmgChannels; ++ch) {
            double a = 0.0;
            for (int k = 0; k < 2 * kNumDofs; ++k) a += params.synergy_matrix(ch, k) * u[static_cast<size_t>(k)];
            const double envelope = params.activation_gain * a + params.baseline_noise;
            out[ch] = static_cast<float>(
                envelope * channel_keys[static_cast<size_t>(ch)].gaussian(static_cast<uint64_t>(s)));
        }
    }
    return emg;
}

}  // namespace mirrortrain
