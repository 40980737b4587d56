#include "mirrortrain/features.hpp"

#include <cmath>

namespace mirrortrain {

std::vector<std::pair<int, int>> differential_pairs(int n) {
    if (n < 1) throw Error("domain", "channel count must be >= 1");
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<size_t>(n) * (static_cast<size_t>(n) - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    return pairs;
}

namespace {

// Emits one channel's windowed means for every frame from a prefix-sum pass.
void windowed_means(const std::vector<double>& prefix, Eigen::MatrixXd& out, Eigen::Index column,
                    std::int64_t win_samples) {
    for (Eigen::Index f = 0; f < out.rows(); ++f) {
        const std::int64_t hi = static_cast<std::int64_t>(f) * 100 / 3;  // floor(1000*t)
        const std::int64_t lo = std::max<std::int64_t>(0, hi - (win_samples - 1));
        const double sum = prefix[static_cast<size_t>(hi) + 1] - prefix[static_cast<size_t>(lo)];
        out(f, column) = sum / static_cast<double>(hi - lo + 1);
    }
}

}  // namespace

FeatureMatrix extract_features(const EmgBlock& emg, Eigen::Index frame_count, double window) {
    const std::int64_t win_samples = std::llround(window * emg.sample_rate);
    if (win_samples < 1) throw Error("domain", "feature window is empty");
    if (frame_count < 1) throw Error("domain", "no frames requested");
    if (emg.sample_rate != kEmgSampleRate)
        throw Error("domain", "feature extraction expects 1 kHz EMG");
    const std::int64_t samples = emg.sample_count();
    const std::int64_t last_needed = static_cast<std::int64_t>(frame_count - 1) * 100 / 3;
    if (samples <= last_needed) throw Error("domain", "EMG does not cover the frame grid");

    const int n_ch = emg.channels;
    const auto pairs = differential_pairs(n_ch);

    FeatureMatrix fm;
    fm.values.resize(frame_count, n_ch + static_cast<Eigen::Index>(pairs.size()));
    fm.channel_map.reserve(static_cast<size_t>(n_ch) + pairs.size());

    std::vector<double> prefix(static_cast<size_t>(samples) + 1, 0.0);
    const float* data = emg.samples.data();
    for (int c = 0; c < n_ch; ++c) {
        for (std::int64_t s = 0; s < samples; ++s)
            prefix[static_cast<size_t>(s) + 1] =
                prefix[static_cast<size_t>(s)] +
                std::abs(static_cast<double>(data[static_cast<size_t>(s) * n_ch + c]));
        windowed_means(prefix, fm.values, c, win_samples);
        fm.channel_map.emplace_back(c, -1);
    }
    for (size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        for (std::int64_t s = 0; s < samples; ++s) {
            const size_t base = static_cast<size_t>(s) * n_ch;
            prefix[static_cast<size_t>(s) + 1] =
                prefix[static_cast<size_t>(s)] +
                std::abs(static_cast<double>(data[base + i]) - static_cast<double>(data[base + j]));
        }
        windowed_means(prefix, fm.values, n_ch + static_cast<Eigen::Index>(p), win_samples);
        fm.channel_map.emplace_back(i, j);
    }
    return fm;
}

}  // namespace mirrortrain
