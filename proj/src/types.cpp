#include "mirrortrain/types.hpp"

#include <algorithm>
#include <cmath>

namespace mirrortrain {

const char* dof_name(int index) {
    static constexpr const char* kNames[kNumDofs] = {
        "d1_abduction_adduction", "d1_flexion_extension",  "d2_flexion_extension",
        "d3_flexion_extension",   "d4_flexion_extension",  "d5_flexion_extension",
        "wrist_flexion_extension", "wrist_pronation_supination",
    };
    if (index < 0 || index >= kNumDofs) throw Error("domain", "dof index out of range");
    return kNames[index];
}

const char* source_name(Source s) {
    switch (s) {
        case Source::True: return "true";
        case Source::Contralateral: return "contralateral";
        case Source::Virtual: return "virtual";
    }
    throw Error("domain", "invalid stream source");
}

NormalizedAngle normalize_angle(double raw_deg, const RomSpec& rom) {
    if (!(rom.min_deg < rom.rest_deg && rom.rest_deg < rom.max_deg))
        throw Error("domain", "ROM must satisfy min < rest < max");
    bool clamped = false;
    double x = raw_deg;
    if (x < rom.min_deg) {
        x = rom.min_deg;
        clamped = true;
    } else if (x > rom.max_deg) {
        x = rom.max_deg;
        clamped = true;
    }
    const double value = x >= rom.rest_deg ? (x - rom.rest_deg) / (rom.max_deg - rom.rest_deg)
                                           : (x - rom.rest_deg) / (rom.rest_deg - rom.min_deg);
    return {value, clamped};
}

double denormalize_angle(double pos, const RomSpec& rom) {
    if (!(rom.min_deg < rom.rest_deg && rom.rest_deg < rom.max_deg))
        throw Error("domain", "ROM must satisfy min < rest < max");
    return pos >= 0.0 ? rom.rest_deg + pos * (rom.max_deg - rom.rest_deg)
                      : rom.rest_deg + pos * (rom.rest_deg - rom.min_deg);
}

double deviation_percent(double pos, double rest) {
    return std::abs(pos - rest) * 100.0 / 2.0;
}

void TrialTimingParams::validate() const {
    if (!(ramp_up > 0 && hold >= 0 && ramp_down > 0))
        throw ConfigError("trial timing segments must be positive");
    if (!(iti > 0) || !(initial_rest > 0))
        throw ConfigError("iti and initial_rest must be positive");
    if (trials_per_movement < 1)
        throw ConfigError("trials_per_movement must be >= 1");
}

const KinematicStream& SessionDataset::stream(Source s) const {
    switch (s) {
        case Source::True: return true_stream;
        case Source::Contralateral: return contra_stream;
        case Source::Virtual: return virtual_stream;
    }
    throw Error("domain", "invalid stream source");
}

void SessionDataset::validate() const {
    const Eigen::Index n = virtual_stream.frame_count();
    if (true_stream.frame_count() != n || contra_stream.frame_count() != n)
        throw Error("domain", "kinematic streams must share one frame grid");
    double prev_end = -1.0;
    for (const auto& tr : trials) {
        if (tr.t_start < prev_end) throw Error("domain", "trials overlap or are unsorted");
        prev_end = tr.t_end;
    }
    const auto expected = static_cast<std::int64_t>(std::ceil(duration() * emg.sample_rate));
    if (!emg.samples.empty() && emg.sample_count() != expected)
        throw Error("domain", "EMG sample count does not match session duration");
}

FrameRange frame_range(double lo, double hi, Eigen::Index frame_count) {
    const double eps = 1e-9;
    auto first = static_cast<Eigen::Index>(std::ceil(lo * kFrameRate - eps));
    auto last = static_cast<Eigen::Index>(std::ceil(hi * kFrameRate - eps));
    first = std::max<Eigen::Index>(first, 0);
    last = std::min(last, frame_count);
    return {first, std::max(first, last)};
}

}  // namespace mirrortrain
