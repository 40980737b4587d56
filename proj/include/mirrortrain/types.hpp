#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mirrortrain/error.hpp"

namespace mirrortrain {

inline constexpr int kNumDofs = 8;
inline constexpr double kFrameRate = 30.0;
inline constexpr int kEmgChannels = 32;
inline constexpr int kEmgSampleRate = 1000;
inline constexpr int kNumFeatures = 528;  // 32 single-ended + C(32,2) pairs

// Fixed DOF order shared by every stream, label vector and model.
enum class Dof : int {
    ThumbAbduction = 0,  // D1 abduction/adduction
    ThumbFlexion = 1,    // D1 flexion/extension
    IndexFlexion = 2,    // D2 flexion/extension
    MiddleFlexion = 3,   // D3 flexion/extension
    RingFlexion = 4,     // D4 flexion/extension
    LittleFlexion = 5,   // D5 flexion/extension
    WristFlexion = 6,    // wrist flexion/extension
    WristRotation = 7,   // wrist pronation/supination
};

const char* dof_name(int index);

enum class Source { True, Contralateral, Virtual };

const char* source_name(Source s);

// Range of motion in degrees with the neutral rest posture inside it.
struct RomSpec {
    double min_deg;
    double max_deg;
    double rest_deg;
};

struct NormalizedAngle {
    double value;  // in [-1, 1]; rest maps to 0
    bool clamped;  // raw angle fell outside the ROM
};

// Piecewise-linear map: rest -> 0, max -> +1, min -> -1. Out-of-range input
// is clamped and flagged.
NormalizedAngle normalize_angle(double raw_deg, const RomSpec& rom);

// Inverse of normalize_angle for in-range normalized positions.
double denormalize_angle(double pos, const RomSpec& rom);

// Deviation as percent of the full span (span = 2 in normalized units).
double deviation_percent(double pos, double rest);

struct KinematicFrame {
    double t;
    std::array<float, kNumDofs> angles;
    Source source;
};

// One 30 Hz angle stream. Frame timestamps are implicit: t_i = i / 30.
// Values are stored as float32 so the 9-significant-digit CSV form
// round-trips bit-exactly.
class KinematicStream {
public:
    KinematicStream() : source_(Source::Virtual) {}
    KinematicStream(Source source, Eigen::Index frame_count)
        : source_(source), values_(Eigen::MatrixXf::Zero(frame_count, kNumDofs)) {}

    Source source() const { return source_; }
    Eigen::Index frame_count() const { return values_.rows(); }
    double t(Eigen::Index i) const { return static_cast<double>(i) / kFrameRate; }

    float value(Eigen::Index frame, int dof) const { return values_(frame, dof); }
    float& value(Eigen::Index frame, int dof) { return values_(frame, dof); }

    const Eigen::MatrixXf& matrix() const { return values_; }
    Eigen::MatrixXf& matrix() { return values_; }

    KinematicFrame frame(Eigen::Index i) const {
        KinematicFrame f{t(i), {}, source_};
        for (int d = 0; d < kNumDofs; ++d) f.angles[static_cast<size_t>(d)] = values_(i, d);
        return f;
    }

private:
    Source source_;
    Eigen::MatrixXf values_;
};

struct TrialRecord {
    int movement = 0;     // index into the session's movement list
    int trial_index = 0;  // 0..trials_per_movement-1
    double t_start = 0;
    double t_end = 0;
    double iti_begin = 0;  // preceding intertrial rest
    double iti_end = 0;
};

struct TargetDof {
    int dof = 0;
    int direction = +1;  // +1 flexion/abduction/pronation, -1 the opposite
};

struct MovementSpec {
    std::string name;
    std::vector<TargetDof> targets;
    double peak_amplitude = 1.0;

    bool is_target(int dof) const {
        for (const auto& t : targets)
            if (t.dof == dof) return true;
        return false;
    }
};

struct TrialTimingParams {
    double ramp_up = 0.7;
    double hold = 0.1;
    double ramp_down = 0.7;
    double iti = 1.0;
    double initial_rest = 30.0;
    int trials_per_movement = 10;

    double trial_duration() const { return ramp_up + hold + ramp_down; }
    void validate() const;
};

// Raw EMG, sample-major float32 (all channels of sample 0, then sample 1, ...).
struct EmgBlock {
    int sample_rate = kEmgSampleRate;
    int channels = kEmgChannels;
    std::vector<float> samples;

    std::int64_t sample_count() const {
        return channels == 0 ? 0 : static_cast<std::int64_t>(samples.size()) / channels;
    }
    float at(std::int64_t sample, int channel) const {
        return samples[static_cast<size_t>(sample) * channels + channel];
    }
};

// One simulated participant's full recording.
struct SessionDataset {
    std::string participant_id;
    std::uint64_t seed = 0;
    TrialTimingParams timing;
    std::vector<MovementSpec> movements;
    std::vector<TrialRecord> trials;
    KinematicStream virtual_stream;
    KinematicStream true_stream;
    KinematicStream contra_stream;
    EmgBlock emg;
    double baseline_begin = 0.0;
    double baseline_end = 30.0;
    std::string config_echo;  // canonical JSON text of the generating config

    double duration() const { return trials.empty() ? baseline_end : trials.back().t_end + timing.iti; }
    const KinematicStream& stream(Source s) const;
    void validate() const;
};

// Frame indices i with lo <= i/30 < hi, clipped to [0, frame_count).
struct FrameRange {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;  // exclusive
    Eigen::Index size() const { return end > begin ? end - begin : 0; }
};
FrameRange frame_range(double lo, double hi, Eigen::Index frame_count);

}  // namespace mirrortrain
