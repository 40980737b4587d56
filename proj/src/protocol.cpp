#include "mirrortrain/protocol.hpp"

#include <cmath>

namespace mirrortrain {

std::vector<MovementSpec> default_movement_catalog() {
    std::vector<MovementSpec> catalog;
    const char* finger[5] = {"d1", "d2", "d3", "d4", "d5"};
    for (int f = 0; f < 5; ++f) {
        const int dof = static_cast<int>(Dof::ThumbFlexion) + f;
        catalog.push_back({std::string(finger[f]) + "_flexion", {{dof, +1}}, 1.0});
        catalog.push_back({std::string(finger[f]) + "_extension", {{dof, -1}}, 1.0});
    }
    catalog.push_back({"wrist_flexion", {{static_cast<int>(Dof::WristFlexion), +1}}, 1.0});
    catalog.push_back({"wrist_extension", {{static_cast<int>(Dof::WristFlexion), -1}}, 1.0});
    catalog.push_back({"wrist_pronation", {{static_cast<int>(Dof::WristRotation), +1}}, 1.0});
    catalog.push_back({"wrist_supination", {{static_cast<int>(Dof::WristRotation), -1}}, 1.0});
    catalog.push_back({"thumb_abduction", {{static_cast<int>(Dof::ThumbAbduction), +1}}, 1.0});
    catalog.push_back({"thumb_adduction", {{static_cast<int>(Dof::ThumbAbduction), -1}}, 1.0});

    MovementSpec combo_flex{"combined_flexion", {}, 1.0};
    MovementSpec combo_ext{"combined_extension", {}, 1.0};
    for (int f = 0; f < 5; ++f) {
        const int dof = static_cast<int>(Dof::ThumbFlexion) + f;
        combo_flex.targets.push_back({dof, +1});
        combo_ext.targets.push_back({dof, -1});
    }
    catalog.push_back(combo_flex);
    catalog.push_back(combo_ext);
    return catalog;
}

double virtual_profile(double t_in_trial, const TrialTimingParams& timing, double peak) {
    if (t_in_trial < 0.0 || t_in_trial > timing.trial_duration())
        throw Error("domain", "profile time outside trial");
    return profile_or_zero(t_in_trial, timing, peak);
}

double profile_or_zero(double t, const TrialTimingParams& timing, double peak) {
    if (t <= 0.0 || t >= timing.trial_duration()) return 0.0;
    if (t < timing.ramp_up) return peak * (t / timing.ramp_up);
    if (t <= timing.ramp_up + timing.hold) return peak;
    return peak * ((timing.trial_duration() - t) / timing.ramp_down);
}

VirtualSession generate_virtual_stream(const std::vector<MovementSpec>& catalog,
                                       const TrialTimingParams& timing) {
    if (catalog.empty()) throw Error("domain", "movement catalog is empty");
    timing.validate();

    VirtualSession session;
    session.timing = timing;
    double t = timing.initial_rest;
    for (int m = 0; m < static_cast<int>(catalog.size()); ++m) {
        for (int k = 0; k < timing.trials_per_movement; ++k) {
            TrialRecord trial;
            trial.movement = m;
            trial.trial_index = k;
            trial.t_start = t;
            trial.t_end = t + timing.trial_duration();
            trial.iti_begin = t - timing.iti;
            trial.iti_end = t;
            session.trials.push_back(trial);
            t = trial.t_end + timing.iti;
        }
    }

    const double duration = t;
    const auto frames = static_cast<Eigen::Index>(std::llround(duration * kFrameRate));
    session.stream = KinematicStream(Source::Virtual, frames);

    for (const auto& trial : session.trials) {
        const auto& movement = catalog[static_cast<size_t>(trial.movement)];
        const auto range = frame_range(trial.t_start, trial.t_end, frames);
        for (Eigen::Index i = range.begin; i < range.end; ++i) {
            const double local = session.stream.t(i) - trial.t_start;
            const double value = profile_or_zero(local, timing, movement.peak_amplitude);
            if (value == 0.0) continue;  // keep +0.0, not direction * 0.0 = -0.0
            for (const auto& target : movement.targets)
                session.stream.value(i, target.dof) = static_cast<float>(value * target.direction);
        }
    }
    return session;
}

}  // namespace mirrortrain
