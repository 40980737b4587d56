#pragma once

#include <utility>
#include <vector>

#include "mirrortrain/types.hpp"

namespace mirrortrain {

// The 18 enumerable training movements: flexion/extension of D1-D5, the four
// wrist movements, thumb abduction/adduction, and the two five-finger
// combination movements. A different catalog can be supplied via config.
std::vector<MovementSpec> default_movement_catalog();

// Trapezoid position profile of one trial: linear ramp to `peak` over the
// ramp-up segment, hold, linear ramp back to zero. t_in_trial must lie within
// [0, trial_duration].
double virtual_profile(double t_in_trial, const TrialTimingParams& timing, double peak);

// Same trapezoid but zero outside [0, trial_duration]; used when shifting
// profiles across trial boundaries.
double profile_or_zero(double t, const TrialTimingParams& timing, double peak);

struct VirtualSession {
    TrialTimingParams timing;
    std::vector<TrialRecord> trials;
    KinematicStream stream;  // Source::Virtual
};

// Deterministic preprogrammed stream: initial rest, then all trials of each
// movement in catalog order, each trial followed by one intertrial rest.
// Non-target DOFs are exactly zero everywhere.
VirtualSession generate_virtual_stream(const std::vector<MovementSpec>& catalog,
                                       const TrialTimingParams& timing);

}  // namespace mirrortrain
