#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "mirrortrain/protocol.hpp"
#include "mirrortrain/rng.hpp"
#include "mirrortrain/types.hpp"

namespace mirrortrain {

// Everything that separates a human performer from the preprogrammed hand:
// biomechanical coupling, resting-posture drift, reaction delay, per-trial
// magnitude variation, tracker noise, and the mirror imperfections of the
// contralateral hand.
struct ImperfectionParams {
    // Row = target DOF, column = receiving DOF, value = fraction of the
    // target profile leaked. Diagonal must be 1, off-diagonal in [0, 1).
    Eigen::Matrix<double, kNumDofs, kNumDofs> coupling_matrix =
        Eigen::Matrix<double, kNumDofs, kNumDofs>::Identity();
    double drift_step_sigma = 0.0;       // normalized units per trial
    double drift_clamp = 0.5;            // max |rest offset|
    double reaction_delay_mean = 0.0;    // seconds
    double reaction_delay_sd = 0.0;
    double magnitude_gain_mean = 1.0;    // multiplicative, per trial
    double magnitude_gain_sd = 0.0;
    double tracker_noise_sigma = 0.0;    // normalized units per frame
    double mirror_timing_jitter_sd = 0.0;  // seconds, zero-mean two-sided
    double mirror_magnitude_sd = 0.0;      // contralateral scale = 1 + m
    double mirror_rest_offset_sigma = 0.0; // independent per-ITI rest offset

    void validate() const;
};

// Uniform off-diagonal leak; the shape used by the default configuration.
Eigen::Matrix<double, kNumDofs, kNumDofs> uniform_coupling(double off_diagonal);

// Realized randomness of one trial, recorded so tests can re-derive what the
// simulator injected without re-running it.
struct TrialTruth {
    double delay = 0.0;        // reaction delay, seconds (>= 0)
    double gain = 1.0;         // magnitude gain
    double mirror_shift = 0.0; // contralateral time shift, seconds
    double mirror_gain = 1.0;  // contralateral amplitude scale (1 + m)
    bool truncated = false;    // delayed profile ran past the following ITI
    // Peak |modeled deviation| per DOF (normalized units, before noise/clamp).
    std::array<double, kNumDofs> coupling_peak{};
    std::array<double, kNumDofs> rest_offset{};        // True-hand drift
    std::array<double, kNumDofs> contra_rest_offset{}; // shared + independent
};

struct GroundTruthLog {
    std::vector<TrialTruth> trials;
};

struct TrueSimResult {
    KinematicStream stream;
    // The muscle-driven trajectory: same trial profiles without the rest-drift
    // offsets or tracker noise. Drift models a tracking artifact, so EMG
    // synthesis reads this stream rather than `stream`.
    KinematicStream motion;
    GroundTruthLog log;
};

// Renders the True stream: per trial the virtual profile is delayed by
// d ~ N(delay_mean, delay_sd) clamped at 0, scaled by g ~ N(gain_mean,
// gain_sd), leaked across DOFs through coupling_matrix, offset by a per-ITI
// clamped random walk, plus i.i.d. tracker noise; clamped to [-1, 1].
TrueSimResult simulate_true_stream(const VirtualSession& session,
                                   const std::vector<MovementSpec>& catalog,
                                   const ImperfectionParams& params,
                                   const RngKey& key);

// Renders the Contralateral stream from the same trial model: each trial's
// True trajectory time-shifted by j ~ N(0, jitter_sd) and scaled by (1 + m),
// m ~ N(0, magnitude_sd), sharing the True drift plus a small independent
// per-ITI offset. Fills the mirror fields of `log`.
KinematicStream simulate_contralateral_stream(const VirtualSession& session,
                                              const std::vector<MovementSpec>& catalog,
                                              const ImperfectionParams& params,
                                              GroundTruthLog& log,
                                              const RngKey& key);

}  // namespace mirrortrain
