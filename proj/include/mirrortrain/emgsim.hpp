#pragma once

#include <Eigen/Dense>

#include "mirrortrain/rng.hpp"
#include "mirrortrain/types.hpp"

namespace mirrortrain {

// Forward model from kinematics to 32-channel surface EMG. Each channel is
// white Gaussian noise amplitude-modulated by a synergy-weighted sum of
// rectified DOF velocities, so the expected MAV of a channel is
// (activation_gain * activation + baseline_noise) * sqrt(2/pi).
struct EmgModelParams {
    Eigen::MatrixXd synergy_matrix;  // 32 x 16: channel gains per DOF direction
    double baseline_noise = 0.05;    // volts, must be > 0
    double activation_gain = 1.0;    // volts per unit activation

    void validate() const;
};

// Each DOF direction drives two dedicated channels at `strong` and every
// channel at `weak`, so single-ended channels and differential pairs both
// carry usable information.
Eigen::MatrixXd default_synergy_matrix(double strong = 1.0, double weak = 0.05);

// 1 kHz synthesis from a 30 Hz stream: frame-difference velocities, linear
// upsampling, direction-split rectification, synergy mixing, then
// amplitude-modulated unit Gaussian noise per sample and channel.
EmgBlock synthesize_emg(const KinematicStream& true_stream, const EmgModelParams& params,
                        const RngKey& key);

}  // namespace mirrortrain
