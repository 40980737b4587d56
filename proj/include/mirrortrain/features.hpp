#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mirrortrain/types.hpp"

namespace mirrortrain {

// EMG feature block on the kinematic frame grid: 32 single-ended MAV channels
// followed by the 496 differential-pair MAV channels, ordered by
// differential_pairs().
struct FeatureMatrix {
    Eigen::MatrixXd values;                         // frames x 528, all >= 0
    std::vector<std::pair<int, int>> channel_map;   // (c, -1) singles, then (i, j) pairs

    Eigen::Index frame_count() const { return values.rows(); }
    double t(Eigen::Index i) const { return static_cast<double>(i) / kFrameRate; }
};

// All (i, j) with i < j in lexicographic order; n*(n-1)/2 pairs.
std::vector<std::pair<int, int>> differential_pairs(int n);

// 300-ms rectangular mean-absolute-value per channel and per differential
// pair, evaluated at each frame time T over samples in (T - window, T].
// Frames earlier than one window into the recording average what exists.
FeatureMatrix extract_features(const EmgBlock& emg, Eigen::Index frame_count,
                               double window = 0.300);

}  // namespace mirrortrain
